"""Named initial-condition families for runs and sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mobility import MobilityParams
from .spectral import DomainGeometry, GridField

FAMILIES = ("compact-bump", "waiting-time-profile", "constant", "single-mode",
            "custom-file")


def smoothstep(t: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 below 0, 1 above 1, 6t^5 - 15t^4 + 10t^3 between."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


@dataclass(frozen=True)
class InitialConditionSpec:
    """A named profile plus its parameters.

    ``radius`` bounds the support of the compact families; the waiting-time
    profile grows like (distance past the free boundary)^exponent near the
    support edge, defaulting to 2(s+1)/n.
    """

    family: str
    amplitude: float = 1.0
    radius: float = 1.0
    exponent: float | None = None
    value: float = 0.0
    mode: int = 1
    offset: float = 0.0
    path: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown initial-condition family {self.family!r}; "
                             f"choose one of {FAMILIES}")


def build_initial(spec: InitialConditionSpec, geometry: DomainGeometry,
                  params: MobilityParams | None = None,
                  allow_negative: bool = False) -> GridField:
    """Sample the requested family on the collocation grid."""
    if spec.family in ("compact-bump", "waiting-time-profile"):
        half = 0.5 * min(geometry.lengths)
        if not (0 < spec.radius < half):
            raise ValueError(
                f"support radius {spec.radius} must lie in (0, {half}) "
                "so the profile is compactly supported in the box")
        r = geometry.radius_grid()
        if spec.family == "compact-bump":
            values = spec.amplitude * smoothstep(1.0 - r / spec.radius)
        else:
            kappa = spec.exponent
            if kappa is None:
                if params is None:
                    raise ValueError("waiting-time profile needs mobility params "
                                     "or an explicit exponent")
                kappa = 2.0 * (params.s + 1.0) / params.n
            prof = np.clip(1.0 - (r / spec.radius) ** 2, 0.0, None)
            values = spec.amplitude * prof**kappa
    elif spec.family == "constant":
        values = np.full(geometry.quad_points, float(spec.value))
    elif spec.family == "single-mode":
        axes = geometry.grids()
        L0 = geometry.lengths[0]
        values = spec.offset + spec.amplitude * np.sqrt(2.0 / L0) * np.cos(
            spec.mode * np.pi * axes[0] / L0)
        for i in range(1, geometry.dimension):
            values = values * np.ones_like(axes[i])
    elif spec.family == "custom-file":
        if not spec.path:
            raise ValueError("custom-file family requires a path")
        values = np.load(spec.path)
        if values.shape != tuple(geometry.quad_points):
            raise ValueError(
                f"custom initial data shape {values.shape} does not match the "
                f"grid {geometry.quad_points}")
    else:  # pragma: no cover - guarded by the dataclass validator
        raise ValueError(spec.family)

    if not allow_negative and np.any(values < 0):
        raise ValueError(f"initial family {spec.family!r} produced negative values")
    return GridField(geometry=geometry, values=np.asarray(values, dtype=float))

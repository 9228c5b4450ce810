"""Free-boundary observables and localized-estimate instrumentation.

Support radii are threshold-based: at finite resolution the support of a
nodal field is the smallest centered ball containing every node above the
threshold.  The propagation-exponent fitter and waiting-time detector
post-process a sampled support series; the annular entropy report and the
remainder/tail checks evaluate the terms of the localized entropy machinery
so their boundedness can be observed on desk runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .initial import smoothstep
from .mobility import MobilityParams, entropy_G0
from .spectral import (
    DomainGeometry,
    GridField,
    SpectralField,
    frac_laplacian,
    to_coefficients,
    to_grid,
)


class InsufficientDataError(ValueError):
    """Too few activated samples to fit a propagation exponent."""


class SupportError(ValueError):
    """Support series inconsistent with the claimed initial radius."""


@dataclass
class SupportSeries:
    """Sampled support radii d(t) under a fixed detection threshold."""

    times: np.ndarray
    radii: np.ndarray
    threshold: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.radii = np.asarray(self.radii, dtype=float)
        if self.times.shape != self.radii.shape:
            raise ValueError("times and radii must have matching shapes")
        if np.any(np.diff(self.times) < 0):
            raise ValueError("sample times must be nondecreasing")


def support_radius(u: GridField, threshold: float,
                   metric: str = "radial") -> float:
    """Smallest r with |u| < threshold at every node farther than r from center."""
    if threshold <= 0:
        raise ValueError("support threshold must be positive")
    if metric not in ("radial", "sup-box"):
        raise ValueError(f"unknown support metric {metric!r}")
    geo = u.geometry
    mask = np.abs(u.values) >= threshold
    if not mask.any():
        return 0.0
    center = geo.center
    grids = geo.grids()
    if metric == "radial":
        dist = np.sqrt(sum((g - center[i]) ** 2 for i, g in enumerate(grids)))
    else:
        dist = np.maximum.reduce([np.abs(g - center[i]) for i, g in enumerate(grids)])
    return float(dist[mask].max())


def fit_propagation_exponent(series: SupportSeries, r0: float,
                             spacing: float = 0.0) -> tuple[float, float]:
    """Least-squares slope of log(d(t) - r0) against log t past activation.

    The window starts at the first sample with d > r0 + 2*spacing, which
    excludes the resolution-limited regime; the returned confidence is the
    rms residual of the fit in log space.
    """
    act = (series.radii > r0 + 2.0 * spacing) & (series.times > 0)
    if act.sum() < 10:
        raise InsufficientDataError(
            f"only {int(act.sum())} activated samples; need at least 10")
    first = int(np.argmax(act))
    t = series.times[first:]
    d = series.radii[first:]
    keep = (d > r0) & (t > 0)
    logt = np.log(t[keep])
    logd = np.log(d[keep] - r0)
    slope, intercept = np.polyfit(logt, logd, 1)
    resid = float(np.sqrt(np.mean((logd - (slope * logt + intercept)) ** 2)))
    return float(slope), resid


def detect_waiting_time(series: SupportSeries, r0: float, tol_r: float) -> float:
    """First sampled time at which the support leaves B_{r0 + tol_r}.

    Returns the final sample time if the support never exceeds the band.
    """
    if series.radii[0] > r0 + tol_r:
        raise SupportError(
            f"initial support {series.radii[0]:.4g} already exceeds "
            f"r0 + tol_r = {r0 + tol_r:.4g}")
    exceed = np.nonzero(series.radii > r0 + tol_r)[0]
    if exceed.size == 0:
        return float(series.times[-1])
    return float(series.times[exceed[0]])


# ------------------------------------------------------------------ cutoffs

# sharp constant of the quintic smoothstep: max of 30 t^2 (1-t)^2 at t = 1/2
SMOOTHSTEP_GRAD_CONSTANT = 15.0 / 8.0


@dataclass(eq=False)
class CutoffFunction:
    """Radial quintic transition: 0 on B_S, 1 outside B_{S+sigma}."""

    S: float
    sigma: float
    geometry: DomainGeometry
    order: int = 5
    values: np.ndarray = field(default=None, repr=False)

    @property
    def gradient_bound(self) -> float:
        """Analytic sup of |grad psi|, attained mid-transition."""
        return SMOOTHSTEP_GRAD_CONSTANT / self.sigma

    def profile(self, r) -> np.ndarray:
        return smoothstep((np.asarray(r, dtype=float) - self.S) / self.sigma)

    def profile_gradient(self, r) -> np.ndarray:
        t = np.clip((np.asarray(r, dtype=float) - self.S) / self.sigma, 0.0, 1.0)
        return 30.0 * t * t * (1.0 - t) ** 2 / self.sigma

    def as_grid_field(self) -> GridField:
        return GridField(geometry=self.geometry, values=self.values)


def build_cutoff(S: float, sigma: float, geometry: DomainGeometry) -> CutoffFunction:
    """Sample the annular cutoff on the collocation grid."""
    half = 0.5 * min(geometry.lengths)
    if not (0 < S < S + sigma < half):
        raise ValueError(
            f"need 0 < S < S + sigma < {half} (box half-width); got S={S}, sigma={sigma}")
    cut = CutoffFunction(S=S, sigma=sigma, geometry=geometry)
    cut.values = cut.profile(geometry.radius_grid())
    return cut


# ---------------------------------------------------------- local entropy

@dataclass
class LocalEntropyReport:
    """Terms of the annular entropy balance, all by grid quadrature."""

    S: float
    sigma: float
    final_time: float
    pi_exponent: float              # min{s/(2s+1), 1-(n-1)(s+1), (2ns-d(n-1))/(4s)}
    entropy_final: float            # int_{Omega(S+sigma)} G0(u(T))
    entropy_final_excess: float     # same with G0(0) subtracted
    dissipation_half: float         # 1/2 iint_{Omega_T(S+sigma)} |(-Lap)^((s+1)/2)(u psi)|^2
    entropy_initial: float          # int_{Omega(S)} G0(u0)
    entropy_initial_excess: float
    annulus_energy: float           # A_T(S) = iint_{Omega_T(S)} u^2
    annulus_energy_pow: float       # A_T(S)^pi_exponent
    ratio: float                    # LHS / (RHS terms without the unknown constant)


def varpi_exponent(n: float, s: float, d: int) -> float:
    return min(s / (2 * s + 1.0), 1.0 - (n - 1.0) * (s + 1.0),
               (2 * n * s - d * (n - 1.0)) / (4.0 * s))


def _annulus_mask(geometry: DomainGeometry, radius: float) -> np.ndarray:
    return geometry.radius_grid() > radius


def local_entropy_report(times: np.ndarray, fields: list[GridField],
                         params: MobilityParams, S: float, sigma: float) -> LocalEntropyReport:
    """Evaluate the annular entropy balance over sampled snapshots.

    ``fields[k]`` is the solution at ``times[k]``; the first entry is the
    initial state.  The unknown constant multiplying the right-hand terms is
    not asserted; only the term values and their ratio are reported.
    """
    if len(times) != len(fields) or len(fields) < 2:
        raise ValueError("need matching times and at least two snapshots")
    geo = fields[0].geometry
    cell = geo.cell_volume
    cut = build_cutoff(S, sigma, geo)
    outer = _annulus_mask(geo, S + sigma)
    inner = _annulus_mask(geo, S)
    g0_at_zero = entropy_G0(0.0, params.n)

    def annular_entropy(vals, mask):
        g = entropy_G0(np.maximum(vals, 0.0), params.n)
        return float(np.sum(g[mask]) * cell), float(
            np.sum((g - g0_at_zero)[mask]) * cell)

    from .spectral import build_basis
    basis = build_basis(geo)
    diss_rates = []
    energy_rates = []
    for f in fields:
        prod = GridField(geo, f.values * cut.values)
        w = frac_laplacian(to_coefficients(prod, basis), (params.s + 1.0) / 2.0)
        wv = to_grid(w).values
        diss_rates.append(float(np.sum(wv[outer] ** 2) * cell))
        energy_rates.append(float(np.sum(f.values[inner] ** 2) * cell))
    t = np.asarray(times, dtype=float)
    diss = 0.5 * float(np.trapezoid(diss_rates, t))
    a_T = float(np.trapezoid(energy_rates, t))

    ent_T, ent_T_exc = annular_entropy(fields[-1].values, outer)
    ent_0, ent_0_exc = annular_entropy(fields[0].values, inner)
    varpi = varpi_exponent(params.n, params.s, geo.dimension)
    a_pow = a_T**varpi if a_T > 0 else 0.0
    sig_pow = sigma ** (2.0 * (params.s + 1.0))
    lhs = ent_T_exc + diss
    rhs = ent_0_exc + (a_T + a_pow) / sig_pow
    ratio = lhs / rhs if rhs > 0 else math.inf if lhs > 0 else 0.0
    return LocalEntropyReport(
        S=S, sigma=sigma, final_time=float(t[-1]), pi_exponent=varpi,
        entropy_final=ent_T, entropy_final_excess=ent_T_exc,
        dissipation_half=diss, entropy_initial=ent_0,
        entropy_initial_excess=ent_0_exc, annulus_energy=a_T,
        annulus_energy_pow=a_pow, ratio=ratio)


# -------------------------------------------------- remainder and tail checks

def leibniz_remainder(u: SpectralField, v: SpectralField,
                      beta: float) -> tuple[SpectralField, float]:
    """Commutator of the fractional Laplacian with pointwise multiplication.

    Returns R = (-Lap)^beta(uv) - u (-Lap)^beta v - v (-Lap)^beta u as a
    field, plus the ratio ||R||_L2 / (||u||_L2 max|(-Lap)^beta v|); products
    are formed on the dealiased grid and projected back.
    """
    if not (0 < beta < 2):
        raise ValueError("beta must lie in (0, 2)")
    if u.basis.geometry != v.basis.geometry:
        raise ValueError("fields live on different bases")
    basis = u.basis
    geo = basis.geometry
    ug = to_grid(u).values
    vg = to_grid(v).values
    lap_u = to_grid(frac_laplacian(u, beta)).values
    lap_v = to_grid(frac_laplacian(v, beta)).values
    prod = to_coefficients(GridField(geo, ug * vg), basis)
    term1 = frac_laplacian(prod, beta).coefficients
    term2 = to_coefficients(GridField(geo, ug * lap_v), basis).coefficients
    term3 = to_coefficients(GridField(geo, vg * lap_u), basis).coefficients
    rem = SpectralField(basis, term1 - term2 - term3)
    norm_u = float(np.linalg.norm(u.coefficients))
    sup_lap_v = float(np.abs(lap_v).max())
    denom = norm_u * sup_lap_v
    ratio = float(np.linalg.norm(rem.coefficients)) / denom if denom > 0 else math.inf
    return rem, ratio


@dataclass
class TailEstimateReport:
    norm_full: float            # ||(-Lap)^alpha psi||_{L2(Omega)}
    norm_far: float             # same restricted to Omega(S + delta)
    norm_psi: float
    constant: float             # delta^(2 alpha) (full - far) / ||psi||


def tail_estimate_check(psi: CutoffFunction, alpha: float,
                        delta: float) -> TailEstimateReport:
    """Empirical constant of the near-field tail bound for (-Lap)^alpha psi."""
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    geo = psi.geometry
    half = 0.5 * min(geo.lengths)
    if not (0 < delta < half - psi.S):
        raise ValueError("delta must lie in (0, R - S)")
    cell = geo.cell_volume
    from .spectral import build_basis
    basis = build_basis(geo)
    w = to_grid(frac_laplacian(to_coefficients(psi.as_grid_field(), basis), alpha))
    far = _annulus_mask(geo, psi.S + delta)
    norm_full = float(np.sqrt(np.sum(w.values**2) * cell))
    norm_far = float(np.sqrt(np.sum(w.values[far] ** 2) * cell))
    norm_psi = float(np.sqrt(np.sum(psi.values**2) * cell))
    gap = max(norm_full - norm_far, 0.0)
    const = delta ** (2 * alpha) * gap / norm_psi if norm_psi > 0 else 0.0
    return TailEstimateReport(norm_full=norm_full, norm_far=norm_far,
                              norm_psi=norm_psi, constant=const)


# --------------------------------------------------- initial-data flatness

def flatness_density(u0: GridField, n: float, r0: float, gamma_exp: float,
                     deltas: np.ndarray | None = None):
    """Annular density of |G0(u0) - G0(0)| over shrinking shells.

    Evaluates delta^(-gamma_exp (2-n)) times the average of |G0(u0) - G0(0)|
    over the shell r0 - delta < |x| < r0, for a dyadic sweep of delta.  A
    bounded sequence indicates the flatness condition behind a positive
    waiting time.
    """
    geo = u0.geometry
    if deltas is None:
        h = max(geo.spacings)
        k = max(2, int(np.floor(np.log2(r0 / (2 * h)))))
        deltas = r0 / 2.0 ** np.arange(1, k + 1)
    r = geo.radius_grid()
    g0_at_zero = entropy_G0(0.0, n)
    g = np.abs(entropy_G0(np.maximum(u0.values, 0.0), n) - g0_at_zero)
    cell = geo.cell_volume
    rows = []
    for dl in deltas:
        shell = (r > r0 - dl) & (r <= r0)
        if not shell.any():
            rows.append((float(dl), math.nan))
            continue
        avg = float(np.sum(g[shell]) * cell) / (shell.sum() * cell)
        rows.append((float(dl), float(dl ** (-gamma_exp * (2.0 - n)) * avg)))
    return rows

"""Time integration of the spectral Galerkin system for the fractional thin-film flow.

The coefficient ODE is

    dc_j/dt = -gamma lambda_j^(s+1) c_j - F_j(c),
    F_j(c)  = quadrature of f_{eps,delta}(u) grad(p) . grad(phi_j),
    p       = (-Laplacian)^s u,

with the diagonal gamma part integrated exactly by an integrating factor and
the degenerate flux advanced by an embedded Bogacki-Shampine 3(2) pair.  The
j = 0 flux component is structurally zero, so mass is conserved to roundoff;
pairing F against the coefficients of p reproduces the grid quadrature of
f |grad p|^2 exactly, which makes the H^s energy a discrete Lyapunov function
up to time-integration error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as _fft

from .mobility import MobilityParams, entropy_integral, mobility
from .spectral import (
    DomainGeometry,
    GridField,
    SpectralField,
    build_basis,
    divergence_projection,
    gradient_from_coefficients,
    to_coefficients,
    to_grid,
)


class BlowUpError(RuntimeError):
    """Non-finite values appeared in the flux evaluation."""

    def __init__(self, t: float, max_u: float):
        super().__init__(f"solution blew up at t={t:.6g} (max|u|={max_u:.3g})")
        self.t = t
        self.max_u = max_u


class StiffnessError(RuntimeError):
    """Adaptive step size underflowed dt_min."""


@dataclass
class SolverConfig:
    """Run settings for one Galerkin integration."""

    s: float
    mobility: MobilityParams
    geometry: DomainGeometry
    final_time: float
    stepper: str = "imex"            # imex | explicit-adaptive
    dt_initial: float = 1e-6
    dt_min: float = 1e-14
    safety: float = 0.8
    rtol: float = 1e-8
    atol: float = 1e-11
    linear_mode: bool = False        # drop the nonlinear flux, keep the gamma term
    stabilized: bool = False         # fold a max-f shift into the integrating factor
    stabilization_margin: float = 1.0
    dt_fixed: float | None = None    # fixed-step mode (order studies)
    record_samples: int = 400
    record_spacing: str = "log"      # log | linear
    record_t_floor: float = 0.0      # 0 -> final_time * 1e-5
    snapshot_stride: int = 0         # >0: record every k-th accepted step instead
    support_threshold: float | None = None   # None -> 1e-6 * max|u0|
    support_metric: str = "radial"
    flux_dissipation_includes_gamma: bool = True

    def __post_init__(self):
        if self.final_time <= 0:
            raise ValueError("final_time must be positive")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("ODE tolerances must be positive")
        if not (0 < self.s < 1):
            raise ValueError("fractional order s must lie in (0,1)")
        if self.stepper not in ("imex", "explicit-adaptive"):
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if self.record_spacing not in ("log", "linear"):
            raise ValueError(f"unknown record_spacing {self.record_spacing!r}")
        if self.record_t_floor and not (0 < self.record_t_floor < self.final_time):
            raise ValueError("record_t_floor must lie inside (0, final_time)")
        if abs(self.mobility.s - self.s) > 1e-12:
            raise ValueError("mobility params carry a different fractional order")
        if self.mobility.d != self.geometry.dimension:
            raise ValueError("mobility params carry a different dimension")


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    dt: float = 0.0


@dataclass(eq=False)
class SolverState:
    t: float
    u: SpectralField
    stats: StepStats = field(default_factory=StepStats)


@dataclass
class SnapshotMeta:
    index: int
    t: float
    mass: float
    energy: float
    entropy: float
    min_u: float
    max_u: float
    path: str = ""


@dataclass(eq=False)
class RunRecord:
    """Sampled invariants of a run plus snapshot references."""

    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    entropy: np.ndarray
    dissipation: np.ndarray         # cumulative int ||u||^2_{H^{s+1}}
    flux_dissipation: np.ndarray    # cumulative int f |grad p|^2
    support_radius: np.ndarray
    min_u: np.ndarray
    max_u: np.ndarray
    snapshots: list[SnapshotMeta]
    accepted: int
    rejected: int

    COLUMNS = ("t", "mass", "energy_hs", "entropy", "dissipation",
               "support_radius", "min_u", "max_u")

    def rows(self) -> np.ndarray:
        """Time-series rows in the documented CSV column order."""
        return np.column_stack([
            self.times, self.mass, self.energy, self.entropy,
            self.dissipation, self.support_radius, self.min_u, self.max_u,
        ])


@dataclass
class IdentityReport:
    residual_energy: float
    residual_entropy: float
    energy_initial: float
    entropy_initial: float


class _Workspace:
    """Precomputed multipliers and scratch transforms for one configuration."""

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        self.basis = build_basis(cfg.geometry)
        self.lam_s = self.basis.multiplier(cfg.s)
        self.lam_s1 = self.basis.multiplier(cfg.s + 1.0)
        self.lam_2s1 = self.basis.multiplier(2.0 * cfg.s + 1.0)
        self.lam_s1_max = float(self.lam_s1.max())
        self.gamma = cfg.mobility.gamma
        self.flux_mobility = replace(cfg.mobility, gamma=0.0)
        self.cell_volume = cfg.geometry.cell_volume
        self.sqrt_volume = math.sqrt(cfg.geometry.volume)
        self._last_fmax: float | None = None
        geo = cfg.geometry
        self._fast1d = geo.dimension == 1
        if self._fast1d:
            n, m, L = geo.modes[0], geo.quad_points[0], geo.lengths[0]
            self._n, self._m = n, m
            self._inv_sqrt_h = 1.0 / math.sqrt(L / m)
            self._half_h = 0.5 * L / m
            k = np.arange(1, n)
            # d/dx of the normalized cosine: -sqrt(2/L) (k pi / L) sin(k pi x / L)
            self._sine_factor = -math.sqrt(2.0 / L) * (k * np.pi / L)

    def grid_values(self, c: np.ndarray) -> np.ndarray:
        if self._fast1d:
            cpad = np.zeros(self._m)
            cpad[: self._n] = c
            cpad *= self._inv_sqrt_h
            return _fft.idct(cpad, type=2, norm="ortho", overwrite_x=True)
        return to_grid(SpectralField(self.basis, c)).values

    def _mobility_grid(self, u: np.ndarray) -> np.ndarray:
        """Regularized mobility without the gamma shift, tuned for solver grids.

        Single stable form f = z^n / (1 + eps z^(n-alpha) + delta z^n): the
        eps term blows up harmlessly at z = 0 (f -> 0) and vanishes at large z.
        """
        p = self.flux_mobility
        z = np.maximum(u, 0.0)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            zn = z**p.n
            denom = 1.0 + p.delta * zn
            if p.epsilon:
                denom = denom + p.epsilon * z ** (p.n - p.alpha)
            return zn / denom

    def flux(self, c: np.ndarray) -> np.ndarray:
        """-F(c): the divergence-form part of the coefficient ODE."""
        if self.cfg.linear_mode:
            return np.zeros_like(c)
        if self._fast1d:
            return self._flux_1d(c)
        u = self.grid_values(c)
        grad_p = gradient_from_coefficients(self.basis, self.lam_s * c)
        f = mobility(u, self.flux_mobility)
        self._last_fmax = float(f.max())
        w = [f * g for g in grad_p]
        F = divergence_projection(self.basis, w)
        if not np.all(np.isfinite(F)):
            raise FloatingPointError("non-finite flux")
        return -F

    def _flux_1d(self, c: np.ndarray) -> np.ndarray:
        n, m = self._n, self._m
        u = self.grid_values(c)
        b = np.zeros(m)
        b[: n - 1] = (self.lam_s[1:] * c[1:]) * self._sine_factor
        grad_p = _fft.dst(b, type=3, overwrite_x=True)
        grad_p *= 0.5
        f = self._mobility_grid(u)
        self._last_fmax = float(f.max())
        w = f * grad_p
        s = _fft.dst(w, type=2, overwrite_x=True)
        F = np.zeros(n)
        F[1:] = s[: n - 1] * (self._half_h * self._sine_factor)
        if not math.isfinite(float(F[1:].sum())):
            raise FloatingPointError("non-finite flux")
        return -F

    def max_flux_mobility(self, c: np.ndarray) -> float:
        if self.cfg.linear_mode:
            return 0.0
        if self._last_fmax is not None:
            return self._last_fmax
        u = self.grid_values(c)
        if self._fast1d:
            return float(self._mobility_grid(u).max())
        return float(np.max(mobility(u, self.flux_mobility)))

    def rhs(self, c: np.ndarray) -> np.ndarray:
        return -self.gamma * self.lam_s1 * c + self.flux(c)

    def flux_dissipation_rate(self, c: np.ndarray) -> float:
        """Quadrature of f |grad p|^2, the energy-identity dissipation rate."""
        gamma_part = self.gamma * float(np.sum(self.lam_2s1 * c * c))
        if self.cfg.linear_mode:
            return gamma_part
        u = self.grid_values(c)
        grad_p = gradient_from_coefficients(self.basis, self.lam_s * c)
        f = mobility(u, self.flux_mobility)
        rate = float(sum(np.sum(f * g * g) for g in grad_p) * self.cell_volume)
        if self.cfg.flux_dissipation_includes_gamma:
            rate += gamma_part
        return rate


# Bogacki-Shampine 3(2): high-order weights and embedded error weights.
_BH = (2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0)
_BE = (2.0 / 9.0 - 7.0 / 24.0, 1.0 / 3.0 - 1.0 / 4.0, 4.0 / 9.0 - 1.0 / 3.0, -1.0 / 8.0)


class _Stepper:
    """Embedded RK3(2) with the diagonal decay handled by an integrating factor."""

    def __init__(self, ws: _Workspace):
        self.ws = ws
        self.shift = 0.0

    def prepare(self, c: np.ndarray) -> None:
        """Refresh the stabilization shift for the upcoming step."""
        cfg = self.ws.cfg
        self.shift = 0.0
        if cfg.stabilized and not cfg.linear_mode and cfg.stepper == "imex":
            self.shift = cfg.stabilization_margin * self.ws.max_flux_mobility(c)

    def _explicit(self, c: np.ndarray) -> np.ndarray:
        ws = self.ws
        if ws.cfg.stepper == "explicit-adaptive":
            return ws.rhs(c)
        out = ws.flux(c)
        if self.shift:
            out = out + self.shift * ws.lam_s1 * c
        return out

    def cfl_limit(self, c: np.ndarray) -> float:
        ws, cfg = self.ws, self.ws.cfg
        if cfg.linear_mode or (cfg.stabilized and cfg.stepper == "imex"):
            return math.inf
        fmax = ws.max_flux_mobility(c)
        gamma_term = ws.gamma if cfg.stepper == "explicit-adaptive" else 0.0
        scale = (fmax + gamma_term) * ws.lam_s1_max
        return math.inf if scale <= 0 else cfg.safety / scale

    def attempt(self, c: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        """One trial step from c over dt; returns (c_new, scaled error norm)."""
        ws = self.ws
        if ws.cfg.stepper == "explicit-adaptive":
            k1 = self._explicit(c)
            k2 = self._explicit(c + 0.5 * dt * k1)
            k3 = self._explicit(c + 0.75 * dt * k2)
            c_new = c + dt * (_BH[0] * k1 + _BH[1] * k2 + _BH[2] * k3)
            k4 = self._explicit(c_new)
            err = dt * (_BE[0] * k1 + _BE[1] * k2 + _BE[2] * k3 + _BE[3] * k4)
            return c_new, self._error_norm(err, c, c_new)

        rate = (ws.gamma + self.shift) * ws.lam_s1
        e4 = np.exp(-0.25 * dt * rate)     # E(dt/4)
        e2 = e4 * e4                       # E(dt/2)
        e1 = e2 * e2                       # E(dt)
        k1 = self._explicit(c)
        c2 = e2 * (c + 0.5 * dt * k1)
        k2 = self._explicit(c2)
        c3 = e2 * e4 * c + 0.75 * dt * e4 * k2
        k3 = self._explicit(c3)
        c_new = e1 * c + dt * (_BH[0] * e1 * k1 + _BH[1] * e2 * k2 + _BH[2] * e4 * k3)
        k4 = self._explicit(c_new)
        err = dt * (_BE[0] * e1 * k1 + _BE[1] * e2 * k2 + _BE[2] * e4 * k3 + _BE[3] * k4)
        return c_new, self._error_norm(err, c, c_new)

    def _error_norm(self, err_vec, c_old, c_new) -> float:
        cfg = self.ws.cfg
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(c_old), np.abs(c_new))
        return float(np.sqrt(np.mean((err_vec / scale) ** 2)))


def _advance(ws: _Workspace, stepper: _Stepper, t: float, c: np.ndarray,
             dt: float, t_stop: float, stats: StepStats):
    """Advance by one accepted step, honoring the CFL guard and t_stop."""
    cfg = ws.cfg
    fixed = cfg.dt_fixed is not None
    while True:
        stepper.prepare(c)
        dt_cap = stepper.cfl_limit(c)
        if not fixed:
            dt = min(dt, dt_cap, t_stop - t)
        else:
            dt = min(cfg.dt_fixed, t_stop - t)
        if dt <= 0:
            raise StiffnessError(f"step size collapsed to {dt:.3g} at t={t:.6g}")
        try:
            c_new, err = stepper.attempt(c, dt)
            bad = not np.all(np.isfinite(c_new))
        except FloatingPointError:
            u = ws.grid_values(c)
            raise BlowUpError(t, float(np.abs(u).max()))
        if bad:
            u = ws.grid_values(c)
            raise BlowUpError(t, float(np.abs(u).max()))
        if fixed or err <= 1.0:
            if err == 0.0:
                growth = 5.0
            else:
                growth = min(5.0, max(0.2, cfg.safety * err ** (-1.0 / 3.0)))
            dt_next = dt if fixed else dt * growth
            stats.accepted += 1
            stats.dt = dt
            return t + dt, c_new, dt_next
        stats.rejected += 1
        dt = dt * min(1.0, max(0.1, cfg.safety * err ** (-1.0 / 3.0)))
        if dt < cfg.dt_min:
            raise StiffnessError(f"step size underflow below dt_min at t={t:.6g}")


def rhs(u: SpectralField, cfg: SolverConfig) -> SpectralField:
    """Time derivative of the coefficients at state u."""
    ws = _Workspace(cfg)
    if u.geometry != cfg.geometry:
        raise ValueError("field geometry does not match solver configuration")
    try:
        return SpectralField(ws.basis, ws.rhs(u.coefficients))
    except FloatingPointError:
        vals = ws.grid_values(u.coefficients)
        raise BlowUpError(math.nan, float(np.abs(vals).max())) from None


def step(state: SolverState, cfg: SolverConfig) -> SolverState:
    """Advance the state by one accepted adaptive step."""
    ws = _Workspace(cfg)
    stepper = _Stepper(ws)
    stats = StepStats(accepted=state.stats.accepted, rejected=state.stats.rejected)
    dt = state.stats.dt or cfg.dt_initial
    t, c, dt_next = _advance(ws, stepper, state.t, state.u.coefficients.copy(),
                             dt, cfg.final_time, stats)
    stats.dt = dt_next
    return SolverState(t=t, u=SpectralField(ws.basis, c), stats=stats)


def _record_times(cfg: SolverConfig) -> np.ndarray:
    T = cfg.final_time
    n = max(2, cfg.record_samples)
    if cfg.record_spacing == "linear":
        return np.linspace(0.0, T, n + 1)
    floor = cfg.record_t_floor if cfg.record_t_floor > 0 else T * 1e-5
    return np.concatenate([[0.0], np.geomspace(floor, T, n)])


def _support_radius_grid(values: np.ndarray, geometry: DomainGeometry,
                         threshold: float, metric: str) -> float:
    mask = np.abs(values) >= threshold
    if not mask.any():
        return 0.0
    center = geometry.center
    grids = geometry.grids()
    if metric == "radial":
        r2 = sum((g - center[i]) ** 2 for i, g in enumerate(grids))
        return float(np.sqrt(r2[mask].max()))
    dist = np.maximum.reduce([np.abs(g - center[i]) for i, g in enumerate(grids)])
    return float(dist[mask].max())


class _Recorder:
    def __init__(self, ws: _Workspace, threshold: float, snapshot_sink=None):
        self.ws = ws
        self.threshold = threshold
        self.sink = snapshot_sink
        self.rows = {k: [] for k in ("t", "mass", "energy", "entropy", "diss_rate",
                                     "flux_rate", "support", "min_u", "max_u")}
        self.snapshots: list[SnapshotMeta] = []

    def record(self, t: float, c: np.ndarray, take_snapshot: bool) -> None:
        ws = self.ws
        u = ws.grid_values(c)
        mass = float(c[(0,) * c.ndim] * ws.sqrt_volume)
        energy = float(np.sum(ws.lam_s * c * c))
        diss_rate = float(np.sum(ws.lam_s1 * c * c))
        entropy = entropy_integral(u, ws.cell_volume, ws.cfg.mobility)
        support = _support_radius_grid(u, ws.cfg.geometry, self.threshold,
                                       ws.cfg.support_metric)
        r = self.rows
        r["t"].append(t)
        r["mass"].append(mass)
        r["energy"].append(energy)
        r["entropy"].append(entropy)
        r["diss_rate"].append(diss_rate)
        r["flux_rate"].append(ws.flux_dissipation_rate(c))
        r["support"].append(support)
        r["min_u"].append(float(u.min()))
        r["max_u"].append(float(u.max()))
        if take_snapshot and self.sink is not None:
            meta = SnapshotMeta(index=len(self.snapshots), t=t, mass=mass,
                                energy=energy, entropy=entropy,
                                min_u=float(u.min()), max_u=float(u.max()))
            meta.path = self.sink(meta, c)
            self.snapshots.append(meta)

    def finish(self, stats: StepStats) -> RunRecord:
        r = self.rows
        t = np.asarray(r["t"])
        diss = np.concatenate([[0.0], np.cumsum(
            0.5 * (np.asarray(r["diss_rate"])[1:] + np.asarray(r["diss_rate"])[:-1])
            * np.diff(t))])
        flux = np.concatenate([[0.0], np.cumsum(
            0.5 * (np.asarray(r["flux_rate"])[1:] + np.asarray(r["flux_rate"])[:-1])
            * np.diff(t))])
        return RunRecord(
            times=t, mass=np.asarray(r["mass"]), energy=np.asarray(r["energy"]),
            entropy=np.asarray(r["entropy"]), dissipation=diss,
            flux_dissipation=flux, support_radius=np.asarray(r["support"]),
            min_u=np.asarray(r["min_u"]), max_u=np.asarray(r["max_u"]),
            snapshots=self.snapshots, accepted=stats.accepted, rejected=stats.rejected,
        )


def run(u0: GridField, cfg: SolverConfig, snapshot_sink=None,
        snapshot_count: int = 0) -> RunRecord:
    """Integrate from nodal initial data to final_time, sampling invariants.

    ``snapshot_sink(meta, coeffs) -> path`` persists full coefficient arrays at
    ``snapshot_count`` of the record checkpoints (always including the first
    and last).
    """
    ws = _Workspace(cfg)
    stepper = _Stepper(ws)
    c = to_coefficients(u0, ws.basis).coefficients
    threshold = cfg.support_threshold
    if threshold is None:
        threshold = 1e-6 * max(float(np.abs(u0.values).max()), 1e-300)

    rec = _Recorder(ws, threshold, snapshot_sink)
    checkpoints = _record_times(cfg)
    snap_ids = set()
    if snapshot_sink is not None and snapshot_count > 0:
        snap_ids = set(np.unique(np.linspace(
            0, len(checkpoints) - 1, min(snapshot_count, len(checkpoints))
        ).astype(int)))

    stats = StepStats()
    t = 0.0
    rec.record(t, c, take_snapshot=0 in snap_ids)
    next_idx = 1
    dt = cfg.dt_initial
    stride = cfg.snapshot_stride
    eps_T = 1e-14 * cfg.final_time

    while t < cfg.final_time - eps_T:
        t_stop = cfg.final_time if stride > 0 else checkpoints[next_idx]
        t, c, dt = _advance(ws, stepper, t, c, dt, t_stop, stats)
        done = t >= cfg.final_time - eps_T
        if stride > 0:
            if stats.accepted % stride == 0 or done:
                rec.record(t, c, take_snapshot=done and snapshot_sink is not None)
        elif t >= t_stop - eps_T:
            rec.record(t, c, take_snapshot=next_idx in snap_ids)
            next_idx = min(next_idx + 1, len(checkpoints) - 1)

    record = rec.finish(stats)
    if np.any(record.min_u <= 0) and cfg.mobility.epsilon > 0 and not cfg.linear_mode:
        warnings.warn(
            "solution lost strict positivity during the run "
            f"(min u = {record.min_u.min():.3g})", RuntimeWarning, stacklevel=2)
    return record


def verify_identities(record: RunRecord, cfg: SolverConfig) -> IdentityReport:
    """Residuals of the energy and entropy balances over the recorded run."""
    e0, eT = record.energy[0], record.energy[-1]
    g0, gT = record.entropy[0], record.entropy[-1]
    res_e = abs(eT + 2.0 * record.flux_dissipation[-1] - e0)
    res_s = abs(gT + record.dissipation[-1] - g0)
    norm_e = e0 if e0 > 0 else 1.0
    norm_s = abs(g0) if (np.isfinite(g0) and abs(g0) > 0) else 1.0
    return IdentityReport(
        residual_energy=res_e / norm_e,
        residual_entropy=res_s / norm_s if np.isfinite(res_s) else math.inf,
        energy_initial=e0,
        entropy_initial=g0,
    )

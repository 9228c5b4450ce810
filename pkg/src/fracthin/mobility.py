"""Power-law mobility, its regularizations, and the associated entropy functions.

The mobility f(z) = (z)_+^n is regularized in two steps: epsilon strengthens
the degeneracy near zero to ~ z^alpha/epsilon and delta caps the growth at
1/delta; adding gamma bounds it away from zero,

    f_{eps,delta}(z) = z^(n+alpha) / (z^alpha + eps z^n + delta z^(n+alpha)),
    f_{eps,delta,gamma} = f_{eps,delta} + gamma.

Each mobility has a convex entropy G with G'' = 1/f normalized by
G(1) = G'(1) = 0.  For gamma = 0 the entropy has a closed form; for gamma > 0
it is computed by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate


class MobilityError(ValueError):
    """Invalid mobility parameters or non-finite input."""


def alpha_floor(n: float, s: float, d: int) -> float:
    """Smallest admissible degeneracy exponent for a strictly positive lift."""
    gap = 2 * (s + 1) - d
    if gap <= 0:
        raise MobilityError(f"need s > (d-2)/2 for the degeneracy exponent (s={s}, d={d})")
    return max(2.0 + 2.0 * d / gap, n)


def default_alpha(n: float, s: float, d: int) -> float:
    """Strict inequality with margin; keeps Lipschitz constants moderate."""
    return alpha_floor(n, s, d) + 0.5


@dataclass(frozen=True)
class MobilityParams:
    """Exponent and regularization parameters (n, eps, delta, gamma, alpha, s, d)."""

    n: float
    epsilon: float = 0.0
    delta: float = 0.0
    gamma: float = 0.0
    s: float = 0.5
    d: int = 1
    alpha: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise MobilityError(f"mobility exponent must satisfy n >= 1, got {self.n}")
        if not (0 < self.s < 1):
            raise MobilityError(f"fractional order must lie in (0,1), got {self.s}")
        if min(self.epsilon, self.delta, self.gamma) < 0:
            raise MobilityError("regularization parameters must be nonnegative")
        if self.d not in (1, 2, 3):
            raise MobilityError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", default_alpha(self.n, self.s, self.d))
        if self.epsilon > 0 and self.alpha <= alpha_floor(self.n, self.s, self.d):
            raise MobilityError(
                f"alpha={self.alpha} must exceed max(2 + 2d/(2(s+1)-d), n) "
                f"= {alpha_floor(self.n, self.s, self.d)} when epsilon > 0"
            )

    def in_existence_window(self) -> bool:
        """Whether n lies below (d + 2(1-s)) / (d - 2s)_+ (with 1/0 = +inf)."""
        denom = self.d - 2 * self.s
        if denom <= 0:
            return True
        return self.n < (self.d + 2 * (1 - self.s)) / denom


@dataclass(frozen=True)
class LiftParams:
    """Exponents of the strict-positivity lift u0 + eps^theta1 + delta^theta2."""

    theta1: float
    theta2: float = 1.0

    def validate(self, p: MobilityParams) -> None:
        hi = 1.0 / (p.alpha - 2.0)
        if not (0 < self.theta1 < hi):
            raise MobilityError(f"theta1 must lie in (0, 1/(alpha-2)) = (0, {hi})")
        if self.theta2 <= 0:
            raise MobilityError("theta2 must be positive")


def default_lift(p: MobilityParams) -> LiftParams:
    return LiftParams(theta1=min(1.0, 1.0 / (p.alpha - 2.0)) / 2.0, theta2=1.0)


def lift_magnitude(p: MobilityParams, lift: LiftParams | None = None) -> float:
    lift = default_lift(p) if lift is None else lift
    lift.validate(p)
    mag = 0.0
    if p.epsilon > 0:
        mag += p.epsilon**lift.theta1
    if p.delta > 0:
        mag += p.delta**lift.theta2
    return mag


def lift_initial_datum(values: np.ndarray, p: MobilityParams,
                       lift: LiftParams | None = None) -> np.ndarray:
    """Raise nonnegative nodal data by eps^theta1 + delta^theta2."""
    values = np.asarray(values, dtype=float)
    if np.any(values < 0):
        raise MobilityError("initial datum must be nonnegative before lifting")
    return values + lift_magnitude(p, lift)


def mobility(z, p: MobilityParams):
    """Regularized mobility f_{eps,delta,gamma}; returns gamma for z <= 0."""
    z = np.asarray(z, dtype=float)
    if np.any(np.isnan(z)):
        raise MobilityError("mobility input contains NaN")
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.full_like(z, p.gamma)
    pos = z > 0
    zp = z[pos]
    if zp.size:
        n, a, eps, dl = p.n, p.alpha, p.epsilon, p.delta
        small = zp < 1.0
        f = np.empty_like(zp)
        with np.errstate(over="ignore", invalid="ignore"):
            # z < 1: all exponents positive since alpha > n
            zs = zp[small]
            f[small] = zs**a / (zs ** (a - n) + eps + dl * zs**a)
            # z >= 1: negative exponent n - alpha stays bounded
            zl = zp[~small]
            f[~small] = zl**n / (1.0 + eps * zl ** (n - a) + dl * zl**n)
        out[pos] = f + p.gamma
    return float(out[0]) if scalar else out


def mobility_prime(z, p: MobilityParams):
    """Derivative of f_{eps,delta} (the gamma shift does not change it)."""
    z = np.asarray(z, dtype=float)
    if np.any(np.isnan(z)):
        raise MobilityError("mobility input contains NaN")
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.zeros_like(z)
    pos = z > 0
    zp = z[pos]
    if zp.size:
        n, a, eps, dl = p.n, p.alpha, p.epsilon, p.delta
        small = zp < 1.0
        fp = np.empty_like(zp)
        zs = zp[small]
        fp[small] = (n * zs ** (2 * a - n - 1) + eps * a * zs ** (a - 1)) / (
            zs ** (a - n) + eps + dl * zs**a) ** 2
        zl = zp[~small]
        fp[~small] = zl ** (n - 1) * (n + eps * a * zl ** (n - a)) / (
            1.0 + eps * zl ** (n - a) + dl * zl**n) ** 2
        out[pos] = fp
    return float(out[0]) if scalar else out


def entropy_G0(z, n: float):
    """Convex entropy with G'' = z^{-n}, normalized by G(1) = G'(1) = 0.

    Returns +inf for negative arguments; the value at zero is the one-sided
    limit (finite only for n < 2).
    """
    if n < 1:
        raise MobilityError("entropy exponent must satisfy n >= 1")
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.full_like(z, np.inf)
    if n == 1:
        limit0 = 1.0
    elif n < 2:
        limit0 = 1.0 / (2.0 - n)
    else:
        limit0 = np.inf
    out[z == 0] = limit0
    pos = z > 0
    zp = z[pos]
    if zp.size:
        if n == 1:
            vals = zp * np.log(zp) - zp + 1.0
        elif n == 2:
            vals = -np.log(zp) + zp - 1.0
        else:
            vals = (zp ** (2.0 - n) / ((n - 2.0) * (n - 1.0))
                    + zp / (n - 1.0)
                    + (1.0 / (2.0 - n) if n < 2 else -1.0 / (n - 2.0)))
        out[pos] = vals
    return float(out[0]) if scalar else out


def _entropy_eps_delta(z, p: MobilityParams):
    """Closed form for gamma = 0: G0 plus the epsilon and delta corrections."""
    z = np.asarray(z, dtype=float)
    out = entropy_G0(z, p.n)
    pos = np.atleast_1d(z) > 0
    zp = np.atleast_1d(z)[pos]
    corr = np.zeros_like(zp)
    a = p.alpha
    if p.epsilon > 0:
        corr += (p.epsilon / (a - 1.0)) * (
            zp ** (2.0 - a) / (a - 2.0) - 1.0 / (a - 2.0) + zp - 1.0)
    if p.delta > 0:
        corr += 0.5 * p.delta * (zp - 1.0) ** 2
    if np.ndim(out) == 0:
        return float(out + corr[0]) if pos.any() else float(out)
    out[pos] = out[pos] + corr
    return out


def _g2(t, p: MobilityParams):
    """Second derivative of the regularized entropy: 1/f_{eps,delta,gamma}."""
    return 1.0 / mobility(t, p)


def _quad_breakpoints(p: MobilityParams, lo: float, hi: float) -> list[float]:
    pts = []
    if p.epsilon > 0 and p.gamma > 0:
        # transition where the eps-degenerate branch crosses the gamma floor
        zstar = (p.epsilon * p.gamma) ** (1.0 / p.alpha)
        for c in (0.3 * zstar, zstar, 3.0 * zstar):
            if lo < c < hi:
                pts.append(c)
    if lo < 0 < hi:
        pts.append(0.0)
    return sorted(pts)


def entropy_reg_scalar(z: float, p: MobilityParams) -> float:
    """Regularized entropy at one point.

    gamma = 0 uses the closed form (and is +inf for z <= 0); gamma > 0 is
    evaluated by adaptive quadrature of (z - t)/f(t) from the anchor at 1.
    """
    z = float(z)
    if not math.isfinite(z):
        raise MobilityError("entropy argument must be finite")
    if p.gamma == 0:
        return float(_entropy_eps_delta(z, p)) if z > 0 else math.inf
    if z == 1.0:
        return 0.0
    lo, hi = (z, 1.0) if z < 1.0 else (1.0, z)
    pts = _quad_breakpoints(p, lo, hi)
    val, err = integrate.quad(lambda t: (z - t) * _g2(t, p), lo, hi,
                              points=pts or None, limit=300,
                              epsabs=1e-12, epsrel=1e-11)
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise MobilityError(f"entropy quadrature did not converge at z={z}")
    # quad integrates left-to-right; G(z) = int_1^z flips sign below the anchor
    return float(val) if z > 1.0 else float(-val)


def entropy_reg(z, p: MobilityParams):
    """Regularized entropy G_{eps,delta,gamma}; vectorized over z."""
    if np.isscalar(z) or np.ndim(z) == 0:
        return entropy_reg_scalar(float(z), p)
    z = np.asarray(z, dtype=float)
    if p.gamma == 0:
        return _entropy_eps_delta(z, p)
    return _entropy_reg_array(z, p)


def _entropy_reg_array(z: np.ndarray, p: MobilityParams) -> np.ndarray:
    """Grid evaluation of the gamma > 0 entropy via cumulative quadrature.

    Writing G(z) = z*A(z) - B(z) with A = int_1^z G'' and B = int_1^z t G''
    turns the z-dependent kernel into two cumulative integrals shared by all
    evaluation points.
    """
    flat = z.reshape(-1)
    lo = min(flat.min(), 1.0)
    hi = max(flat.max(), 1.0)
    nodes = [flat, np.array([1.0, lo, hi]), np.linspace(lo, hi, 4001)]
    if p.epsilon > 0 and lo < 0.5:
        start = max(lo, 1e-12) if lo > 0 else 1e-12
        nodes.append(np.geomspace(start, min(1.0, hi), 1500))
    grid = np.unique(np.concatenate(nodes))
    g2 = _g2(grid, p)
    A = integrate.cumulative_simpson(g2, x=grid, initial=0.0)
    B = integrate.cumulative_simpson(grid * g2, x=grid, initial=0.0)
    i1 = np.searchsorted(grid, 1.0)
    A -= A[i1]
    B -= B[i1]
    idx = np.searchsorted(grid, flat)
    vals = flat * A[idx] - B[idx]
    return vals.reshape(z.shape)


def entropy_integral(values: np.ndarray, cell_volume: float, p: MobilityParams,
                     use_G0: bool = False) -> float:
    """Quadrature of the selected entropy over nodal values.

    With ``use_G0`` any negative node makes the integral +inf (reported as a
    sentinel rather than raising), matching the extended-value convention.
    """
    values = np.asarray(values, dtype=float)
    if use_G0:
        if np.any(values < 0):
            return math.inf
        g = entropy_G0(values, p.n)
    else:
        g = entropy_reg(values, p)
    if np.any(~np.isfinite(g)):
        return math.inf
    return float(np.sum(g) * cell_volume)

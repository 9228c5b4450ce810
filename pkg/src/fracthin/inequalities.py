"""Numeric oracles for the interpolation inequality and iteration lemmas.

Each lemma is turned into a falsifiable procedure: hypotheses are verified on
a finite sample grid, and only when every check passes is the lemma's
conclusion asserted against the sampled function.  A report that asserts a
conclusion therefore always carries passing hypothesis checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .spectral import SpectralField, seminorm, to_grid

# shared numerical-zero tolerance: |f| below this multiple of f(0) counts as zero
NUMERICAL_ZERO_FACTOR = 1e-12

# tolerance for verifying inequality hypotheses at near-equality sample pairs
_HYP_SLACK = 1e-9


class DegenerateInputError(ValueError):
    """Zero denominators in a ratio measurement."""


@dataclass(eq=False)
class DecreasingSampler:
    """A nonnegative, nonincreasing function observed on a finite sample set."""

    func: object
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))
        vals = self(self.samples)
        if np.any(vals < -1e-15 * max(1.0, abs(vals[0]))):
            raise ValueError("sampler rejected: negative values on the sample set")
        tol = 1e-12 * max(1.0, abs(float(vals[0])))
        if np.any(np.diff(vals) > tol):
            raise ValueError("sampler rejected: function increases on the sample set")

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    @classmethod
    def geometric(cls, func, lo: float, hi: float, num: int = 64) -> "DecreasingSampler":
        """Default 64-point geometric grid; a zero left endpoint is included."""
        if hi <= lo:
            raise ValueError("need hi > lo")
        if lo > 0:
            pts = np.geomspace(lo, hi, num)
        else:
            pts = np.concatenate([[0.0], np.geomspace(hi * 1e-6, hi, num - 1)])
        return cls(func=func, samples=pts)


@dataclass
class LemmaReport:
    """Hypothesis outcomes and the asserted (or withheld) conclusion."""

    lemma: str
    hypotheses: dict = dataclass_field(default_factory=dict)
    prediction: dict = dataclass_field(default_factory=dict)
    observed: dict = dataclass_field(default_factory=dict)
    conclusion_holds: bool | None = None

    @property
    def hypotheses_ok(self) -> bool:
        return all(self.hypotheses.values())

    def to_jsonable(self) -> dict:
        return {
            "lemma": self.lemma,
            "hypotheses": dict(self.hypotheses),
            "hypotheses_ok": self.hypotheses_ok,
            "prediction": dict(self.prediction),
            "observed": dict(self.observed),
            "conclusion_holds": self.conclusion_holds,
        }


# --------------------------------------------------------------- GN ratio

def gn_theta(b: float, s: float, dim: int) -> float:
    return (1.0 / b - 0.5) / (1.0 / b + (s + 1.0) / dim - 0.5)


def gn_ratio(v: SpectralField, b: float, s: float) -> tuple[float, float]:
    """Measured constant of the interpolation bound on ||v||_L2.

    Returns (ratio, theta) with
    ratio = ||v||_2 / (||(-Lap)^((s+1)/2) v||^theta ||v||_b^(1-theta) + ||v||_b).
    """
    if not (0 < b < 2):
        raise ValueError("b must lie in (0, 2)")
    if not (0 < s < 1):
        raise ValueError("s must lie in (0, 1)")
    geo = v.geometry
    theta = gn_theta(b, s, geo.dimension)
    norm2 = float(np.linalg.norm(v.coefficients))
    grid = to_grid(v).values
    norm_b = float((np.sum(np.abs(grid) ** b) * geo.cell_volume) ** (1.0 / b))
    high = seminorm(v, s + 1.0)
    denom = high**theta * norm_b ** (1.0 - theta) + norm_b
    if denom == 0.0:
        raise DegenerateInputError("zero denominator: field vanishes")
    return norm2 / denom, theta


# ------------------------------------------------------- iteration lemmas

def _recurrence_pairs(samples: np.ndarray, x0: float):
    pts = samples[samples >= x0]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            yield pts[i], pts[j]


def stampacchia_classic(f: DecreasingSampler, x0: float, C: float,
                        alpha: float, beta: float) -> LemmaReport:
    """Recurrence-to-vanishing oracle: f(y) <= C (y-x)^-alpha f(x)^beta.

    beta > 1 yields a predicted vanishing point, beta = 1 an exponential
    envelope, beta < 1 (requiring x0 > 0) a power envelope.
    """
    if min(C, alpha, beta) <= 0:
        raise ValueError("constants C, alpha, beta must be positive")
    rep = LemmaReport(lemma="iteration-classic")
    f_x0 = float(f(x0))
    zero_tol = NUMERICAL_ZERO_FACTOR * f_x0

    ok = True
    worst = 0.0
    for x, y in _recurrence_pairs(f.samples, x0):
        bound = C * (y - x) ** (-alpha) * float(f(x)) ** beta
        val = float(f(y))
        worst = max(worst, val - bound)
        if val > bound * (1 + _HYP_SLACK) + 1e-300:
            ok = False
    rep.hypotheses["recurrence"] = ok
    rep.observed["max_recurrence_excess"] = worst

    if beta < 1 and x0 <= 0:
        rep.hypotheses["positive_origin"] = False
        return rep
    if not ok:
        return rep

    tail = f.samples[f.samples >= x0]
    vals = f(tail)
    if beta > 1:
        d = (C * f_x0 ** (beta - 1.0) * 2.0 ** (alpha * beta / (beta - 1.0))) ** (1.0 / alpha)
        rep.prediction["vanishing_point"] = x0 + d
        beyond = tail >= x0 + d
        rep.observed["max_beyond"] = float(vals[beyond].max()) if beyond.any() else 0.0
        rep.conclusion_holds = bool(np.all(vals[beyond] <= zero_tol)) if beyond.any() else True
    elif beta == 1:
        zeta = (math.e * C) ** (-1.0 / alpha)
        rep.prediction["decay_rate"] = zeta
        envelope = np.exp(1.0 - zeta * (tail - x0)) * f_x0
        rep.observed["max_envelope_excess"] = float((vals - envelope).max())
        rep.conclusion_holds = bool(np.all(vals <= envelope * (1 + _HYP_SLACK) + zero_tol))
    else:
        mu = alpha / (1.0 - beta)
        amp = 2.0 ** (mu / (1.0 - beta)) * (
            C ** (1.0 / (1.0 - beta)) + (2.0 * x0) ** mu * f_x0)
        rep.prediction["envelope_exponent"] = mu
        rep.prediction["envelope_amplitude"] = amp
        envelope = amp * tail**-mu
        rep.observed["max_envelope_excess"] = float((vals - envelope).max())
        rep.conclusion_holds = bool(np.all(vals <= envelope * (1 + _HYP_SLACK) + zero_tol))
        rep.hypotheses["positive_origin"] = True
    return rep


def stampacchia_geometric(f: DecreasingSampler, eps: float, nu: float) -> LemmaReport:
    """Geometric-series oracle: f(s + delta) <= eps f(s)^nu forces vanishing.

    The predicted threshold is d = f(0) / (1 - eps f(0)^(nu-1)).  The
    recurrence is spot-verified along the iteration sequence
    s_{n+1} = s_n + f(0) A^n, A = eps f(0)^(nu-1), which is where the
    argument invokes it; a gap-free check over arbitrary small increments
    would be unsatisfiable for any continuous decreasing function.
    """
    rep = LemmaReport(lemma="iteration-geometric")
    rep.hypotheses["nu_gt_1"] = nu > 1
    f0 = float(f(0.0))
    cap = math.inf if f0 == 0 else f0 ** (1.0 - nu)
    rep.hypotheses["eps_in_range"] = 0 < eps < cap
    if not rep.hypotheses_ok:
        return rep
    ok = True
    worst = 0.0
    if f0 > 0:
        A = eps * f0 ** (nu - 1.0)
        s = 0.0
        for k in range(64):
            delta = f0 * A**k
            if delta <= 1e-300:
                break
            bound = eps * float(f(s)) ** nu
            val = float(f(s + delta))
            worst = max(worst, val - bound)
            if val > bound * (1 + _HYP_SLACK) + 1e-300:
                ok = False
            s += delta
    rep.hypotheses["recurrence"] = ok
    rep.observed["max_recurrence_excess"] = worst
    if not rep.hypotheses_ok:
        return rep
    d = 0.0 if f0 == 0 else f0 / (1.0 - eps * f0 ** (nu - 1.0))
    rep.prediction["vanishing_point"] = d
    zero_tol = NUMERICAL_ZERO_FACTOR * f0
    beyond = f.samples >= d
    vals = f(f.samples)
    rep.observed["max_beyond"] = float(vals[beyond].max()) if beyond.any() else 0.0
    rep.conclusion_holds = bool(np.all(vals[beyond] <= zero_tol)) if beyond.any() else True
    return rep


def stampacchia_inhomogeneous(f: DecreasingSampler, R: float, c0: float,
                              alpha: float, beta: float,
                              S_tilde: float) -> LemmaReport:
    """Inhomogeneous oracle on [0, R] with forcing amplitude S_tilde.

    Verifies the two-sided hypotheses; when the size condition on R holds the
    endpoint value f(R) is asserted to vanish, otherwise the deficit in that
    condition is reported instead.
    """
    if beta <= 1:
        raise ValueError("inhomogeneous iteration requires beta > 1")
    rep = LemmaReport(lemma="iteration-inhomogeneous")
    expo = alpha / (beta - 1.0)
    ok = True
    worst = 0.0
    pts = f.samples[(f.samples >= 0) & (f.samples <= R)]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            eta, xi = pts[i], pts[j]
            bound = c0 * (xi - eta) ** (-alpha) * (
                float(f(eta)) + S_tilde * (R - eta) ** expo) ** beta
            val = float(f(xi))
            worst = max(worst, val - bound)
            if val > bound * (1 + _HYP_SLACK) + 1e-300:
                ok = False
    rep.hypotheses["recurrence"] = ok
    rep.observed["max_recurrence_excess"] = worst

    f0 = float(f(0.0))
    lhs = R**expo
    rhs = (2.0 ** (beta * (alpha + beta - 1.0) / (beta - 1.0)) * c0) ** (
        1.0 / (beta - 1.0)) * (f0 + S_tilde * R**expo)
    rep.hypotheses["size_condition"] = lhs >= rhs
    rep.observed["size_condition_lhs"] = lhs
    rep.observed["size_condition_rhs"] = rhs
    if lhs < rhs:
        rep.observed["size_condition_deficit"] = rhs - lhs
    if not rep.hypotheses_ok:
        return rep
    zero_tol = NUMERICAL_ZERO_FACTOR * f0
    fR = float(f(R))
    rep.observed["endpoint_value"] = fR
    rep.conclusion_holds = fR <= zero_tol
    return rep

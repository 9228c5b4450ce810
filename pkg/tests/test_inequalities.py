"""Interpolation-ratio measurement and iteration-lemma oracles."""

import math

import numpy as np
import pytest

from fracthin.inequalities import (
    DecreasingSampler,
    DegenerateInputError,
    LemmaReport,
    gn_ratio,
    gn_theta,
    stampacchia_classic,
    stampacchia_geometric,
    stampacchia_inhomogeneous,
)
from fracthin.spectral import (
    DomainGeometry,
    SpectralField,
    build_basis,
    random_band_limited,
)


@pytest.fixture(scope="module")
def basis():
    return build_basis(DomainGeometry.interval(2 * np.pi, 32))


# ------------------------------------------------------------------- GN

def test_gn_theta_formula():
    assert gn_theta(1.0, 0.5, 1) == pytest.approx(0.25, abs=1e-15)


def test_gn_theta_in_unit_interval(basis):
    rng = np.random.default_rng(0)
    for _ in range(50):
        b = rng.uniform(0.05, 1.95)
        s = rng.uniform(0.05, 0.95)
        th = gn_theta(b, s, 1)
        assert 0 <= th < 1


def test_gn_zero_field_degenerate(basis):
    v = SpectralField(basis, np.zeros(basis.geometry.modes))
    with pytest.raises(DegenerateInputError):
        gn_ratio(v, b=1.0, s=0.5)


def test_gn_ratio_bounded_over_random_fields(basis):
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(500):
        v = random_band_limited(basis, rng, decay=rng.uniform(1.0, 3.0))
        ratio, theta = gn_ratio(v, b=1.0, s=0.5)
        assert 0 <= theta < 1
        worst = max(worst, ratio)
    assert math.isfinite(worst)
    assert worst < 1e2


def test_gn_validates_ranges(basis):
    v = SpectralField(basis, np.ones(basis.geometry.modes))
    with pytest.raises(ValueError):
        gn_ratio(v, b=2.5, s=0.5)
    with pytest.raises(ValueError):
        gn_ratio(v, b=1.0, s=1.5)


# ------------------------------------------------------- sampler contract

def test_sampler_rejects_increasing_function():
    with pytest.raises(ValueError):
        DecreasingSampler.geometric(lambda x: x, 0.1, 2.0)


def test_sampler_rejects_negative_function():
    with pytest.raises(ValueError):
        DecreasingSampler.geometric(lambda x: -np.ones_like(x), 0.1, 2.0)


# --------------------------------------------------------- classic lemma

def classic_family(p=2.0):
    return lambda x: np.clip(1.0 - x, 0.0, None) ** p


def needed_constant(func, samples, x0, alpha, beta):
    worst = 0.0
    pts = samples[samples >= x0]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            fx = float(func(np.array(pts[i])))
            fy = float(func(np.array(pts[j])))
            if fx > 0 and fy > 0:
                worst = max(worst, fy * (pts[j] - pts[i]) ** alpha / fx**beta)
    return worst


def test_classic_beta_gt_1_bounds_true_vanishing_point():
    # synthetic family (1-x)_+^p with constants matched on the sample grid
    alpha, beta, x0 = 1.0, 2.0, 0.0
    func = classic_family(p=2.0)
    f = DecreasingSampler.geometric(func, 0.0, 3.0, num=64)
    C = needed_constant(func, f.samples, x0, alpha, beta) * 1.01
    rep = stampacchia_classic(f, x0, C, alpha, beta)
    assert rep.hypotheses_ok
    assert rep.conclusion_holds
    assert rep.prediction["vanishing_point"] >= 1.0  # true zero of the family


def test_classic_beta_gt_1_prediction_monotone_in_constants():
    alpha, beta = 1.0, 2.0

    def predict(C, f0):
        return (C * f0 ** (beta - 1) * 2 ** (alpha * beta / (beta - 1))) ** (1 / alpha)

    assert predict(2.0, 1.0) > predict(1.0, 1.0)
    assert predict(1.0, 2.0) > predict(1.0, 1.0)


def test_classic_beta_1_exponential_envelope():
    alpha, x0 = 1.0, 0.0
    func = lambda x: np.exp(-np.asarray(x))
    f = DecreasingSampler.geometric(func, 0.0, 10.0, num=64)
    # smallest admissible C: max over gaps g of g^alpha e^-g = (alpha/e)^alpha
    C = (alpha / math.e) ** alpha * 1.05
    rep = stampacchia_classic(f, x0, C, alpha, 1.0)
    assert rep.hypotheses_ok
    assert rep.conclusion_holds
    assert rep.prediction["decay_rate"] == pytest.approx((math.e * C) ** (-1 / alpha))


def test_classic_beta_lt_1_power_envelope():
    alpha, beta, x0 = 1.0, 0.5, 0.5
    mu = alpha / (1 - beta)
    func = lambda x: np.asarray(x, dtype=float) ** (-mu)
    f = DecreasingSampler.geometric(func, x0, 50.0, num=64)
    C = needed_constant(func, f.samples, x0, alpha, beta) * 1.01
    rep = stampacchia_classic(f, x0, C, alpha, beta)
    assert rep.hypotheses_ok
    assert rep.conclusion_holds


def test_classic_beta_lt_1_rejects_zero_origin():
    func = classic_family(p=2.0)
    f = DecreasingSampler.geometric(func, 0.0, 2.0, num=32)
    rep = stampacchia_classic(f, 0.0, 1.0, 1.0, 0.5)
    assert rep.hypotheses["positive_origin"] is False
    assert rep.conclusion_holds is None


def test_classic_zero_function_vanishes_at_origin():
    f = DecreasingSampler.geometric(lambda x: np.zeros_like(x), 0.0, 2.0, num=32)
    rep = stampacchia_classic(f, 0.0, 1.0, 1.0, 2.0)
    assert rep.hypotheses_ok
    assert rep.prediction["vanishing_point"] == 0.0
    assert rep.conclusion_holds


def test_classic_hypothesis_violation_blocks_prediction():
    # function decays too slowly for the claimed constants
    func = lambda x: 1.0 / (1.0 + np.asarray(x)) ** 0.2
    f = DecreasingSampler.geometric(func, 0.0, 5.0, num=32)
    rep = stampacchia_classic(f, 0.0, 1e-6, 2.0, 2.0)
    assert not rep.hypotheses["recurrence"]
    assert rep.conclusion_holds is None
    assert not rep.prediction


# -------------------------------------------------------- geometric lemma

def exponential_barrier(d, f0=1.0):
    def func(x):
        x = np.asarray(x, dtype=float)
        gap = np.clip(d - x, 0.0, None)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(gap > 0, f0 * np.exp(-x / np.where(gap > 0, d * gap, 1.0)), 0.0)
        return out
    return func


def test_geometric_lemma_on_exponential_barrier():
    # barrier with unit threshold: vanishes identically past s = 1
    func = exponential_barrier(d=1.0)
    f = DecreasingSampler.geometric(func, 0.0, 3.0, num=64)
    rep = stampacchia_geometric(f, eps=0.5, nu=1.2)
    assert rep.hypotheses_ok
    assert rep.conclusion_holds
    assert rep.prediction["vanishing_point"] >= 1.0
    # the sampled function itself vanishes past its own threshold
    assert np.all(f(f.samples[f.samples >= 1.0]) <= 1e-12)


def test_geometric_barrier_linear_bound_for_small_threshold():
    for d in (0.3, 0.7, 1.0):
        func = exponential_barrier(d=d)
        x = np.linspace(0, d, 200)
        bound = (1.0 / d) * np.clip(d - x, 0.0, None)
        assert np.all(func(x) <= bound + 1e-12)


def test_geometric_zero_function_edge():
    f = DecreasingSampler.geometric(lambda x: np.zeros_like(x), 0.0, 2.0, num=32)
    rep = stampacchia_geometric(f, eps=0.5, nu=2.0)
    assert rep.hypotheses_ok
    assert rep.prediction["vanishing_point"] == 0.0
    assert rep.conclusion_holds


def test_geometric_eps_out_of_range_reported():
    func = exponential_barrier(d=1.0)
    f = DecreasingSampler.geometric(func, 0.0, 3.0, num=32)
    rep = stampacchia_geometric(f, eps=1.5, nu=1.2)  # above f(0)^(1-nu) = 1
    assert rep.hypotheses["eps_in_range"] is False
    assert rep.conclusion_holds is None


# ----------------------------------------------------- inhomogeneous lemma

def inhomogeneous_family(K, R, alpha, beta):
    expo = alpha / (beta - 1.0)
    return lambda x: K * np.clip(R - np.asarray(x, dtype=float), 0.0, None) ** expo


def test_inhomogeneous_reduces_to_classic_at_zero_forcing():
    alpha, beta, R = 1.0, 2.0, 4.0
    func = classic_family(p=2.0)
    f = DecreasingSampler.geometric(func, 0.0, R, num=48)
    C = needed_constant(func, f.samples, 0.0, alpha, beta) * 1.01
    rep = stampacchia_inhomogeneous(f, R, C, alpha, beta, S_tilde=0.0)
    assert rep.hypotheses["recurrence"]
    # at zero forcing the size condition is the classical smallness threshold
    lhs, rhs = rep.observed["size_condition_lhs"], rep.observed["size_condition_rhs"]
    classic_d = (C * float(f(0.0)) ** (beta - 1) * 2 ** (alpha * beta / (beta - 1))) ** (1 / alpha)
    assert (lhs >= rhs) == (R**(alpha / (beta - 1)) >= rhs)
    if lhs >= rhs:
        assert R >= classic_d / 2 ** (beta / alpha)  # same structural scale
        assert rep.conclusion_holds


def test_inhomogeneous_synthetic_family_asserts_vanishing():
    alpha, beta, R = 1.0, 1.5, 2.0
    S_tilde, K = 1.0, 1e-4
    c0 = K / (K + S_tilde) ** beta
    func = inhomogeneous_family(K, R, alpha, beta)
    f = DecreasingSampler.geometric(func, 0.0, R, num=48)
    rep = stampacchia_inhomogeneous(f, R, c0, alpha, beta, S_tilde)
    assert rep.hypotheses["recurrence"]
    assert rep.hypotheses["size_condition"]
    lhs, rhs = rep.observed["size_condition_lhs"], rep.observed["size_condition_rhs"]
    assert lhs >= 2.0 * rhs  # margin of the constructed family
    assert rep.conclusion_holds


def test_inhomogeneous_size_violation_reports_deficit():
    alpha, beta, R = 1.0, 1.5, 2.0
    S_tilde = 1.0
    # large K violates the size condition: deficit reported, no assertion
    K = 10.0
    c0 = K / (K + S_tilde) ** beta
    func = inhomogeneous_family(K, R, alpha, beta)
    f = DecreasingSampler.geometric(func, 0.0, R, num=48)
    rep = stampacchia_inhomogeneous(f, R, c0, alpha, beta, S_tilde)
    assert rep.hypotheses["size_condition"] is False
    assert rep.observed["size_condition_deficit"] > 0
    assert rep.conclusion_holds is None


# ------------------------------------------------------------- soundness

def test_every_asserted_conclusion_has_passing_hypotheses():
    reports: list[LemmaReport] = []
    func = classic_family(p=2.0)
    f = DecreasingSampler.geometric(func, 0.0, 3.0, num=32)
    reports.append(stampacchia_classic(f, 0.0, 1e-6, 1.0, 2.0))
    reports.append(stampacchia_classic(
        f, 0.0, needed_constant(func, f.samples, 0.0, 1.0, 2.0) * 1.01, 1.0, 2.0))
    g = exponential_barrier(d=1.0)
    fg = DecreasingSampler.geometric(g, 0.0, 3.0, num=32)
    reports.append(stampacchia_geometric(fg, 1.5, 1.2))
    for rep in reports:
        if rep.conclusion_holds is not None:
            assert rep.hypotheses_ok

    rep = reports[1]
    js = rep.to_jsonable()
    assert js["lemma"] == "iteration-classic"
    assert js["hypotheses_ok"]

"""Mobility regularizations and entropy functions."""

import math

import numpy as np
import pytest

from fracthin.mobility import (
    LiftParams,
    MobilityError,
    MobilityParams,
    default_alpha,
    default_lift,
    entropy_G0,
    entropy_integral,
    entropy_reg,
    entropy_reg_scalar,
    lift_initial_datum,
    mobility,
    mobility_prime,
)


def simpson_entropy_oracle(z, p, num=40001):
    """Composite-Simpson evaluation of int_1^z (z-t)/f(t) dt, independent path."""
    t = np.linspace(1.0, z, num)
    y = (z - t) / mobility(t, p)
    from scipy.integrate import simpson
    return simpson(y, x=t)


@pytest.fixture
def params():
    return MobilityParams(n=1.5, epsilon=1e-4, delta=1e-4, gamma=1e-3, s=0.5, d=1)


# ----------------------------------------------------------------- validation

def test_parameter_validation():
    with pytest.raises(MobilityError):
        MobilityParams(n=0.5)
    with pytest.raises(MobilityError):
        MobilityParams(n=1.5, s=1.2)
    with pytest.raises(MobilityError):
        MobilityParams(n=1.5, epsilon=-1.0)
    with pytest.raises(MobilityError):
        MobilityParams(n=1.5, epsilon=1e-4, alpha=2.5, s=0.5, d=1)  # below floor 3


def test_default_alpha_margin():
    # d=1, s=0.5: floor = max(2 + 2/(2*1.5-1), n) = 3
    assert default_alpha(1.5, 0.5, 1) == pytest.approx(3.5)
    assert default_alpha(4.0, 0.5, 1) == pytest.approx(4.5)


def test_existence_window():
    assert MobilityParams(n=3.0, s=0.5, d=1).in_existence_window()  # 1/0 = +inf
    assert MobilityParams(n=1.2, s=0.6, d=3).in_existence_window()
    assert not MobilityParams(n=3.0, s=0.6, d=3).in_existence_window()


# ----------------------------------------------------------------- mobility

def test_mobility_clamps_nonpositive_to_gamma(params):
    assert mobility(-1.0, params) == params.gamma
    assert mobility(0.0, params) == params.gamma


def test_mobility_pure_power_law():
    p = MobilityParams(n=1.5, s=0.5, d=1)
    assert mobility(2.0, p) == pytest.approx(2.0**1.5, rel=1e-14)
    assert mobility(0.3, p) == pytest.approx(0.3**1.5, rel=1e-14)


def test_mobility_bound_chain(params):
    z = np.concatenate([-np.geomspace(1e-6, 10, 1000),
                        np.geomspace(1e-12, 1e4, 9000)])
    f = mobility(z, params)
    assert np.all(f >= params.gamma - 1e-300)
    assert np.all(f <= 1.0 / params.delta + params.gamma + 1e-9)


def test_mobility_rejects_nan(params):
    with pytest.raises(MobilityError):
        mobility(float("nan"), params)


def test_mobility_monotone_convergence_to_power_law():
    z = 0.7
    prev_gap = None
    for k in (2, 3, 4, 5, 6, 7):
        p = MobilityParams(n=1.5, epsilon=10.0**-k, delta=10.0**-k,
                           gamma=10.0**-(k + 2), s=0.5, d=1)
        gap = abs(mobility(z, p) - z**1.5)
        if prev_gap is not None:
            assert gap < prev_gap
        prev_gap = gap
    assert prev_gap < 1e-6


# ------------------------------------------------------------- mobility_prime

def test_prime_vanishes_for_nonpositive(params):
    assert mobility_prime(-2.0, params) == 0.0
    assert mobility_prime(0.0, params) == 0.0


def test_prime_small_z_asymptotics(params):
    # f' ~ alpha z^(alpha-1) / eps as z -> 0
    z = 1e-6
    expected = params.alpha * z ** (params.alpha - 1) / params.epsilon
    assert mobility_prime(z, params) == pytest.approx(expected, rel=1e-3)


def test_prime_matches_finite_differences(params):
    z = np.geomspace(0.01, 10.0, 200)
    h = 1e-6 * z
    fd = (mobility(z + h, params) - mobility(z - h, params)) / (2 * h)
    fp = mobility_prime(z, params)
    assert np.abs(fp - fd).max() <= 1e-7 * np.abs(fp).max()


def test_prime_ratio_bounded(params):
    z = np.geomspace(1e-8, 100.0, 5000)
    ratio = mobility_prime(z, params) / z ** (params.n - 1)
    assert np.isfinite(ratio).all()
    assert ratio.max() <= 2.0 * params.n


# ----------------------------------------------------------------- entropy G0

@pytest.mark.parametrize("n", [1.0, 1.5, 2.0, 2.7])
def test_G0_vanishes_at_one(n):
    assert entropy_G0(1.0, n) == pytest.approx(0.0, abs=1e-15)


def test_G0_n1_at_e():
    assert entropy_G0(math.e, 1.0) == pytest.approx(1.0, rel=1e-14)


def test_G0_limit_at_zero():
    assert entropy_G0(0.0, 1.5) == pytest.approx(2.0, rel=1e-14)
    assert entropy_G0(0.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert entropy_G0(0.0, 2.0) == math.inf
    assert entropy_G0(0.0, 2.5) == math.inf


def test_G0_negative_is_infinite():
    assert entropy_G0(-0.3, 1.5) == math.inf


@pytest.mark.parametrize("n", [1.0, 1.3, 2.0, 3.1])
def test_G0_convex_and_nonnegative(n):
    z = np.linspace(0.02, 6.0, 400)
    g = entropy_G0(z, n)
    assert np.all(g >= -1e-13)
    second = g[:-2] - 2 * g[1:-1] + g[2:]
    assert np.all(second >= -1e-10)


def test_G0_second_derivative_is_inverse_power():
    z = np.linspace(0.2, 4.0, 1600)
    h = z[1] - z[0]
    for n in (1.0, 1.6, 2.0, 2.4):
        g = entropy_G0(z, n)
        num = (g[:-2] - 2 * g[1:-1] + g[2:]) / h**2
        assert np.allclose(num, z[1:-1] ** (-n), rtol=1e-3)


# ------------------------------------------------------------- entropy_reg

def test_entropy_reg_normalization(params):
    assert entropy_reg_scalar(1.0, params) == 0.0
    p0 = MobilityParams(n=1.5, epsilon=1e-4, delta=1e-4, s=0.5, d=1)
    assert entropy_reg_scalar(1.0, p0) == pytest.approx(0.0, abs=1e-14)


def test_entropy_reg_gamma0_matches_corrections():
    p = MobilityParams(n=1.5, epsilon=1e-3, delta=1e-3, s=0.5, d=1)
    a = p.alpha
    for z in (0.05, 0.4, 1.7, 9.0):
        corr = (p.epsilon / (a - 1)) * (z ** (2 - a) / (a - 2) - 1 / (a - 2) + z - 1)
        corr += 0.5 * p.delta * (z - 1) ** 2
        expect = entropy_G0(z, p.n) + corr
        assert entropy_reg_scalar(z, p) == pytest.approx(expect, rel=1e-10, abs=1e-10)


def test_entropy_reg_gamma0_infinite_below_zero():
    p = MobilityParams(n=1.5, epsilon=1e-3, delta=1e-3, s=0.5, d=1)
    assert entropy_reg_scalar(0.0, p) == math.inf
    assert entropy_reg_scalar(-1.0, p) == math.inf


@pytest.mark.parametrize("z", [0.1, 2.0, 10.0])
def test_entropy_reg_gamma_positive_vs_simpson_oracle(params, z):
    oracle = simpson_entropy_oracle(z, params)
    assert entropy_reg_scalar(z, params) == pytest.approx(oracle, rel=1e-8, abs=1e-10)


def test_entropy_reg_array_matches_scalar(params):
    z = np.array([0.07, 0.3, 0.9, 1.0, 1.8, 4.2, 11.0])
    arr = entropy_reg(z, params)
    for zi, vi in zip(z, arr):
        assert vi == pytest.approx(entropy_reg_scalar(zi, params), rel=1e-7, abs=1e-9)


def test_entropy_reg_convexity(params):
    z = np.linspace(0.05, 5.0, 300)
    g = entropy_reg(z, params)
    second = g[:-2] - 2 * g[1:-1] + g[2:]
    assert np.all(second >= -1e-10)


def test_entropy_mobility_consistency(params):
    # numerical G'' of the regularized entropy must equal 1/f
    # (fourth-order stencil keeps truncation below the 1e-6 requirement)
    z = np.linspace(0.1, 10.0, 100)
    h = 1e-3
    for zi in z[::7]:
        g = [entropy_reg_scalar(zi + j * h, params) for j in (-2, -1, 0, 1, 2)]
        num = (-g[0] + 16 * g[1] - 30 * g[2] + 16 * g[3] - g[4]) / (12 * h**2)
        assert num == pytest.approx(1.0 / mobility(zi, params), rel=1e-6)


# --------------------------------------------------------------- integrals

def test_entropy_integral_of_ones(params):
    vals = np.ones(64)
    assert entropy_integral(vals, 0.1, params, use_G0=True) == pytest.approx(0.0, abs=1e-12)


def test_entropy_integral_of_zero_state():
    p = MobilityParams(n=1.5, s=0.5, d=1)
    vals = np.zeros(50)
    cell = 2.0 / 50
    # G0(0) = 1/(2-n) = 2, volume 2 -> integral 4
    assert entropy_integral(vals, cell, p, use_G0=True) == pytest.approx(4.0, rel=1e-12)


def test_entropy_integral_constant_state():
    p = MobilityParams(n=1.5, s=0.5, d=1)
    a, vol = 0.6, 3.0
    vals = np.full(60, a)
    out = entropy_integral(vals, vol / 60, p, use_G0=True)
    assert out == pytest.approx(vol * entropy_G0(a, 1.5), rel=1e-12)


def test_entropy_integral_negative_node_sentinel(params):
    vals = np.array([0.5, -0.1, 1.0])
    assert entropy_integral(vals, 1.0, params, use_G0=True) == math.inf


# -------------------------------------------------------------------- lift

def test_lift_identity_without_regularization():
    p = MobilityParams(n=1.5, s=0.5, d=1)
    u = np.array([0.0, 0.3, 1.0])
    assert np.array_equal(lift_initial_datum(u, p), u)


def test_lift_minimum_increment():
    p = MobilityParams(n=1.5, epsilon=1e-4, delta=0.0, s=0.5, d=1)
    lift = LiftParams(theta1=1.0 / 3.0, theta2=1.0)
    u = np.array([0.0, 0.2])
    out = lift_initial_datum(u, p, lift)
    assert out.min() == pytest.approx(1e-4 ** (1 / 3), rel=1e-12)


def test_lift_nodewise_inequality(params):
    rng = np.random.default_rng(0)
    u = rng.uniform(0, 1, 100)
    lift = default_lift(params)
    out = lift_initial_datum(u, params, lift)
    floor = params.epsilon**lift.theta1 + params.delta**lift.theta2
    assert np.all(out >= u + floor - 1e-300)


def test_lift_rejects_negative_input(params):
    with pytest.raises(MobilityError):
        lift_initial_datum(np.array([-0.1, 0.5]), params)


def test_lift_params_range_validated(params):
    with pytest.raises(MobilityError):
        LiftParams(theta1=5.0).validate(params)
    with pytest.raises(MobilityError):
        LiftParams(theta1=0.1, theta2=0.0).validate(params)

"""Acceptance suite: every exit criterion at its stated tolerance.

Each criterion prints one PASS/FAIL line (run pytest with -s to see them all
even on success).  Expensive runs are shared through session fixtures.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from acceptance_support import (
    FSP_RADIUS,
    WT_RADIUS,
    WT_SAMPLES,
    WT_FINAL_TIME,
    propagation_run,
    reference_run,
    waiting_time_run,
)
from fracthin.diagnostics import SupportSeries, detect_waiting_time, fit_propagation_exponent
from fracthin.inequalities import (
    DecreasingSampler,
    stampacchia_classic,
    stampacchia_geometric,
    stampacchia_inhomogeneous,
)
from fracthin.mobility import MobilityParams
from fracthin.solver import SolverConfig, run, verify_identities
from fracthin.spectral import (
    DomainGeometry,
    SpectralField,
    build_basis,
    frac_laplacian,
    inner_product,
    random_band_limited,
    seminorm,
    to_grid,
)

_mass_audit: list[tuple[str, float]] = []


def report(name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def audit_mass(label: str, mass: np.ndarray) -> float:
    drift = float(np.abs(mass - mass[0]).max() / max(abs(mass[0]), 1e-300))
    _mass_audit.append((label, drift))
    return drift


# ---------------------------------------------------------------- fixtures

@pytest.fixture(scope="session")
def reference():
    record, cfg = reference_run(n_modes=128, gamma=1e-8)
    audit_mass("reference-n128", record.mass)
    return record, cfg


@pytest.fixture(scope="session")
def reference_refined():
    record, cfg = reference_run(n_modes=256, gamma=1e-8)
    audit_mass("reference-n256", record.mass)
    return record, cfg


@pytest.fixture(scope="session")
def reference_entropy():
    record, cfg = reference_run(n_modes=128, gamma=1e-3)
    audit_mass("reference-entropy", record.mass)
    return record, cfg


@pytest.fixture(scope="session")
def propagation_runs():
    started = time.time()
    with ProcessPoolExecutor(max_workers=2) as pool:
        results = list(pool.map(propagation_run, [1.2, 1.35, 1.5]))
    elapsed = time.time() - started
    out = {}
    for n, t, d, mass, h in results:
        audit_mass(f"propagation-n{n}", mass)
        out[n] = (SupportSeries(times=t, radii=d, threshold=1e-3), h)
    return out, elapsed


@pytest.fixture(scope="session")
def waiting_time_runs():
    kappa = 2.0 * 1.5 / 1.3
    with ProcessPoolExecutor(max_workers=2) as pool:
        results = list(pool.map(waiting_time_run, [kappa, 0.75 * kappa]))
    out = {}
    for expo, t, d, mass, h in results:
        audit_mass(f"waiting-time-k{expo:.3f}", mass)
        out[expo] = (SupportSeries(times=t, radii=d, threshold=3e-3), h)
    return out, kappa


# -------------------------------------------------------------- criterion 1

def test_spectral_exactness():
    started = time.time()
    worst_eig = 0.0
    rng = np.random.default_rng(0)
    for dims, modes in (( [np.pi], [24] ), ( [np.pi, 1.4], [8, 7] )):
        geo = DomainGeometry.make(dims, modes)
        basis = build_basis(geo)
        count = 0
        for idx in np.ndindex(*geo.modes):
            if count >= 20:
                break
            count += 1
            c = np.zeros(geo.modes)
            c[idx] = 1.0
            out = frac_laplacian(SpectralField(basis, c), 0.5)
            lam = sum((idx[i] * np.pi / geo.lengths[i]) ** 2 for i in range(len(dims)))
            worst_eig = max(worst_eig, abs(out.coefficients[idx] - lam**0.5))
            mask = np.ones(geo.modes, bool)
            mask[idx] = False
            worst_eig = max(worst_eig, float(np.abs(out.coefficients[mask]).max()))

    worst_id = 0.0
    geo = DomainGeometry.make([2.0, 1.3], [10, 8])
    basis = build_basis(geo)
    for _ in range(100):
        u = random_band_limited(basis, rng)
        v = random_band_limited(basis, rng)
        # Parseval against the integral computed in nodal space
        grid = to_grid(u)
        quad = float(np.sum(grid.values**2) * geo.cell_volume)
        worst_id = max(worst_id, abs(quad - inner_product(u, u))
                       / max(inner_product(u, u), 1e-300))
        lhs = inner_product(frac_laplacian(u, 0.45), frac_laplacian(v, 0.3))
        rhs = inner_product(frac_laplacian(u, 0.75), v)
        worst_id = max(worst_id, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    elapsed = time.time() - started
    ok = worst_eig <= 1e-12 and worst_id <= 1e-10 and elapsed < 10.0
    report("spectral-exactness", ok,
           f"eig_err={worst_eig:.2e} (tol 1e-12), identity_err={worst_id:.2e} "
           f"(tol 1e-10), {elapsed:.1f}s < 10s")


# -------------------------------------------------------------- criterion 2

def test_linear_decay_oracle():
    started = time.time()
    geo = DomainGeometry.interval(2 * np.pi, 64)
    mob = MobilityParams(n=1.5, gamma=1.0, s=0.5, d=1)
    cfg = SolverConfig(s=0.5, mobility=mob, geometry=geo, final_time=0.1,
                       linear_mode=True, record_samples=10, record_spacing="linear",
                       rtol=1e-10, atol=1e-13)
    basis = build_basis(geo)
    rng = np.random.default_rng(1)
    c0 = rng.uniform(0.2, 1.0, geo.modes) / (1.0 + np.arange(geo.modes[0]))
    u0 = to_grid(SpectralField(basis, c0))
    final = {}
    run(u0, cfg, snapshot_sink=lambda m, c: final.update(c=c.copy()) or "",
        snapshot_count=2)
    lam = basis.eigenvalues
    expect = c0 * np.exp(-lam**1.5 * cfg.final_time)
    # modes decayed below 1e-30 underflow to identical zeros; measuring a
    # relative error against them is pure denormal noise
    denom = np.maximum(np.abs(expect), 1e-30)
    err = float(np.max(np.abs(final["c"] - expect) / denom))
    elapsed = time.time() - started
    ok = err <= 1e-8 and elapsed < 5.0
    report("linear-decay", ok, f"rel_err={err:.2e} (tol 1e-8), {elapsed:.1f}s < 5s")


# -------------------------------------------------------------- criterion 4

def test_energy_monotonicity(reference):
    record, _ = reference
    worst = float(np.diff(record.energy).max())
    ok = worst <= 1e-8
    report("energy-monotonicity", ok,
           f"max energy increase per step window {worst:.2e} (tol 1e-8)")


# -------------------------------------------------------------- criterion 5

def test_entropy_identity_residual(reference_entropy):
    record, cfg = reference_entropy
    rep = verify_identities(record, cfg)
    ok = rep.residual_entropy <= 1e-2
    report("entropy-identity", ok,
           f"R_S={rep.residual_entropy:.2e} (tol 1e-2, gamma=1e-3)")


# -------------------------------------------------------------- criterion 6

def test_propagation_exponent(propagation_runs):
    runs, elapsed = propagation_runs
    predicted = 1.0 / (1.5 * 1 + 2 * 1.5)
    fits = {}
    for n, (series, h) in sorted(runs.items()):
        slope, resid = fit_propagation_exponent(series, FSP_RADIUS, spacing=h)
        fits[n] = slope
    ref_fit = fits[1.5]
    within = abs(ref_fit - predicted) <= 0.25 * predicted
    monotone = fits[1.2] > fits[1.35] > fits[1.5]
    ok = within and monotone and elapsed < 600.0
    report("propagation-exponent", ok,
           f"fit(n=1.5)={ref_fit:.4f} vs {predicted:.4f} (+-25%), "
           f"fits={{1.2: {fits[1.2]:.4f}, 1.35: {fits[1.35]:.4f}, "
           f"1.5: {fits[1.5]:.4f}}} monotone={monotone}, {elapsed:.0f}s < 600s")


# -------------------------------------------------------------- criterion 7

def test_waiting_time(waiting_time_runs):
    runs, kappa = waiting_time_runs
    interval = WT_FINAL_TIME / WT_SAMPLES
    t0 = {}
    for expo, (series, h) in runs.items():
        t0[expo] = detect_waiting_time(series, WT_RADIUS, tol_r=2 * h)
    t0_flat = t0[kappa]
    t0_steep = t0[0.75 * kappa]
    ok = (t0_flat >= 5 * interval) and (t0_steep < t0_flat)
    report("waiting-time", ok,
           f"T0(critical)={t0_flat:.4f} >= 5*{interval:.4f}, "
           f"T0(steepened)={t0_steep:.4f} < T0(critical)")


# -------------------------------------------------------------- criterion 8

def test_lemma_oracles():
    started = time.time()

    def barrier(x):
        x = np.asarray(x, dtype=float)
        gap = np.clip(1.0 - x, 0.0, None)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(gap > 0, np.exp(-x / np.where(gap > 0, gap, 1.0)), 0.0)

    f = DecreasingSampler.geometric(barrier, 0.0, 3.0, num=64)
    rep_geo = stampacchia_geometric(f, eps=0.5, nu=1.2)
    geo_ok = (rep_geo.hypotheses_ok and bool(rep_geo.conclusion_holds)
              and np.all(f(f.samples[f.samples >= 1.0]) <= 1e-12))

    func = lambda x: np.clip(1.0 - x, 0.0, None) ** 2
    fc = DecreasingSampler.geometric(func, 0.0, 3.0, num=64)
    worst_c = 0.0
    pts = fc.samples
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            fx, fy = func(pts[i]), func(pts[j])
            if fx > 0 and fy > 0:
                worst_c = max(worst_c, fy * (pts[j] - pts[i]) / fx**2)
    rep_cls = stampacchia_classic(fc, 0.0, worst_c * 1.01, 1.0, 2.0)
    cls_ok = (rep_cls.hypotheses_ok and bool(rep_cls.conclusion_holds)
              and rep_cls.prediction["vanishing_point"] >= 1.0)

    alpha, beta, R = 1.0, 2.0, 8.0
    C = worst_c * 1.01
    rep_inh = stampacchia_inhomogeneous(fc, R, C, alpha, beta, S_tilde=0.0)
    classic_threshold = (C * float(func(0.0)) ** (beta - 1)
                         * 2 ** (alpha * beta / (beta - 1)))
    # at zero forcing the size condition reduces to the classical smallness
    # threshold times the structural 2^beta factor (exact at these exponents)
    inh_ok = (rep_inh.hypotheses["recurrence"]
              and rep_inh.hypotheses["size_condition"]
              and rep_inh.observed["size_condition_rhs"] == pytest.approx(
                  classic_threshold * 2.0**beta, rel=1e-12)
              and bool(rep_inh.conclusion_holds))
    elapsed = time.time() - started
    ok = geo_ok and cls_ok and inh_ok and elapsed < 5.0
    report("lemma-oracles", ok,
           f"geometric={geo_ok}, classic={cls_ok} (d_pred="
           f"{rep_cls.prediction['vanishing_point']:.3f} >= 1), "
           f"inhomogeneous-degeneration={inh_ok}, {elapsed:.1f}s < 5s")


# -------------------------------------------------------------- criterion 9

def test_interpolation_inequalities():
    geo = DomainGeometry.make([np.pi, 1.7], [12, 10])
    basis = build_basis(geo)
    rng = np.random.default_rng(11)
    s = 0.5
    violations = 0
    for _ in range(500):
        u = random_band_limited(basis, rng, decay=rng.uniform(0.5, 3.0))
        r0, r1 = 0.15, 1.9
        r = rng.uniform(r0, r1)
        theta = (r - r0) / (r1 - r0)
        if seminorm(u, r) > (seminorm(u, r0) ** (1 - theta)
                             * seminorm(u, r1) ** theta + 1e-10):
            violations += 1
        beta = rng.uniform(0.05, (s + 1) / 2 - 0.05)
        th = 2 * beta / (s + 1)
        lhs = float(np.linalg.norm(frac_laplacian(u, beta).coefficients))
        rhs = (float(np.linalg.norm(frac_laplacian(u, (s + 1) / 2).coefficients)) ** th
               * float(np.linalg.norm(u.coefficients)) ** (1 - th))
        if lhs > rhs + 1e-10:
            violations += 1
    ok = violations == 0
    report("interpolation-inequalities", ok,
           f"{violations} violations over 500 random fields (slack 1e-10)")


# ------------------------------------------------------------- criterion 10

def test_resolution_convergence(reference, reference_refined):
    rec128, _ = reference
    rec256, _ = reference_refined
    drift = abs(rec256.energy[-1] - rec128.energy[-1]) / rec128.energy[-1]
    ok = drift <= 1e-4
    report("resolution-convergence", ok,
           f"energy(T) relative change 128->256: {drift:.2e} (tol 1e-4)")


# -------------------------------------------------------------- criterion 3
# (runs last: audits the mass ledger accumulated by every desk run above)

def test_zz_mass_conservation_all_runs(reference, reference_refined,
                                       reference_entropy, propagation_runs,
                                       waiting_time_runs):
    worst = max(drift for _, drift in _mass_audit)
    ok = worst <= 1e-10 and len(_mass_audit) >= 8
    detail = ", ".join(f"{label}={drift:.1e}" for label, drift in _mass_audit)
    report("mass-conservation", ok, f"max drift {worst:.2e} (tol 1e-10): {detail}")

"""Execution drivers behind the CLI subcommands: single runs, sweeps, density."""

from __future__ import annotations

import itertools
import math
import traceback
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import SWEEP_AXES, ConfigError, ExperimentConfig
from .diagnostics import (
    InsufficientDataError,
    SupportSeries,
    detect_waiting_time,
    fit_propagation_exponent,
    flatness_density,
    local_entropy_report,
)
from .initial import build_initial
from .mobility import lift_initial_datum
from .runio import snapshot_sink, write_json, write_run_csv
from .solver import BlowUpError, StiffnessError, run, verify_identities
from .spectral import GridField, SpectralField, build_basis, to_grid


def predicted_exponent(n: float, s: float, d: int) -> float:
    return 1.0 / (n * d + 2.0 * (s + 1.0))


def prepare_initial(cfg: ExperimentConfig) -> GridField:
    geo = cfg.geometry()
    mob = cfg.mobility()
    allow_negative = cfg.get("time", "linear_mode")
    u0 = build_initial(cfg.initial_spec(), geo, mob, allow_negative=allow_negative)
    lift = cfg.lift()
    if lift is not None and not allow_negative:
        u0 = GridField(geo, lift_initial_datum(u0.values, mob, lift))
    return u0


def execute_run(cfg: ExperimentConfig, out_dir) -> dict:
    """Run one configuration and write run.csv, snapshots and report.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()
    geo = cfg.geometry()
    mob = cfg.mobility()
    scfg = cfg.solver_config()
    u0 = prepare_initial(cfg)

    diag = cfg.values["diagnostics"]
    threshold = diag["threshold"] or diag["threshold_frac"] * float(
        np.abs(u0.values).max() or 1.0)
    scfg.support_threshold = threshold

    disk_sink, snap_metas = snapshot_sink(out / "snapshots", geo, chash)
    kept: list[tuple[float, np.ndarray]] = []

    def sink(meta, coeffs):
        kept.append((meta.t, coeffs.copy()))
        return disk_sink(meta, coeffs)

    n_snaps = cfg.get("time", "snapshot_count")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            record = run(u0, scfg, snapshot_sink=sink, snapshot_count=n_snaps)
    except (BlowUpError, StiffnessError) as exc:
        payload = {
            "config_hash": chash, "error": type(exc).__name__,
            "message": str(exc),
            "t": getattr(exc, "t", math.nan),
            "max_u": getattr(exc, "max_u", math.nan),
        }
        write_json(out / "error.json", payload)
        return {"ok": False, **payload}

    write_run_csv(out / "run.csv", record, chash)
    write_json(out / "snapshots" / "index.json",
               {"config_hash": chash, "snapshots": snap_metas})

    rep = verify_identities(record, scfg)
    r0 = diag["r0"] or cfg.get("initial", "radius")
    h = max(geo.spacings)
    tol_r = diag["tol_r"] or 2.0 * h
    series = SupportSeries(times=record.times, radii=record.support_radius,
                           threshold=threshold)
    report = {
        "config_hash": chash,
        "threshold": threshold,
        "r0": r0,
        "identities": {
            "residual_energy": rep.residual_energy,
            "residual_entropy": rep.residual_entropy,
        },
        "invariants": {
            "mass_drift": float(np.abs(record.mass - record.mass[0]).max()
                                / max(abs(record.mass[0]), 1e-300)),
            "max_energy_increase": float(np.diff(record.energy).max()
                                         if len(record.energy) > 1 else 0.0),
            "min_u": float(record.min_u.min()),
        },
        "steps": {"accepted": record.accepted, "rejected": record.rejected},
        "warnings": [str(w.message) for w in caught],
    }
    if diag["fit"]:
        try:
            slope, resid = fit_propagation_exponent(series, r0, spacing=h)
            report["propagation"] = {
                "fitted_exponent": slope,
                "fit_residual": resid,
                "predicted_exponent": predicted_exponent(
                    mob.n, mob.s, geo.dimension),
            }
        except InsufficientDataError as exc:
            report["propagation"] = {"error": str(exc)}
        try:
            report["waiting_time"] = detect_waiting_time(series, r0, tol_r)
        except ValueError as exc:
            report["waiting_time_error"] = str(exc)
    if diag["cutoff_s"] > 0 and diag["cutoff_sigma"] > 0 and len(kept) >= 2:
        basis = build_basis(geo)
        times = [t for t, _ in kept]
        fields = [to_grid(SpectralField(basis, c)) for _, c in kept]
        lrep = local_entropy_report(np.asarray(times), fields, mob,
                                    S=diag["cutoff_s"], sigma=diag["cutoff_sigma"])
        report["local_entropy"] = {
            "S": lrep.S, "sigma": lrep.sigma, "pi_exponent": lrep.pi_exponent,
            "entropy_final_excess": lrep.entropy_final_excess,
            "dissipation_half": lrep.dissipation_half,
            "entropy_initial_excess": lrep.entropy_initial_excess,
            "annulus_energy": lrep.annulus_energy,
            "ratio": lrep.ratio,
        }
    write_json(out / "report.json", report)
    return {"ok": True, **report}


def _sweep_worker(args):
    text, overrides, out_dir = args
    cfg = ExperimentConfig.from_text(text) if text else ExperimentConfig.defaults()
    cfg = cfg.with_overrides(**overrides)
    try:
        result = execute_run(cfg, out_dir)
    except Exception as exc:  # noqa: BLE001 - row failures must not kill the sweep
        result = {"ok": False, "error": type(exc).__name__,
                  "message": str(exc), "trace": traceback.format_exc(limit=3)}
    result["overrides"] = overrides
    return result


def execute_sweep(cfg: ExperimentConfig, out_dir, threads: int = 1) -> list[dict]:
    """Cartesian sweep over the configured axes; partial failures recorded."""
    axes = cfg.sweep_axes()
    if not axes:
        raise ConfigError("sweep requested but every sweep axis is empty")
    names = [a for a in SWEEP_AXES if a in axes]
    combos = list(itertools.product(*(axes[a] for a in names)))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = []
    for idx, combo in enumerate(combos):
        overrides = dict(zip(names, combo))
        jobs.append((cfg.source_text, overrides, str(out / f"run_{idx:03d}")))

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]

    base_mob = cfg.mobility()
    dim = cfg.geometry().dimension
    rows = []
    for idx, (combo, res) in enumerate(zip(combos, results)):
        row = {"index": idx}
        row.update(dict(zip(names, combo)))
        row["ok"] = res.get("ok", False)
        prop = res.get("propagation", {})
        row["fitted_exponent"] = prop.get("fitted_exponent", math.nan)
        row["predicted_exponent"] = predicted_exponent(
            row.get("n", base_mob.n), row.get("s", base_mob.s), dim)
        row["waiting_time"] = res.get("waiting_time", math.nan)
        ident = res.get("identities", {})
        row["residual_energy"] = ident.get("residual_energy", math.nan)
        row["residual_entropy"] = ident.get("residual_entropy", math.nan)
        if not row["ok"]:
            row["error"] = res.get("message", res.get("error", "unknown"))
        rows.append(row)

    header = ["index", *names, "ok", "fitted_exponent", "predicted_exponent",
              "waiting_time", "residual_energy", "residual_entropy"]
    lines = [f"# config_hash={cfg.config_hash()}", ",".join(header)]
    for row in rows:
        lines.append(",".join(str(row.get(k, "")) for k in header))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    write_json(out / "sweep.json", {"config_hash": cfg.config_hash(), "rows": rows})
    return rows


def execute_density(cfg: ExperimentConfig, out_dir) -> dict:
    """Evaluate the initial-data flatness density over dyadic shells."""
    geo = cfg.geometry()
    mob = cfg.mobility()
    u0 = build_initial(cfg.initial_spec(), geo, mob)
    r0 = cfg.get("diagnostics", "r0") or cfg.get("initial", "radius")
    gamma_exp = 2.0 * (mob.s + 1.0) / mob.n
    rows = flatness_density(u0, mob.n, r0, gamma_exp)
    payload = {
        "config_hash": cfg.config_hash(),
        "r0": r0,
        "gamma_exponent": gamma_exp,
        "densities": [{"delta": d, "density": v} for d, v in rows],
        "supremum": max((v for _, v in rows if math.isfinite(v)), default=math.nan),
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "density.json", payload)
    return payload

"""Strict key-value experiment configuration.

Flat INI-style sections with typed scalars and comma-separated lists.
Unknown sections or keys are errors: sweep reproducibility demands that every
knob is spelled exactly.  The config hash covers the canonicalized content
plus the seed and is stamped into every output file.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

from .initial import FAMILIES, InitialConditionSpec
from .mobility import LiftParams, MobilityParams, default_lift
from .solver import SolverConfig
from .spectral import DomainGeometry


class ConfigError(ValueError):
    """Malformed, unknown, or inconsistent configuration keys."""


def _float(v): return float(v)
def _int(v): return int(v)
def _str(v): return v.strip()


def _bool(v):
    t = v.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected boolean, got {v!r}")


def _float_list(v):
    return [float(tok) for tok in v.split(",") if tok.strip()]


def _int_list(v):
    return [int(tok) for tok in v.split(",") if tok.strip()]


# section -> key -> (parser, default)
_SCHEMA = {
    "domain": {
        "dimension": (_int, 1),
        "lengths": (_float_list, [2 * math.pi]),
        "modes": (_int_list, [128]),
        "quadrature": (_int_list, []),
    },
    "mobility": {
        "n": (_float, 1.5),
        "epsilon": (_float, 1e-6),
        "delta": (_float, 1e-6),
        "gamma": (_float, 1e-8),
        "alpha": (_float, 0.0),       # 0 -> default margin rule
        "s": (_float, 0.5),
    },
    "lift": {
        "enabled": (_bool, True),
        "theta1": (_float, 0.0),      # 0 -> default rule
        "theta2": (_float, 1.0),
    },
    "initial": {
        "family": (_str, "compact-bump"),
        "amplitude": (_float, 1.0),
        "radius": (_float, 1.0),
        "exponent": (_float, 0.0),    # 0 -> family default
        "value": (_float, 0.0),
        "mode": (_int, 1),
        "offset": (_float, 0.0),
        "path": (_str, ""),
    },
    "time": {
        "final_time": (_float, 0.5),
        "stepper": (_str, "imex"),
        "dt_initial": (_float, 1e-6),
        "dt_min": (_float, 1e-14),
        "safety": (_float, 0.8),
        "rtol": (_float, 1e-8),
        "atol": (_float, 1e-11),
        "linear_mode": (_bool, False),
        "stabilized": (_bool, False),
        "record_samples": (_int, 400),
        "record_spacing": (_str, "log"),
        "record_t_floor": (_float, 0.0),
        "snapshot_stride": (_int, 0),
        "snapshot_count": (_int, 24),
    },
    "diagnostics": {
        "threshold": (_float, 0.0),        # absolute; 0 -> threshold_frac * max u0
        "threshold_frac": (_float, 1e-6),
        "r0": (_float, 0.0),               # 0 -> initial radius
        "tol_r": (_float, 0.0),            # 0 -> 2 * grid spacing
        "metric": (_str, "radial"),
        "fit": (_bool, True),
        "cutoff_s": (_float, 0.0),
        "cutoff_sigma": (_float, 0.0),
    },
    "sweep": {
        "n": (_float_list, []),
        "s": (_float_list, []),
        "modes": (_int_list, []),
        "epsilon": (_float_list, []),
        "delta": (_float_list, []),
        "gamma": (_float_list, []),
        "max_runs": (_int, 64),
    },
    "output": {
        "directory": (_str, "out"),
        "seed": (_int, 0),
    },
}

SWEEP_AXES = ("n", "s", "modes", "epsilon", "delta", "gamma")


@dataclass
class ExperimentConfig:
    """Everything one run (or sweep) needs, with derived objects on demand."""

    values: dict = field(default_factory=dict)
    source_text: str = ""

    @classmethod
    def defaults(cls) -> "ExperimentConfig":
        vals = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in _SCHEMA.items()}
        return cls(values=vals)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        text = Path(path).read_text()
        return cls.from_text(text)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        cfg = cls.defaults()
        cfg.source_text = text
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                if raw.strip() == "":
                    continue
                parse, _ = _SCHEMA[section][key]
                try:
                    cfg.values[section][key] = parse(raw)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(
                        f"bad value for {section}.{key}: {raw!r} ({exc})") from exc
        cfg.validate()
        return cfg

    def get(self, section: str, key: str):
        return self.values[section][key]

    def set(self, section: str, key: str, value) -> None:
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        self.values[section][key] = value

    def validate(self) -> None:
        fam = self.get("initial", "family")
        if fam not in FAMILIES:
            raise ConfigError(f"unknown initial-condition family {fam!r}")
        if self.get("domain", "dimension") != len(self.get("domain", "lengths")):
            lens = self.get("domain", "lengths")
            dim = self.get("domain", "dimension")
            if len(lens) == 1:
                self.values["domain"]["lengths"] = lens * dim
            else:
                raise ConfigError("domain.lengths length disagrees with dimension")
        axes = self.sweep_axes()
        size = 1
        for vals in axes.values():
            size *= len(vals)
        if size > self.get("sweep", "max_runs"):
            raise ConfigError(
                f"sweep would launch {size} runs, above sweep.max_runs="
                f"{self.get('sweep', 'max_runs')}")

    # ---------------------------------------------------------- derived

    def geometry(self) -> DomainGeometry:
        dom = self.values["domain"]
        modes = dom["modes"]
        if len(modes) == 1 and dom["dimension"] > 1:
            modes = modes * dom["dimension"]
        quad = dom["quadrature"] or None
        return DomainGeometry.make(dom["lengths"], modes, quad)

    def mobility(self) -> MobilityParams:
        mob = self.values["mobility"]
        return MobilityParams(
            n=mob["n"], epsilon=mob["epsilon"], delta=mob["delta"],
            gamma=mob["gamma"], s=mob["s"], d=self.get("domain", "dimension"),
            alpha=mob["alpha"] or None)

    def lift(self) -> LiftParams | None:
        sec = self.values["lift"]
        if not sec["enabled"]:
            return None
        p = self.mobility()
        if sec["theta1"] > 0:
            return LiftParams(theta1=sec["theta1"], theta2=sec["theta2"])
        return default_lift(p)

    def initial_spec(self) -> InitialConditionSpec:
        ini = self.values["initial"]
        return InitialConditionSpec(
            family=ini["family"], amplitude=ini["amplitude"], radius=ini["radius"],
            exponent=ini["exponent"] or None, value=ini["value"], mode=ini["mode"],
            offset=ini["offset"], path=ini["path"] or None)

    def solver_config(self) -> SolverConfig:
        t = self.values["time"]
        diag = self.values["diagnostics"]
        return SolverConfig(
            s=self.get("mobility", "s"), mobility=self.mobility(),
            geometry=self.geometry(), final_time=t["final_time"],
            stepper=t["stepper"], dt_initial=t["dt_initial"], dt_min=t["dt_min"],
            safety=t["safety"], rtol=t["rtol"], atol=t["atol"],
            linear_mode=t["linear_mode"], stabilized=t["stabilized"],
            record_samples=t["record_samples"], record_spacing=t["record_spacing"],
            record_t_floor=t["record_t_floor"], snapshot_stride=t["snapshot_stride"],
            support_threshold=diag["threshold"] or None,
            support_metric=diag["metric"])

    def sweep_axes(self) -> dict[str, list]:
        return {axis: self.values["sweep"][axis]
                for axis in SWEEP_AXES if self.values["sweep"][axis]}

    def with_overrides(self, **axis_values) -> "ExperimentConfig":
        import copy
        out = ExperimentConfig(values=copy.deepcopy(self.values),
                               source_text=self.source_text)
        for axis, val in axis_values.items():
            if axis == "modes":
                out.values["domain"]["modes"] = [int(val)]
                out.values["domain"]["quadrature"] = []
            elif axis == "s":
                out.values["mobility"]["s"] = float(val)
            elif axis in ("n", "epsilon", "delta", "gamma"):
                out.values["mobility"][axis] = float(val)
            else:
                raise ConfigError(f"unknown sweep axis {axis!r}")
        return out

    # ------------------------------------------------------------- hash

    def canonical_lines(self) -> list[str]:
        lines = []
        for section in sorted(self.values):
            for key in sorted(self.values[section]):
                if (section, key) == ("output", "directory"):
                    continue  # relocation must not change the provenance hash
                lines.append(f"{section}.{key}={self.values[section][key]!r}")
        return lines

    def config_hash(self) -> str:
        digest = hashlib.sha256()
        for line in self.canonical_lines():
            digest.update(line.encode())
            digest.update(b"\n")
        return digest.hexdigest()[:16]

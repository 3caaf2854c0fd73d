"""Run configuration, delimited tables and run manifests.

A run is fully described by a nested JSON document (see ``DEFAULTS``). The
resolved document is stored in ``manifest.json`` next to the outputs, and a
manifest can be fed back as ``--config`` to repeat the run.
"""

from __future__ import annotations

import copy
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from .analytics import EmpiricalPdf
from .engine import ConfigError, SimulationConfig
from .model import ParameterError, ThreeStateParams, TwoStateParams

__all__ = ["DEFAULTS", "RunManifest", "load_config", "merge", "complete", "resolve_simulation", "resolve_two_state",
           "resolve_three_state", "write_table", "write_pdf", "fmt"]

MODELS = ("two-micro", "two-sde", "three")

DEFAULTS: dict[str, Any] = {
    "model": "three",
    "seed": 0,
    "two_state": {"n_agents": 100, "sigma1": 2.0, "sigma2": 2.0, "herding": 1.0, "m1": 0, "m2": 0},
    "three_state": {"eps_cf": 0.1, "eps_fc": 3.0, "eps_cc": 3.0, "big_h": 300.0, "a": 0.5, "alpha": 2.0, "r0": 1.0},
    "intervention": {"strategy": "none", "m": [0]},
    "simulation": {
        "samples": None,
        "sample_interval": None,
        "base_step": None,
        "burn_in": None,
        "trajectories": 4,
        "integrator": "cir",
        "boundary": "reflect",
        "scheme": "intrinsic",
        "xf_substeps": 10,
        "x_floor": 1e-6,
        "max_floor_fraction": 0.5,
    },
    "analytic": {"eps": 0.1, "m": [0, 2, 4, 8, 16], "grid_points": 99},
    "output": {"thresholds": [1.0, 2.0, 4.0], "pdf_bins": 50, "write_paths": False},
}

# Per-model defaults for entries left as None in "simulation".
MODEL_SIMULATION = {
    "two-micro": {"samples": 100_000, "sample_interval": 0.1, "base_step": 0.01, "burn_in": 10.0},
    "two-sde": {"samples": 100_000, "sample_interval": 0.1, "base_step": 0.01, "burn_in": 10.0},
    "three": {"samples": 50_000, "sample_interval": 1e-3, "base_step": 2e-5, "burn_in": 1.0},
}


def merge(base: dict, update: dict, path: str = "") -> dict:
    """Deep-merge ``update`` into a copy of ``base``; unknown keys are errors."""
    out = copy.deepcopy(base)
    for key, value in update.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(where, "unknown configuration key")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(where, "expected a table of settings")
            out[key] = merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def load_config(path: Optional[str | Path]) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"{path} is not valid JSON: {exc}") from None
    if isinstance(doc, dict) and "config_snapshot" in doc:
        doc = doc["config_snapshot"]
    if not isinstance(doc, dict):
        raise ConfigError("--config", "top level must be a JSON object")
    return merge(DEFAULTS, doc)


def _build(cls, section: str, values: dict):
    try:
        return cls(**values)
    except ParameterError as exc:
        raise ConfigError(section, str(exc)) from None
    except TypeError as exc:
        raise ConfigError(section, str(exc)) from None


def resolve_two_state(cfg: dict) -> TwoStateParams:
    return _build(TwoStateParams, "two_state", cfg["two_state"])


def resolve_three_state(cfg: dict) -> ThreeStateParams:
    return _build(ThreeStateParams, "three_state", cfg["three_state"])


def complete(cfg: dict) -> dict:
    """Fill simulation entries left as None with the defaults of the chosen model."""
    model = cfg["model"]
    if model not in MODELS:
        raise ConfigError("model", f"must be one of {', '.join(MODELS)}")
    out = copy.deepcopy(cfg)
    for key, value in MODEL_SIMULATION[model].items():
        if out["simulation"].get(key) is None:
            out["simulation"][key] = value
    return out


def resolve_simulation(cfg: dict) -> SimulationConfig:
    sim = dict(complete(cfg)["simulation"])
    seed = cfg["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    samples = sim.pop("samples")
    if not isinstance(samples, int) or samples < 1:
        raise ConfigError("simulation.samples", "must be a positive integer")
    for key in ("sample_interval", "base_step", "burn_in", "x_floor", "max_floor_fraction"):
        if not isinstance(sim[key], (int, float)) or isinstance(sim[key], bool):
            raise ConfigError(f"simulation.{key}", "must be a number")
    try:
        return SimulationConfig.for_samples(
            samples, float(sim.pop("sample_interval")), float(sim.pop("base_step")),
            burn_in=float(sim.pop("burn_in")), seed=seed, n_trajectories=sim.pop("trajectories"), **sim)
    except ConfigError as exc:
        raise ConfigError(f"simulation.{exc.field}", str(exc).split(": ", 1)[-1]) from None


def fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_pdf(path: Path, pdf: EmpiricalPdf) -> Path:
    edges, dens = pdf.bin_edges, pdf.densities
    return write_table(path, ["bin_lo", "bin_hi", "center", "density"],
                       ((float(edges[i]), float(edges[i + 1]), float(pdf.centers[i]), float(dens[i]))
                        for i in range(dens.size)))


@dataclass
class RunManifest:
    config_snapshot: dict
    seed: int
    tool_version: str
    wall_time: float = 0.0
    output_files: list = field(default_factory=list)
    command: str = ""
    failures: list = field(default_factory=list)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        doc = {
            "command": self.command,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "output_files": sorted(self.output_files),
            "failures": self.failures,
            "config_snapshot": self.config_snapshot,
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
        return path

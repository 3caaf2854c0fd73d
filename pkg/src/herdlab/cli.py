"""Command-line entry point: ``herdlab {analytic,simulate,sweep}``.

Exit codes: 0 when every requested product was written, 2 for configuration
errors, 3 when a simulation left its numerical regime.
"""

from __future__ import annotations

import argparse
import sys
import time
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import Binning, build_pdf, exceedance, intervention_sweep, moments, summarize_prices
from .engine import (
    ConfigError,
    NumericalRegimeError,
    TrajectoryError,
    run_ensemble,
    simulate_micro,
    simulate_three_state,
    simulate_two_state_sde,
)
from .io import (
    RunManifest,
    complete,
    load_config,
    merge,
    resolve_simulation,
    resolve_three_state,
    resolve_two_state,
    write_pdf,
    write_table,
)
from .model import (
    EffectiveRates,
    InterventionSpec,
    ParameterError,
    Strategy,
    UndefinedIndexError,
    beta_stationary_pdf,
    entropic_index,
    fold_controlled,
    q_gaussian_params,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _csv_counts(text: str) -> list[float]:
    values = _csv_floats(text)
    return [int(v) if float(v).is_integer() else v for v in values]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (or a previous manifest.json)")
    common.add_argument("--out", default="herdlab-out", help="output directory")
    common.add_argument("--seed", type=int)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--model", choices=["two-micro", "two-sde", "three"])
    sim.add_argument("--strategy", choices=[s.value for s in Strategy])
    sim.add_argument("--m", type=_csv_counts, help="controlled agents, comma separated")
    sim.add_argument("--samples", type=int, help="samples per trajectory")
    sim.add_argument("--burn-in", type=float)
    sim.add_argument("--step", type=float, help="base integration step")
    sim.add_argument("--trajectories", type=int)
    sim.add_argument("--thresholds", type=_csv_floats, help="|p| exceedance thresholds")

    parser = argparse.ArgumentParser(prog="herdlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"herdlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analytic", parents=[common], help="stationary densities and q-Gaussian indices")
    an.add_argument("--eps", type=float, help="base idiosyncratic rate (units of h)")
    an.add_argument("--m", type=_csv_counts, help="controlled agents, comma separated")
    sub.add_parser("simulate", parents=[common, sim], help="simulate one model and tabulate its stationary law")
    sub.add_parser("sweep", parents=[common, sim], help="intervention ladder of the market model")
    return parser


def _overrides(args) -> dict:
    upd: dict = {}

    def put(section, key, value):
        if value is not None:
            (upd.setdefault(section, {}) if section else upd)[key] = value

    put(None, "seed", args.seed)
    put(None, "model", getattr(args, "model", None))
    put("intervention", "strategy", getattr(args, "strategy", None))
    put("simulation", "samples", getattr(args, "samples", None))
    put("simulation", "burn_in", getattr(args, "burn_in", None))
    put("simulation", "base_step", getattr(args, "step", None))
    put("simulation", "trajectories", getattr(args, "trajectories", None))
    put("output", "thresholds", getattr(args, "thresholds", None))
    if args.command == "analytic":
        put("analytic", "eps", args.eps)
        put("analytic", "m", args.m)
    else:
        put("intervention", "m", args.m)
    return upd


def cmd_analytic(cfg: dict, out: Path, manifest: RunManifest) -> None:
    """Stationary densities per M, plus q, sigma_q and C_q per M."""
    eps = float(cfg["analytic"]["eps"])
    m_values = list(cfg["analytic"]["m"])
    n_grid = int(cfg["analytic"]["grid_points"])
    if not eps > 0:
        raise ConfigError("analytic.eps", "must be positive")
    if n_grid < 2:
        raise ConfigError("analytic.grid_points", "must be at least 2")
    x = np.linspace(0.0, 1.0, n_grid + 2)[1:-1]
    columns, q_rows = [], []
    for m in m_values:
        eps_tilde = eps + m / 2.0
        columns.append(beta_stationary_pdf(x, EffectiveRates.symmetric(eps_tilde)))
        try:
            q = entropic_index(eps, m)
        except UndefinedIndexError as exc:
            q_rows.append([m, eps_tilde, float("nan"), float("nan"), float("nan"), f"undefined: {exc}"])
            manifest.failures.append({"m": m, "error": str(exc)})
            continue
        if q < 1:
            qp = q_gaussian_params(q)
            q_rows.append([m, eps_tilde, q, qp.width, qp.normalization, "q-gaussian"])
        else:
            q_rows.append([m, eps_tilde, q, float("nan"), float("nan"), "beta only (eps_tilde <= 1)"])
    header = ["x"] + [f"m={m}" for m in m_values]
    rows = ([float(x[i])] + [float(c[i]) for c in columns] for i in range(x.size))
    manifest.output_files.append(write_table(out / "analytic_pdf.csv", header, rows).name)
    manifest.output_files.append(
        write_table(out / "analytic_q.csv", ["m", "eps_tilde", "q", "sigma_q", "c_q", "form"], q_rows).name)


def _single_m(cfg: dict) -> float:
    m = cfg["intervention"]["m"]
    if isinstance(m, list):
        if len(m) != 1:
            raise ConfigError("intervention.m", "simulate takes a single value")
        m = m[0]
    return m


def _intervention(cfg: dict, m) -> InterventionSpec:
    try:
        return InterventionSpec(Strategy(cfg["intervention"]["strategy"]), m)
    except (ValueError, ParameterError) as exc:
        raise ConfigError("intervention", str(exc)) from None


def cmd_simulate(cfg: dict, out: Path, manifest: RunManifest) -> None:
    config = resolve_simulation(cfg)
    model = cfg["model"]
    thresholds = [float(t) for t in cfg["output"]["thresholds"]]
    n_bins = int(cfg["output"]["pdf_bins"])
    files = manifest.output_files
    if model == "three":
        params = resolve_three_state(cfg)
        spec = _intervention(cfg, _single_m(cfg))
        paths = run_ensemble(partial(simulate_three_state, params, spec), config)
        row = summarize_prices(paths, spec.m, spec.kind, thresholds)
        header = ["std_p"] + [f"exceed_{t:g}" for t in thresholds] + ["n_samples", "floor_hits"]
        files.append(write_table(out / "summary.csv", header, [
            [row.std_p] + [row.exceedance[t] for t in thresholds]
            + [row.n_samples, sum(p.meta["floor_hits"] for p in paths)]]).name)
        if row.pdf is not None:
            files.append(write_pdf(out / "pdf_abs_p.csv", row.pdf).name)
        files.append(write_pdf(out / "pdf_x_f.csv", build_pdf(np.concatenate([p.x_f for p in paths]), Binning.LINEAR,
                                                              n_bins, (0.0, 1.0))).name)
        files.append(write_pdf(out / "pdf_xi.csv", build_pdf(np.concatenate([p.xi for p in paths]), Binning.LINEAR,
                                                             n_bins, (-1.0, 1.0))).name)
        state_cols = ["x_f", "xi", "p"]
    else:
        params = resolve_two_state(cfg)
        if model == "two-micro":
            paths = run_ensemble(partial(simulate_micro, params), config)
        else:
            paths = run_ensemble(partial(simulate_two_state_sde, fold_controlled(params), params.herding), config)
        x = np.concatenate([p.fractions() for p in paths])
        mean, std = moments(x)
        files.append(write_table(out / "summary.csv", ["mean_x", "std_x", "n_samples"], [[mean, std, x.size]]).name)
        files.append(write_pdf(out / "pdf_x.csv", build_pdf(x, Binning.LINEAR, n_bins, (0.0, 1.0))).name)
        state_cols = ["x_count"] if model == "two-micro" else ["x"]
    if cfg["output"]["write_paths"]:
        def rows():
            for path in paths:
                states = path.states.reshape(len(path), -1)
                for t, s in zip(path.times, states):
                    yield [path.trajectory, float(t)] + [v.item() for v in s]
        files.append(write_table(out / "paths.csv", ["trajectory", "t"] + state_cols, rows()).name)


def cmd_sweep(cfg: dict, out: Path, manifest: RunManifest) -> None:
    config = resolve_simulation(cfg)
    if cfg["model"] != "three":
        raise ConfigError("model", "sweep runs the three-state market model only")
    strategy = cfg["intervention"]["strategy"]
    if strategy not in (Strategy.FUNDAMENTALIST.value, Strategy.STOCHASTIC.value):
        raise ConfigError("intervention.strategy", "sweep needs 'fundamentalist' or 'stochastic'")
    m_values = cfg["intervention"]["m"]
    m_values = m_values if isinstance(m_values, list) else [m_values]
    for m in m_values:
        _intervention(cfg, m)
    thresholds = [float(t) for t in cfg["output"]["thresholds"]]
    rows = intervention_sweep(resolve_three_state(cfg), strategy, m_values, config, thresholds, keep_going=True)
    tags = [f"exceed_{t:g}" for t in thresholds]
    ok = [r for r in rows if r.error is None]
    files = manifest.output_files
    files.append(write_table(out / "sweep.csv", ["m", "strategy", "std_p"] + tags + ["n_samples"],
                             ([r.m, r.strategy.value, r.std_p] + [r.exceedance[t] for t in thresholds] + [r.n_samples]
                              for r in ok)).name)
    files.append(write_table(out / "sweep_errors.csv", ["m", "std_p_se"] + [f"{t}_se" for t in tags],
                             ([r.m, r.std_p_se] + [r.exceedance_se[t] for t in thresholds] for r in ok)).name)
    for r in ok:
        if r.pdf is not None:
            files.append(write_pdf(out / f"pdf_abs_p_m{r.m:g}.csv", r.pdf).name)
    for r in rows:
        if r.error is not None:
            manifest.failures.append({"m": r.m, "error": r.error})


COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    out = Path(args.out)
    try:
        cfg = merge(load_config(args.config), _overrides(args))
        if args.command != "analytic":
            cfg = complete(cfg)
            resolve_simulation(cfg)
        manifest = RunManifest(config_snapshot=cfg, seed=cfg["seed"], tool_version=__version__, command=args.command)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, manifest)
    except (ConfigError, ParameterError) as exc:
        print(f"herdlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalRegimeError, TrajectoryError) as exc:
        print(f"herdlab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest.wall_time = round(time.perf_counter() - started, 3)
    manifest.write(out)
    if args.command == "sweep" and manifest.failures:
        for failure in manifest.failures:
            print(f"herdlab: m={failure['m']}: {failure['error']}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
Criteria 3 to 9 are computed once per thread count: the default run uses
eight worker threads and criterion 10 repeats everything with one thread
and compares the serialised tables byte for byte.
"""

import io
import csv
import time
from functools import partial

import numpy as np
import pytest
from scipy import stats

from herdlab.analytics import ks_distance, ks_two_sample, moments
from herdlab.cli import main
from herdlab.engine import (
    SimulationConfig,
    pooled,
    run_ensemble,
    simulate_micro,
    simulate_three_state,
    simulate_two_state_sde,
)
from herdlab.io import fmt
from herdlab.model import (
    EffectiveRates,
    ThreeStateParams,
    TwoStateParams,
    beta_stationary_pdf,
    entropic_index,
    q_gaussian_pdf,
)

from conftest import ACCEPTANCE_RESULTS
from oracles import detailed_balance_pmf, step_cdf

pytestmark = pytest.mark.acceptance

SWEEP_SAMPLES = dict(samples=50_000, sample_interval=1e-3, base_step=2e-5, burn_in=1.0, trajectories=20)


def record(number, passed, detail):
    ACCEPTANCE_RESULTS[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, detail


def table_bytes(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue().encode()


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


# -- criteria 3 to 9 as functions of the environment --------------------------------------------------------------


def micro_chain_exactness():
    cfg = SimulationConfig.for_samples(100_000, 0.5, 0.01, seed=3, n_trajectories=10)
    x = np.concatenate([p.states for p in run_ensemble(partial(simulate_micro, TwoStateParams(10, 2.0, 2.0, 1.0)),
                                                       cfg)])
    ks = ks_distance(x, step_cdf(np.arange(11), detailed_balance_pmf(10, 2.0, 2.0, 1.0)))
    return {"ks": ks, "n": x.size}, table_bytes(["ks", "n"], [[ks, x.size]])


def micro_sde_agreement():
    micro_cfg = SimulationConfig.for_samples(100_000, 0.1, 0.01, seed=4, n_trajectories=10)
    micro = run_ensemble(partial(simulate_micro, TwoStateParams(100, 2.0, 2.0, 1.0)), micro_cfg)
    sde_cfg = SimulationConfig.for_samples(100_000, 0.1, 0.01, seed=4, n_trajectories=10)
    sde = run_ensemble(partial(simulate_two_state_sde, EffectiveRates(2.0, 2.0), 1.0), sde_cfg)
    a = np.concatenate([p.fractions() for p in micro])
    b = np.concatenate([p.fractions() for p in sde])
    ks = ks_two_sample(a, b)
    return {"ks": ks, "n": (a.size, b.size)}, table_bytes(["ks", "n_micro", "n_sde"], [[ks, a.size, b.size]])


def controlled_folding():
    cfg = SimulationConfig.for_samples(100_000, 0.5, 0.01, seed=5, n_trajectories=10)
    # a separate seed: with a shared one the two chains would produce identical paths
    other = SimulationConfig.for_samples(100_000, 0.5, 0.01, seed=55, n_trajectories=10)
    rows = []
    # (sigma, m per side) against sigma + h m with no controlled agents
    for m in (2, 1):
        controlled = TwoStateParams(20, 0.1, 0.1, 1.0, m1=m, m2=m)
        folded = TwoStateParams(20, 0.1 + m, 0.1 + m, 1.0)
        a = pooled(run_ensemble(partial(simulate_micro, controlled), cfg))
        b = pooled(run_ensemble(partial(simulate_micro, folded), other))
        rows.append([m, 0.1 + m, ks_two_sample(a, b)])
    return {"rows": rows}, table_bytes(["m_per_side", "sigma_tilde", "ks"], rows)


LADDER = {0.1: 0.456, 1.1: 0.280, 2.1: 0.219, 4.1: 0.164, 8.1: 0.121}


def variance_ladder():
    cfg = SimulationConfig.for_samples(100_000, 0.5, 0.01, seed=6, n_trajectories=10)
    rows = []
    for eps, expected in LADDER.items():
        x = pooled(run_ensemble(partial(simulate_two_state_sde, EffectiveRates.symmetric(eps), 1.0), cfg))
        std = moments(x)[1]
        rows.append([eps, expected, std, std / expected - 1])
    return {"rows": rows}, table_bytes(["eps_tilde", "expected", "std", "rel_err"], rows)


def decoupled_market():
    params = ThreeStateParams(0.1, 3.0, 1.0, 300.0, a=0.0)
    cfg = SimulationConfig.for_samples(100_000, 2e-3, 2e-5, burn_in=1.0, seed=7, n_trajectories=10)
    paths = run_ensemble(partial(simulate_three_state, params, None), cfg)
    xi, x_f = pooled(paths, 1), pooled(paths, 0)
    ks_xi = ks_distance(xi, stats.uniform(-1, 2).cdf)
    ks_xf = ks_distance(x_f, stats.beta(0.1, 3.0).cdf)
    return {"ks_xi": ks_xi, "ks_xf": ks_xf, "n": xi.size}, table_bytes(["ks_xi", "ks_xf", "n"],
                                                                        [[ks_xi, ks_xf, xi.size]])


def cli_sweep(strategy, m_values, out):
    args = ["sweep", "--strategy", strategy, "--m", ",".join(map(str, m_values)), "--seed", "2024",
            "--samples", str(SWEEP_SAMPLES["samples"]), "--step", str(SWEEP_SAMPLES["base_step"]),
            "--burn-in", str(SWEEP_SAMPLES["burn_in"]), "--trajectories", str(SWEEP_SAMPLES["trajectories"]),
            "--out", str(out)]
    started = time.perf_counter()
    code = main(args)
    elapsed = time.perf_counter() - started
    rows = read_csv(out / "sweep.csv")
    errors = read_csv(out / "sweep_errors.csv")
    data = {"code": code, "elapsed": elapsed, "rows": rows, "errors": errors}
    return data, (out / "sweep.csv").read_bytes() + (out / "sweep_errors.csv").read_bytes()


CRITERIA = {
    3: micro_chain_exactness,
    4: micro_sde_agreement,
    5: controlled_folding,
    6: variance_ladder,
    7: decoupled_market,
    8: lambda out: cli_sweep("fundamentalist", [0, 1, 2, 4, 8], out / "fundamentalist"),
    9: lambda out: cli_sweep("stochastic", [0, 2, 4, 8], out / "stochastic"),
}


class Runs:
    """Lazily evaluated criteria per thread count; results are memoised."""

    def __init__(self, tmp_factory):
        self.tmp_factory = tmp_factory
        self.cache = {}

    def get(self, number, threads):
        key = (number, threads)
        if key not in self.cache:
            with pytest.MonkeyPatch.context() as mp:
                mp.setenv("HERDLAB_THREADS", str(threads))
                fn = CRITERIA[number]
                started = time.perf_counter()
                if number in (8, 9):
                    data, blob = fn(self.tmp_factory.mktemp(f"c{number}_t{threads}"))
                else:
                    data, blob = fn()
                self.cache[key] = (data, blob, time.perf_counter() - started)
        return self.cache[key]


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    return Runs(tmp_path_factory)


# -- the criteria ----------------------------------------------------------------------------------------------------


def test_criterion_01_analytic_ladder(tmp_path):
    started = time.perf_counter()
    code = main(["analytic", "--eps", "0.1", "--m", "2,4,8,16", "--out", str(tmp_path)])
    elapsed = time.perf_counter() - started
    got = {int(r["m"]): float(r["q"]) for r in read_csv(tmp_path / "analytic_q.csv")}
    expected = {2: -9.0, 4: 0.0909, 8: 0.6774, 16: 0.8592}
    worst = max(abs(got[m] - q) for m, q in expected.items())
    record(1, code == 0 and worst <= 1e-3 and elapsed < 1.0,
           f"max |q - ref| = {worst:.2e} (tol 1e-3), {elapsed:.2f} s")


def test_criterion_02_beta_qgaussian_identity():
    x = np.round(np.arange(1, 100) / 100.0, 2)
    worst = 0.0
    for eps_tilde in (1.1, 2.1, 4.1, 8.1):
        q = entropic_index(0.1, 2.0 * (eps_tilde - 0.1))
        beta = beta_stationary_pdf(x, EffectiveRates.symmetric(eps_tilde))
        worst = max(worst, float(np.max(np.abs(q_gaussian_pdf(x, q) / beta - 1.0))))
    record(2, worst <= 1e-10, f"max relative difference {worst:.2e} (tol 1e-10)")


def test_criterion_03_micro_chain_exactness(runs):
    data, _, elapsed = runs.get(3, 8)
    record(3, data["ks"] <= 0.02 and data["n"] == 10**6 and elapsed < 30,
           f"KS vs detailed balance {data['ks']:.4f} (tol 0.02), n={data['n']}, {elapsed:.1f} s")


def test_criterion_04_micro_sde_agreement(runs):
    data, _, elapsed = runs.get(4, 8)
    record(4, data["ks"] <= 0.03 and elapsed < 120,
           f"two-sample KS {data['ks']:.4f} (tol 0.03), n={data['n']}, {elapsed:.1f} s")


def test_criterion_05_controlled_folding(runs):
    data, _, elapsed = runs.get(5, 8)
    m, sigma_tilde, ks = data["rows"][0]
    side = data["rows"][1]
    record(5, ks <= 0.02 and elapsed < 60,
           f"KS {ks:.4f} for M1=M2={m} vs sigma~={sigma_tilde:g}h (tol 0.02); "
           f"M1=M2={side[0]} vs {side[1]:g}h: KS {side[2]:.4f}; {elapsed:.1f} s")


def test_criterion_06_variance_ladder(runs):
    data, _, elapsed = runs.get(6, 8)
    worst = max(abs(r[3]) for r in data["rows"])
    stds = ", ".join(f"{r[2]:.4f}" for r in data["rows"])
    record(6, worst <= 0.05 and elapsed < 120, f"std = [{stds}], worst rel err {worst:.3%} (tol 5%), {elapsed:.1f} s")


def test_criterion_07_decoupled_market(runs):
    data, _, elapsed = runs.get(7, 8)
    ok = data["ks_xi"] <= 0.02 and data["ks_xf"] <= 0.03 and data["n"] >= 10**6 and elapsed < 180
    record(7, ok, f"KS xi {data['ks_xi']:.4f} (tol 0.02), KS x_f {data['ks_xf']:.4f} (tol 0.03), "
                  f"n={data['n']}, {elapsed:.1f} s")


def separated(rows, errors, key, se_key):
    values = [float(r[key]) for r in rows]
    ses = [float(e[se_key]) for e in errors]
    gaps = [(a - b) / np.hypot(sa, sb) if sa or sb else np.inf
            for a, b, sa, sb in zip(values, values[1:], ses, ses[1:])]
    return values, gaps


def test_criterion_08_fundamentalist_sweep(runs):
    data, _, elapsed = runs.get(8, 8)
    std, std_gaps = separated(data["rows"], data["errors"], "std_p", "std_p_se")
    exc, exc_gaps = separated(data["rows"], data["errors"], "exceed_2", "exceed_2_se")
    n_ok = all(int(r["n_samples"]) >= 10**6 for r in data["rows"])
    ok = data["code"] == 0 and n_ok and min(std_gaps) > 3 and min(exc_gaps) > 3 and elapsed < 600
    record(8, ok, f"std_p {[round(v, 4) for v in std]} min gap {min(std_gaps):.1f} SE; "
                  f"P(|p|>2) {[f'{v:.2e}' for v in exc]} min gap {min(exc_gaps):.1f} SE; {elapsed:.0f} s")


def test_criterion_09_stochastic_sweep(runs):
    data, _, elapsed = runs.get(9, 8)
    std, std_gaps = separated(data["rows"], data["errors"], "std_p", "std_p_se")
    n_ok = all(int(r["n_samples"]) >= 10**6 for r in data["rows"])
    ok = data["code"] == 0 and n_ok and min(std_gaps) > 3 and elapsed < 600
    record(9, ok, f"std_p {[round(v, 4) for v in std]} min gap {min(std_gaps):.1f} SE; {elapsed:.0f} s")


def test_criterion_10_thread_independence(runs):
    mismatched = [n for n in CRITERIA if runs.get(n, 8)[1] != runs.get(n, 1)[1]]
    record(10, not mismatched, f"criteria 3-9 tables with 1 and 8 threads: "
                               f"{'identical' if not mismatched else 'differ for ' + str(mismatched)}")

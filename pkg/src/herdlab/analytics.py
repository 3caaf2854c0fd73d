"""Turn sampled paths into densities, moments, tail probabilities and sweep tables."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .engine import (NumericalRegimeError, SamplePath, SimulationConfig, TrajectoryError, run_ensemble,
                     simulate_three_state)
from .model import InterventionSpec, Strategy, ThreeStateParams

__all__ = [
    "Binning",
    "EmpiricalPdf",
    "SweepRow",
    "DEFAULT_THRESHOLDS",
    "build_pdf",
    "ks_distance",
    "ks_two_sample",
    "exceedance",
    "moments",
    "per_trajectory",
    "summarize_prices",
    "intervention_sweep",
]

DEFAULT_THRESHOLDS = (1.0, 2.0, 4.0)
BINS_PER_DECADE = 40


class Binning(str, enum.Enum):
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


@dataclass
class EmpiricalPdf:
    bin_edges: np.ndarray
    densities: np.ndarray
    n_samples: int
    binning: Binning

    @property
    def centers(self) -> np.ndarray:
        if self.binning is Binning.LOGARITHMIC:
            return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def integral(self) -> float:
        return float(np.sum(self.densities * self.widths))


@dataclass
class SweepRow:
    """Price statistics for one intervention size.

    ``std_p_se`` and ``exceedance_se`` are standard errors estimated from the
    spread of the per-trajectory values.
    """

    m: float
    strategy: Strategy
    std_p: float
    exceedance: dict
    n_samples: int
    std_p_se: float = float("nan")
    exceedance_se: dict = field(default_factory=dict)
    pdf: Optional[EmpiricalPdf] = None
    error: Optional[str] = None


def build_pdf(samples, binning: Binning | str = Binning.LINEAR, n_bins: Optional[int] = None,
              value_range: Optional[tuple[float, float]] = None) -> EmpiricalPdf:
    """Histogram density estimate normalised to unit integral.

    Logarithmic bins need strictly positive samples; by default they come at
    40 per decade between the smallest and largest sample. Linear binning
    defaults to 50 bins. ``value_range`` must contain every sample.
    """
    binning = Binning(binning)
    if n_bins is not None and n_bins < 1:
        raise ValueError("n_bins must be positive")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2 or np.all(x == x[0]):
        raise ValueError("need at least two distinct samples")
    lo, hi = (float(x.min()), float(x.max())) if value_range is None else map(float, value_range)
    if value_range is not None and (x.min() < lo or x.max() > hi):
        raise ValueError(f"samples fall outside value_range [{lo}, {hi}]")
    if binning is Binning.LOGARITHMIC:
        if lo <= 0:
            raise ValueError("logarithmic binning requires strictly positive samples")
        if n_bins is None:
            n_bins = max(1, int(np.ceil(BINS_PER_DECADE * np.log10(hi / lo))))
        edges = np.geomspace(lo, hi, n_bins + 1)
    else:
        edges = np.linspace(lo, hi, (50 if n_bins is None else n_bins) + 1)
    counts, _ = np.histogram(x, bins=edges)
    densities = counts / (x.size * np.diff(edges))
    return EmpiricalPdf(edges, densities, int(x.size), binning)


def ks_distance(samples, analytic_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup-distance between the empirical CDF of ``samples`` and ``analytic_cdf``.

    ``analytic_cdf`` must be vectorised. Ties and step-function CDFs are
    handled: the supremum is taken over both one-sided limits at every
    distinct sample value.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size < 100:
        raise ValueError(f"need at least 100 samples, got {x.size}")
    values, counts = np.unique(x, return_counts=True)
    ecdf_right = np.cumsum(counts) / x.size
    ecdf_left = np.concatenate(([0.0], ecdf_right[:-1]))
    cdf_right = np.asarray(analytic_cdf(values), dtype=float)
    cdf_left = np.asarray(analytic_cdf(np.nextafter(values, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(ecdf_right - cdf_right)), np.max(np.abs(ecdf_left - cdf_left))))


def ks_two_sample(a, b) -> float:
    return float(stats.ks_2samp(np.ravel(a), np.ravel(b)).statistic)


def exceedance(samples, thresholds: Iterable[float] = DEFAULT_THRESHOLDS) -> dict:
    """Fraction of ``|samples|`` strictly above each threshold."""
    thresholds = [float(t) for t in thresholds]
    if any(t <= 0 for t in thresholds) or thresholds != sorted(thresholds):
        raise ValueError("thresholds must be positive and sorted")
    mags = np.sort(np.abs(np.asarray(samples, dtype=float).ravel()))
    n = mags.size
    above = n - np.searchsorted(mags, thresholds, side="right")
    return {t: float(c) / n for t, c in zip(thresholds, above)}


def moments(samples) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    return float(np.mean(x)), float(np.std(x, ddof=1))


def per_trajectory(paths: Sequence[SamplePath], statistic: Callable[[SamplePath], float]) -> tuple[float, float]:
    """Mean and standard error of ``statistic`` over independent trajectories."""
    values = np.array([statistic(p) for p in paths], dtype=float)
    if values.size < 2:
        return float(values[0]), float("nan")
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def summarize_prices(paths: Sequence[SamplePath], m: float, strategy: Strategy,
                     thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> SweepRow:
    p = np.concatenate([path.p for path in paths])
    _, std_p = moments(p)
    std_se = per_trajectory(paths, lambda path: np.std(path.p, ddof=1))[1]
    exc_se = {t: per_trajectory(paths, lambda path, t=t: exceedance(path.p, [t])[t])[1] for t in thresholds}
    abs_p = np.abs(p)
    pdf = build_pdf(abs_p[abs_p > 0], Binning.LOGARITHMIC) if np.count_nonzero(abs_p) >= 2 else None
    return SweepRow(m=m, strategy=Strategy(strategy), std_p=std_p, exceedance=exceedance(p, thresholds),
                    n_samples=int(p.size), std_p_se=std_se, exceedance_se=exc_se, pdf=pdf)


def intervention_sweep(base: ThreeStateParams, strategy: Strategy | str, m_values: Sequence[float],
                       config: SimulationConfig, thresholds: Sequence[float] = DEFAULT_THRESHOLDS, *,
                       workers: Optional[int] = None, keep_going: bool = False) -> list[SweepRow]:
    """One :class:`SweepRow` per intervention size, ordered by ``m``.

    Every row is simulated with the same seed, so row ``m=0`` equals the
    uncontrolled run and neighbouring rows share their noise.

    With ``keep_going`` a failing row is returned with ``error`` set instead
    of aborting the sweep.
    """
    strategy = Strategy(strategy)
    rows = []
    for m in sorted(m_values):
        spec = InterventionSpec(strategy, m)
        try:
            paths = run_ensemble(partial(simulate_three_state, base, spec), config, workers=workers)
        except (NumericalRegimeError, TrajectoryError) as exc:
            if not keep_going:
                raise
            rows.append(SweepRow(m=m, strategy=strategy, std_p=float("nan"), exceedance={}, n_samples=0,
                                 error=f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(summarize_prices(paths, m, strategy, thresholds))
    return rows

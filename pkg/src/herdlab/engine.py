"""Stochastic simulation of the herding models.

Three simulators are provided, each producing a :class:`SamplePath` on a
uniform grid of sampling times:

* :func:`simulate_micro` - exact event-driven simulation of the finite-N
  two-state chain (competing exponential clocks, no time step),
* :func:`simulate_two_state_sde` - fixed-step integration of the macroscopic
  herding fraction,
* :func:`simulate_three_state` - fixed-step integration of the coupled
  fundamentalist fraction / chartist mood system with tau feedback.

Randomness: trajectory ``i`` of a run seeded with ``seed`` draws from
``SeedSequence(seed, spawn_key=(i,))``, so an ensemble gives the same paths
whatever the number of worker threads.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .model import (
    EffectiveRates,
    InterventionSpec,
    ParameterError,
    ThreeStateParams,
    TwoStateParams,
    apply_intervention,
    fold_controlled,
)

__all__ = [
    "ConfigError",
    "StepSizeError",
    "NumericalRegimeError",
    "TrajectoryError",
    "ModelTag",
    "SimulationConfig",
    "SamplePath",
    "trajectory_rng",
    "simulate_micro",
    "simulate_two_state_sde",
    "simulate_three_state",
    "run_ensemble",
    "default_workers",
    "pooled",
]

THREADS_ENV = "HERDLAB_THREADS"
MAX_H_STEP = 0.01


class ConfigError(ValueError):
    """Invalid simulation configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class StepSizeError(ConfigError):
    pass


class NumericalRegimeError(RuntimeError):
    """The trajectory spent too long at the x_f floor to be trusted."""


class TrajectoryError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"trajectory {index} failed: {cause}")
        self.index = index


class ModelTag(str, enum.Enum):
    TWO_STATE_MICRO = "two_state_micro"
    TWO_STATE_SDE = "two_state_sde"
    THREE_STATE_SDE = "three_state_sde"


@dataclass(frozen=True)
class SimulationConfig:
    """Time grid, step and seeding of a run.

    Samples are taken at ``burn_in + k * sample_interval`` for every such time
    below ``total_time``. ``burn_in`` defaults to a tenth of ``total_time``.

    Knobs beyond the basic grid:
        integrator: how the herding fraction (two-state x, three-state x_f)
            is stepped. ``"cir"`` (default) samples each step near a boundary
            exactly from the CIR law obtained by freezing the slowly varying
            noise factor, which resolves the boundary layer of small
            idiosyncratic rates, and uses a Beta draw with the exact
            conditional mean and variance in the interior.
            ``"euler"`` is plain Euler-Maruyama with the ``boundary`` fix.
        boundary: ``"reflect"`` (default) or ``"clamp"``, for ``"euler"``.
        x_floor: lower bound on x_f used when evaluating price and tau; also
            the clamp margin for ``boundary="clamp"``.
        max_floor_fraction: largest tolerated fraction of three-state samples
            with x_f below ``x_floor``.
        scheme: ``"intrinsic"`` (fixed step in intrinsic time, default) or
            ``"fixed"`` (fixed step in model time) for the three-state model.
        xf_substeps: mood steps per update of the fundamentalist fraction.
    """

    total_time: float
    sample_interval: float
    base_step: float
    seed: int = 0
    n_trajectories: int = 1
    burn_in: Optional[float] = None
    boundary: str = "reflect"
    x_floor: float = 1e-6
    max_floor_fraction: float = 0.5
    scheme: str = "intrinsic"
    xf_substeps: int = 10
    integrator: str = "cir"

    def __post_init__(self):
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", 0.1 * self.total_time)
        checks = [
            ("total_time", self.total_time > 0, "must be positive"),
            ("burn_in", 0 <= self.burn_in < self.total_time, "must lie in [0, total_time)"),
            ("sample_interval", self.sample_interval > 0, "must be positive"),
            ("base_step", self.base_step > 0, "must be positive"),
            ("sample_interval", self.sample_interval >= self.base_step, "must not be shorter than base_step"),
            ("seed", isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64,
             "must be an unsigned 64-bit integer"),
            ("n_trajectories", isinstance(self.n_trajectories, (int, np.integer)) and self.n_trajectories >= 1,
             "must be a positive integer"),
            ("integrator", self.integrator in ("cir", "euler"), "must be 'cir' or 'euler'"),
            ("boundary", self.boundary in ("reflect", "clamp"), "must be 'reflect' or 'clamp'"),
            ("x_floor", 0 < self.x_floor < 0.5, "must lie in (0, 0.5)"),
            ("max_floor_fraction", 0 <= self.max_floor_fraction <= 1, "must lie in [0, 1]"),
            ("scheme", self.scheme in ("intrinsic", "fixed"), "must be 'intrinsic' or 'fixed'"),
            ("xf_substeps", isinstance(self.xf_substeps, (int, np.integer)) and self.xf_substeps >= 1,
             "must be a positive integer"),
        ]
        for name, ok, message in checks:
            if not ok:
                raise ConfigError(name, message)
        if self.n_samples < 1:
            raise ConfigError("sample_interval", "leaves no sampling time after burn_in")

    @classmethod
    def for_samples(cls, n_samples: int, sample_interval: float, base_step: float,
                    burn_in: Optional[float] = None, **kwargs) -> "SimulationConfig":
        """Config with exactly ``n_samples`` samples per trajectory."""
        if not (isinstance(n_samples, (int, np.integer)) and n_samples >= 1):
            raise ConfigError("n_samples", "must be a positive integer")
        if not sample_interval > 0:
            raise ConfigError("sample_interval", "must be positive")
        if burn_in is not None and not burn_in >= 0:
            raise ConfigError("burn_in", "must be non-negative")
        span = n_samples * sample_interval
        if burn_in is None:
            burn_in = span / 9.0
        return cls(total_time=burn_in + span, sample_interval=sample_interval,
                   base_step=base_step, burn_in=burn_in, **kwargs)

    @property
    def n_samples(self) -> int:
        return int(math.floor((self.total_time - self.burn_in) / self.sample_interval + 1e-9))

    def grid(self) -> np.ndarray:
        return self.burn_in + self.sample_interval * np.arange(self.n_samples, dtype=float)


@dataclass
class SamplePath:
    """Sampled trajectory of one realisation.

    ``states`` has shape ``(n,)`` for the two-state models (counts for the
    microscopic chain, fractions for the SDE) and ``(n, 3)`` with columns
    ``x_f, xi, p`` for the three-state model.
    """

    times: np.ndarray
    states: np.ndarray
    seed: int
    model_tag: ModelTag
    trajectory: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.shape[0]

    def fractions(self) -> np.ndarray:
        """Herding fraction X/N of a two-state path."""
        if self.model_tag is ModelTag.TWO_STATE_MICRO:
            return self.states / self.meta["n_agents"]
        if self.model_tag is ModelTag.TWO_STATE_SDE:
            return self.states
        raise TypeError("three-state paths have no single herding fraction")

    @property
    def x_f(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def xi(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def p(self) -> np.ndarray:
        return self.states[:, 2]


def trajectory_rng(seed: int, trajectory: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(trajectory),))))


def _integrator(config):
    return _kernels.CIR if config.integrator == "cir" else _kernels.EULER


def _boundary(config):
    return _kernels.REFLECT if config.boundary == "reflect" else _kernels.CLAMP


def simulate_micro(params: TwoStateParams, config: SimulationConfig, *, trajectory: int = 0,
                   x0: Optional[int] = None) -> SamplePath:
    """Exact simulation of the N-agent chain with controlled agents.

    The state starts at ``x0`` (default: the integer nearest the mean of the
    stationary law) and is read off at every sampling time.
    """
    n = params.n_agents
    if x0 is None:
        x0 = int(round(n * fold_controlled(params).mean)) if params.sigma1 + params.sigma2 + params.m1 + params.m2 > 0 \
            else n // 2
    if not 0 <= x0 <= n:
        raise ParameterError(f"x0 must lie in [0, {n}], got {x0}")
    grid = config.grid()
    out = np.empty(grid.shape[0], dtype=np.int64)
    _kernels.micro_chain(trajectory_rng(config.seed, trajectory), int(n), float(params.sigma1),
                         float(params.sigma2), float(params.herding), int(params.m1), int(params.m2),
                         int(x0), grid, out)
    return SamplePath(grid, out, config.seed, ModelTag.TWO_STATE_MICRO, trajectory, {"n_agents": n})


def simulate_two_state_sde(rates: EffectiveRates, h: float, config: SimulationConfig, *,
                           trajectory: int = 0, x0: Optional[float] = None) -> SamplePath:
    """Path of the herding fraction on a fixed step ``config.base_step``.

    See ``SimulationConfig.integrator`` for the step methods. The step must
    satisfy ``h * base_step <= 0.01``.
    """
    if not h > 0:
        raise ParameterError(f"h must be positive, got {h}")
    if h * config.base_step > MAX_H_STEP:
        raise StepSizeError("base_step", f"h * base_step = {h * config.base_step:g} exceeds {MAX_H_STEP}")
    x0 = rates.mean if x0 is None else float(x0)
    if not 0 <= x0 <= 1:
        raise ParameterError(f"x0 must lie in [0, 1], got {x0}")
    grid = config.grid()
    out = np.empty(grid.shape[0])
    _kernels.two_state_em(trajectory_rng(config.seed, trajectory), float(rates.eps1), float(rates.eps2),
                          float(h), x0, float(config.base_step), _integrator(config), _boundary(config),
                          float(config.x_floor), grid, out)
    return SamplePath(grid, out, config.seed, ModelTag.TWO_STATE_SDE, trajectory)


def simulate_three_state(params: ThreeStateParams, spec: Optional[InterventionSpec], config: SimulationConfig, *,
                         trajectory: int = 0, initial: Optional[tuple[float, float]] = None) -> SamplePath:
    """Path of (x_f, xi) with p recorded at every sample.

    ``spec`` is applied to ``params`` first; pass ``None`` (or an identity
    spec) for parameters that already include an intervention. The default
    start is the deterministic fixed point ``(eps_cf/(eps_cf+eps_fc), 0)``.

    Raises:
        NumericalRegimeError: more than ``config.max_floor_fraction`` of the
            samples had x_f below ``config.x_floor``.
    """
    eff = params if spec is None else apply_intervention(params, spec)
    xf0, xi0 = (eff.xf_equilibrium, 0.0) if initial is None else map(float, initial)
    if not (0 < xf0 < 1 and -1 <= xi0 <= 1):
        raise ParameterError(f"initial state ({xf0}, {xi0}) outside (0,1) x [-1,1]")
    grid = config.grid()
    out = np.empty((grid.shape[0], 3))
    scheme = _kernels.INTRINSIC if config.scheme == "intrinsic" else _kernels.FIXED
    hits = _kernels.three_state_em(
        trajectory_rng(config.seed, trajectory), float(eff.eps_cf), float(eff.eps_fc), float(eff.eps_cc),
        float(eff.big_h), float(eff.a), float(eff.alpha), float(eff.r0), xf0, xi0,
        float(config.base_step), scheme, _integrator(config), int(config.xf_substeps), float(config.x_floor), grid, out)
    fraction = hits / grid.shape[0]
    if fraction > config.max_floor_fraction:
        raise NumericalRegimeError(
            f"x_f below floor {config.x_floor:g} in {fraction:.1%} of samples "
            f"(limit {config.max_floor_fraction:.1%})")
    return SamplePath(grid, out, config.seed, ModelTag.THREE_STATE_SDE, trajectory,
                      {"floor_hits": int(hits), "params": eff})


def default_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            n = int(value)
        except ValueError:
            raise ConfigError(THREADS_ENV, f"must be a positive integer, got {value!r}") from None
        if n < 1:
            raise ConfigError(THREADS_ENV, f"must be a positive integer, got {value!r}")
        return n
    return os.cpu_count() or 1


def run_ensemble(model_request: Callable[..., SamplePath], config: SimulationConfig, *,
                 workers: Optional[int] = None) -> list[SamplePath]:
    """Run ``config.n_trajectories`` independent paths.

    ``model_request`` is called as ``model_request(config, trajectory=i)``,
    e.g. ``functools.partial(simulate_micro, params)``. Paths come back in
    trajectory order; the result does not depend on ``workers``.
    """
    n = config.n_trajectories
    workers = default_workers() if workers is None else workers

    def one(i):
        try:
            return model_request(config, trajectory=i)
        except Exception as exc:
            raise TrajectoryError(i, exc) from exc

    if workers <= 1 or n == 1:
        return [one(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=min(workers, n)) as pool:
        return list(pool.map(one, range(n)))


def pooled(paths: Sequence[SamplePath], column: Optional[int] = None) -> np.ndarray:
    """Concatenate the samples of several paths (optionally one state column)."""
    if column is None:
        return np.concatenate([p.states for p in paths])
    return np.concatenate([p.states[:, column] for p in paths])

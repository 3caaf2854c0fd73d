"""Closed-form pieces of the herding models.

Everything here is a pure function of its arguments: transition rates of the
two-state (Kirman) chain with controlled agents, the macroscopic drift and
diffusion terms, stationary densities, the Walrasian log-price and the
inter-event time feedback of the three-state market model, and the parameter
shifts that represent market interventions.

Rates are returned per unit time; any time step belongs to the simulation
engine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

__all__ = [
    "ParameterError",
    "UndefinedIndexError",
    "TwoStateParams",
    "EffectiveRates",
    "QGaussianParams",
    "ThreeStateParams",
    "MarketState",
    "Strategy",
    "InterventionSpec",
    "BASELINE_MARKET",
    "transition_rates",
    "fold_controlled",
    "beta_stationary_pdf",
    "beta_variance",
    "entropic_index",
    "q_gaussian_params",
    "q_gaussian_pdf",
    "log_price",
    "excess_demands",
    "inter_event_time",
    "two_state_drift_diffusion",
    "three_state_drift_diffusion",
    "apply_intervention",
]


class ParameterError(ValueError):
    """Raised for arguments outside a model's domain."""


class UndefinedIndexError(ParameterError):
    """The entropic index has a pole at an effective rate of exactly one."""


@dataclass(frozen=True)
class TwoStateParams:
    """Kirman chain with ``m1`` agents pinned to state 1 and ``m2`` to state 2.

    Attributes:
        n_agents: number of free agents N.
        sigma1, sigma2: idiosyncratic switching rates towards state 1 / 2.
        herding: herding intensity h (per pair, per unit time).
        m1, m2: controlled agents held in state 1 / state 2.
    """

    n_agents: int
    sigma1: float
    sigma2: float
    herding: float
    m1: int = 0
    m2: int = 0

    def __post_init__(self):
        if int(self.n_agents) != self.n_agents or self.n_agents < 1:
            raise ParameterError(f"n_agents must be a positive integer, got {self.n_agents}")
        if not self.herding > 0:
            raise ParameterError(f"herding must be positive, got {self.herding}")
        for name in ("sigma1", "sigma2"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be nonnegative, got {getattr(self, name)}")
        for name in ("m1", "m2"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ParameterError(f"{name} must be a nonnegative integer, got {value}")


@dataclass(frozen=True)
class EffectiveRates:
    """Idiosyncratic rates in units of the herding intensity."""

    eps1: float
    eps2: float

    def __post_init__(self):
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ParameterError(f"effective rates must be positive, got ({self.eps1}, {self.eps2})")

    @classmethod
    def symmetric(cls, eps: float) -> "EffectiveRates":
        return cls(eps, eps)

    @property
    def is_symmetric(self) -> bool:
        return self.eps1 == self.eps2

    @property
    def mean(self) -> float:
        return self.eps1 / (self.eps1 + self.eps2)


@dataclass(frozen=True)
class QGaussianParams:
    q: float
    width: float
    normalization: float


@dataclass(frozen=True)
class ThreeStateParams:
    """Scaled-time parameters of the fundamentalist/chartist market.

    ``eps_cc`` is already divided by ``big_h``; time is measured in units of
    the inverse fundamentalist-chartist herding rate.
    """

    eps_cf: float
    eps_fc: float
    eps_cc: float
    big_h: float
    a: float = 0.0
    alpha: float = 2.0
    r0: float = 1.0

    def __post_init__(self):
        for name in ("eps_cf", "eps_fc", "eps_cc", "big_h", "alpha", "r0"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.a >= 0:
            raise ParameterError(f"a must be nonnegative, got {self.a}")

    @property
    def xf_equilibrium(self) -> float:
        return self.eps_cf / (self.eps_cf + self.eps_fc)


# Default market used for the intervention ladders.
BASELINE_MARKET = ThreeStateParams(eps_cf=0.1, eps_fc=3.0, eps_cc=3.0, big_h=300.0, a=0.5, alpha=2.0, r0=1.0)


@dataclass(frozen=True)
class MarketState:
    x_f: float
    xi: float
    p: float

    @classmethod
    def from_fractions(cls, x_f: float, xi: float, r0: float = 1.0) -> "MarketState":
        return cls(x_f, xi, log_price(x_f, xi, r0))


class Strategy(str, enum.Enum):
    NONE = "none"
    FUNDAMENTALIST = "fundamentalist"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class InterventionSpec:
    kind: Strategy = Strategy.NONE
    m: float = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Strategy(self.kind))
        if not self.m >= 0:
            raise ParameterError(f"number of controlled agents must be nonnegative, got {self.m}")

    @property
    def is_identity(self) -> bool:
        return self.kind is Strategy.NONE or self.m == 0


def transition_rates(params: TwoStateParams, x_count: int) -> tuple[float, float]:
    """Rates of the one-step transitions X -> X+1 and X -> X-1.

    Controlled agents only act as herding sources: they add ``h*m1`` to the
    pull towards state 1 and ``h*m2`` to the pull towards state 2.
    """
    n = params.n_agents
    if not 0 <= x_count <= n:
        raise ParameterError(f"x_count must lie in [0, {n}], got {x_count}")
    h = params.herding
    # fold first so that (sigma, m) and (sigma + h*m, 0) agree bit for bit
    up = (n - x_count) * ((params.sigma1 + h * params.m1) + h * x_count)
    down = x_count * ((params.sigma2 + h * params.m2) + h * (n - x_count))
    return float(up), float(down)


def fold_controlled(params: TwoStateParams) -> EffectiveRates:
    h = params.herding
    return EffectiveRates((params.sigma1 + h * params.m1) / h, (params.sigma2 + h * params.m2) / h)


def _log_beta_norm(eps1, eps2):
    return gammaln(eps1 + eps2) - gammaln(eps1) - gammaln(eps2)


def beta_stationary_pdf(x, rates: EffectiveRates):
    """Stationary density of the herding fraction, a Beta(eps1, eps2) law.

    Works on scalars and arrays. At a boundary where the exponent is negative
    the density diverges and ``inf`` is returned there.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise ParameterError("x must lie in [0, 1]")
    a1, a2 = rates.eps1 - 1.0, rates.eps2 - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_body = _xlogy(a1, x_arr) + _xlogy(a2, 1.0 - x_arr)
        out = np.exp(_log_beta_norm(rates.eps1, rates.eps2) + log_body)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _xlogy(a, x):
    # a*log(x) with 0*log(0) = 0, -inf/+inf kept for the boundary cases
    if a == 0:
        return np.zeros_like(x)
    return a * np.log(x)


def beta_variance(rates: EffectiveRates) -> float:
    s = rates.eps1 + rates.eps2
    return rates.eps1 * rates.eps2 / (s * s * (s + 1.0))


def entropic_index(eps_base: float, m: float) -> float:
    """Entropic index q of the symmetric chain with ``m`` stochastic agents.

    The effective rate is ``eps_base + m/2`` on each side.
    """
    denom = 2.0 * eps_base + m - 2.0
    if denom == 0:
        raise UndefinedIndexError(f"q is undefined for eps_base={eps_base}, m={m} (effective rate 1)")
    return 1.0 - 2.0 / denom


def q_gaussian_params(q: float) -> QGaussianParams:
    if not q < 1:
        raise ParameterError(f"q-Gaussian form requires q < 1, got {q}")
    k = 1.0 / (1.0 - q)
    log_c = math.log(3.0 - q) + gammaln((3.0 - q) / (2.0 * (1.0 - q))) - 0.5 * math.log(math.pi) - gammaln(k)
    return QGaussianParams(q=q, width=(1.0 - q) / (3.0 - q), normalization=math.exp(log_c))


def q_gaussian_pdf(x, q: float):
    """Compact-support q-Gaussian on [0, 1] centred at 1/2.

    Equal to ``C_q * [4 x (1 - x)]**(1/(1-q))``.
    """
    qp = q_gaussian_params(q)
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise ParameterError("x must lie in [0, 1]")
    out = qp.normalization * np.power(4.0 * (x_arr - x_arr * x_arr), 1.0 / (1.0 - q))
    if np.ndim(out) == 0:
        return float(out)
    return out


def log_price(x_f, xi, r0: float = 1.0):
    """Walrasian log-price relative to the fundamental value."""
    x_f = np.asarray(x_f, dtype=float)
    if np.any(x_f <= 0) or np.any(x_f >= 1):
        raise ParameterError("x_f must lie in the open interval (0, 1)")
    p = r0 * (1.0 - x_f) / x_f * np.asarray(xi, dtype=float)
    return float(p) if np.ndim(p) == 0 else p


def excess_demands(x_f, xi, p, r0: float = 1.0):
    """Per-agent demands of fundamentalists and chartists at log-price ``p``."""
    x_f = np.asarray(x_f, dtype=float)
    d_f = -x_f * np.asarray(p, dtype=float)
    d_c = r0 * (1.0 - x_f) * np.asarray(xi, dtype=float)
    if np.ndim(d_f) == 0:
        return float(d_f), float(d_c)
    return d_f, d_c


def inter_event_time(x_f, xi, params: ThreeStateParams):
    p = log_price(x_f, xi, params.r0)
    tau = np.power(1.0 + params.a * np.abs(p), -params.alpha)
    return float(tau) if np.ndim(tau) == 0 else tau


def two_state_drift_diffusion(x: float, rates: EffectiveRates, h: float) -> tuple[float, float]:
    """Drift and squared diffusion of the herding fraction in unscaled time."""
    if not 0 <= x <= 1:
        raise ParameterError(f"x must lie in [0, 1], got {x}")
    drift = h * (rates.eps1 * (1.0 - x) - rates.eps2 * x)
    return drift, 2.0 * h * x * (1.0 - x)


def three_state_drift_diffusion(state: MarketState, params: ThreeStateParams) -> tuple[float, float, float, float]:
    """Drifts and squared diffusions of (x_f, xi), both divided by tau."""
    x_f, xi = state.x_f, state.xi
    if not -1 <= xi <= 1:
        raise ParameterError(f"xi must lie in [-1, 1], got {xi}")
    inv_tau = 1.0 / inter_event_time(x_f, xi, params)
    drift_xf = ((1.0 - x_f) * params.eps_cf - x_f * params.eps_fc) * inv_tau
    diffsq_xf = 2.0 * x_f * (1.0 - x_f) * inv_tau
    drift_xi = -2.0 * params.big_h * params.eps_cc * xi * inv_tau
    diffsq_xi = 2.0 * params.big_h * (1.0 - xi * xi) * inv_tau
    return drift_xf, diffsq_xf, drift_xi, diffsq_xi


def apply_intervention(params: ThreeStateParams, spec: InterventionSpec) -> ThreeStateParams:
    """Shift the idiosyncratic rates to account for ``spec.m`` controlled agents.

    Fundamentalists add ``m`` to the chartist-to-fundamentalist rate.
    Stochastic traders look like ``m/2`` agents of the opposite group in both
    the slow and the fast process, so ``eps_cf``, ``eps_fc`` and the folded
    optimist/pessimist rate ``eps_cc`` each grow by ``m/2``.
    """
    if spec.is_identity:
        return params
    if spec.kind is Strategy.FUNDAMENTALIST:
        return replace(params, eps_cf=params.eps_cf + spec.m)
    half = spec.m / 2.0
    return replace(
        params,
        eps_cf=params.eps_cf + half,
        eps_fc=params.eps_fc + half,
        eps_cc=params.eps_cc + half,
    )

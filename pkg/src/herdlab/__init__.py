"""Herding models of financial markets with controlled agents.

``herdlab.model`` holds the closed-form pieces, ``herdlab.engine`` the
stochastic simulators, ``herdlab.analytics`` the statistics and
``herdlab.cli`` the command-line front end.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    BASELINE_MARKET,
    EffectiveRates,
    InterventionSpec,
    MarketState,
    ParameterError,
    QGaussianParams,
    Strategy,
    ThreeStateParams,
    TwoStateParams,
    UndefinedIndexError,
    apply_intervention,
    beta_stationary_pdf,
    beta_variance,
    entropic_index,
    excess_demands,
    fold_controlled,
    inter_event_time,
    log_price,
    q_gaussian_params,
    q_gaussian_pdf,
    three_state_drift_diffusion,
    transition_rates,
    two_state_drift_diffusion,
)
from .engine import (  # noqa: E402
    ConfigError,
    NumericalRegimeError,
    SamplePath,
    SimulationConfig,
    StepSizeError,
    TrajectoryError,
    run_ensemble,
    simulate_micro,
    simulate_three_state,
    simulate_two_state_sde,
)
from .analytics import (  # noqa: E402
    EmpiricalPdf,
    SweepRow,
    build_pdf,
    exceedance,
    intervention_sweep,
    ks_distance,
    ks_two_sample,
    moments,
)

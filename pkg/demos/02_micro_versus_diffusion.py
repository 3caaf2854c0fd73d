"""
From a finite population to the diffusion limit
===============================================

The N-agent chain is simulated exactly, event by event. Its stationary
distribution is compared with the detailed-balance solution and with the
diffusion approximation, which is integrated with an exact boundary step.
"""

from functools import partial

import numpy as np
from scipy import stats

from herdlab import (EffectiveRates, SimulationConfig, TwoStateParams, fold_controlled, ks_distance, ks_two_sample,
                     run_ensemble, simulate_micro, simulate_two_state_sde)

# %%
# A small population: the exact stationary law follows from detailed balance,
# pi[k+1] / pi[k] = up(k) / down(k+1).

n = 10
params = TwoStateParams(n, sigma1=2.0, sigma2=2.0, herding=1.0)
cfg = SimulationConfig.for_samples(20_000, 0.5, 0.01, seed=1, n_trajectories=5)
counts = np.concatenate([p.states for p in run_ensemble(partial(simulate_micro, params), cfg)])

k = np.arange(n + 1)
up = (n - k[:-1]) * (2.0 + k[:-1])
down = k[1:] * (2.0 + n - k[1:])
pi = np.concatenate(([1.0], np.cumprod(up / down)))
pi /= pi.sum()
print("empirical ", np.round(np.bincount(counts, minlength=n + 1) / counts.size, 4))
print("balance   ", np.round(pi, 4))
print("KS", ks_distance(counts, lambda x: np.where(x >= 0, np.cumsum(pi)[np.clip(np.floor(x).astype(int), 0, n)], 0)))

# %%
# A large population against the diffusion with the same effective rates.

big = TwoStateParams(100, 2.0, 2.0, 1.0)
cfg = SimulationConfig.for_samples(20_000, 0.1, 0.01, seed=2, n_trajectories=5)
micro = np.concatenate([p.fractions() for p in run_ensemble(partial(simulate_micro, big), cfg)])
sde = np.concatenate([p.states for p in run_ensemble(
    partial(simulate_two_state_sde, fold_controlled(big), big.herding), cfg)])
print("micro vs diffusion KS", round(ks_two_sample(micro, sde), 4))
print("diffusion vs Beta(2,2) KS", round(ks_distance(sde, stats.beta(2, 2).cdf), 4))

# %%
# Small rates put most of the mass next to the boundaries. The default step
# handles this boundary layer, while plain Euler with reflection does not.

for integrator in ("cir", "euler"):
    cfg = SimulationConfig.for_samples(50_000, 0.5, 0.01, seed=3, n_trajectories=4, integrator=integrator)
    x = np.concatenate([p.states for p in run_ensemble(
        partial(simulate_two_state_sde, EffectiveRates.symmetric(0.1), 1.0), cfg)])
    print(f"{integrator:>5}: std {x.std():.3f} (Beta(0.1, 0.1): 0.456)")

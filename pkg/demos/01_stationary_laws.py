"""
Stationary laws of the herding fraction
=======================================

With herding, the share of agents in state 1 settles into a Beta law. Its
shape is set by the idiosyncratic rates measured in units of the herding
rate. Controlled agents add to those rates, and once the effective rate
exceeds one the Beta law can be rewritten as a compact q-Gaussian.
"""

import numpy as np

from herdlab import EffectiveRates, beta_stationary_pdf, beta_variance, entropic_index, q_gaussian_pdf
from herdlab.model import UndefinedIndexError

# %%
# The ladder: base rate 0.1, with M controlled agents split evenly over the
# two states, so that each side gains M/2.

eps = 0.1
x = np.linspace(0.01, 0.99, 99)
print(f"{'M':>3} {'eps~':>5} {'std':>7} {'q':>8}  max|qG/Beta - 1|")
for m in (0, 2, 4, 8, 16):
    rates = EffectiveRates.symmetric(eps + m / 2)
    beta = beta_stationary_pdf(x, rates)
    std = np.sqrt(beta_variance(rates))
    try:
        q = entropic_index(eps, m)
    except UndefinedIndexError:
        print(f"{m:>3} {rates.eps1:>5.1f} {std:>7.4f}  undefined")
        continue
    gap = np.max(np.abs(q_gaussian_pdf(x, q) / beta - 1)) if q < 1 else float("nan")
    print(f"{m:>3} {rates.eps1:>5.1f} {std:>7.4f} {q:>8.4f}  {gap:.1e}")

# %%
# Below one the density diverges at both consensus states. Above one it is
# single-peaked, and it narrows as more agents are controlled.

for m in (0, 16):
    rates = EffectiveRates.symmetric(eps + m / 2)
    print(m, np.round(beta_stationary_pdf([0.001, 0.25, 0.5], rates), 3))

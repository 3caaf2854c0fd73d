"""Independent reference values used by the tests.

Nothing here calls into the simulation engine; each oracle is a separate
route to the quantity under test.
"""

import numpy as np
from scipy import integrate, special


def detailed_balance_pmf(n, sigma1, sigma2, h, m1=0, m2=0):
    """Stationary law of the N-agent chain from pi[k+1]/pi[k] = up(k)/down(k+1)."""
    log_pi = np.zeros(n + 1)
    for k in range(n):
        up = (n - k) * (sigma1 + h * (k + m1))
        down = (k + 1) * (sigma2 + h * (n - k - 1 + m2))
        log_pi[k + 1] = log_pi[k] + np.log(up) - np.log(down)
    pi = np.exp(log_pi - log_pi.max())
    return pi / pi.sum()


def step_cdf(support, pmf):
    """Right-continuous CDF of a lattice law, vectorised over its argument."""
    support = np.asarray(support, dtype=float)
    cum = np.cumsum(pmf)

    def cdf(x):
        idx = np.searchsorted(support, np.asarray(x, dtype=float), side="right") - 1
        return np.where(idx >= 0, cum[np.clip(idx, 0, None)], 0.0)

    return cdf


def market_price_std(eps_cf, eps_fc, eps_cc, a=0.5, alpha=2.0, r0=1.0):
    """Stationary standard deviation of p by quadrature.

    Dividing both drift and squared diffusion by tau is a random time change,
    so the stationary density is tau(x_f, xi) times the product of the
    tau-free marginals, Beta(eps_cf, eps_fc) and (1 - xi^2)^(eps_cc - 1).
    The substitution x = u^(1/eps_cf) removes the x^(eps_cf - 1) singularity.
    """
    log_norm = special.gammaln(eps_cf + eps_fc) - special.gammaln(eps_cf) - special.gammaln(eps_fc)

    def inner(u, power):
        x = u ** (1.0 / eps_cf)
        if x <= 0.0:
            return 0.0
        weight = np.exp(log_norm) * (1.0 - x) ** (eps_fc - 1.0) / eps_cf

        def f(xi):
            p = r0 * (1.0 - x) / x * xi
            return (1.0 - xi * xi) ** (eps_cc - 1.0) * (1.0 + a * abs(p)) ** (-alpha) * p ** power

        knee = x / (r0 * (1.0 - x))
        points = [knee] if knee < 1 else None
        return 2.0 * weight * integrate.quad(f, 0.0, 1.0, points=points, limit=200, epsabs=1e-14, epsrel=1e-11)[0]

    z = integrate.quad(lambda u: inner(u, 0), 0.0, 1.0, limit=400, epsabs=1e-14, epsrel=1e-10)[0]
    m2 = integrate.quad(lambda u: inner(u, 2), 0.0, 1.0, limit=400, epsabs=1e-14, epsrel=1e-10)[0]
    return float(np.sqrt(m2 / z))

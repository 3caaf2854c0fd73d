"""JIT-compiled inner loops.

Each kernel takes its own ``numpy.random.Generator`` and a precomputed
sampling grid, and fills preallocated output arrays. Kernels release the GIL
so an ensemble can be spread over threads.
"""

import numpy as np
from numba import njit

REFLECT = 0
CLAMP = 1

INTRINSIC = 0
FIXED = 1

CIR = 0
EULER = 1

# width of the boundary zone handled by the CIR branch of jacobi_step
EDGE = 0.1


@njit(nogil=True, cache=True)
def micro_chain(rng, n, sigma1, sigma2, h, m1, m2, x0, grid, out):
    """Event-driven simulation of the birth-death chain with exact waiting times."""
    x = x0
    t = 0.0
    k = 0
    n_grid = grid.shape[0]
    while k < n_grid:
        up = (n - x) * ((sigma1 + h * m1) + h * x)
        down = x * ((sigma2 + h * m2) + h * (n - x))
        total = up + down
        if total <= 0.0:
            # absorbed: nothing can happen any more
            while k < n_grid:
                out[k] = x
                k += 1
            break
        t_next = t + rng.exponential() / total
        while k < n_grid and grid[k] < t_next:
            out[k] = x
            k += 1
        if rng.random() * total < up:
            x += 1
        else:
            x -= 1
        t = t_next


@njit(nogil=True, cache=True)
def _fold_unit(x, boundary, floor):
    if boundary == REFLECT:
        if x < 0.0:
            x = -x
        if x > 1.0:
            x = 2.0 - x
        # a step can overshoot by more than the whole interval
        if x < 0.0:
            x = 0.0
        elif x > 1.0:
            x = 1.0
    else:
        if x < floor:
            x = floor
        elif x > 1.0 - floor:
            x = 1.0 - floor
    return x


@njit(nogil=True, cache=True)
def euler_step(rng, x, eps_to, eps_from, s, boundary, floor):
    """One Euler-Maruyama step of the herding fraction in intrinsic time."""
    v = x * (1.0 - x)
    if v < 0.0:
        v = 0.0
    x = x + (eps_to * (1.0 - x) - eps_from * x) * s + np.sqrt(2.0 * v * s) * rng.standard_normal()
    return _fold_unit(x, boundary, floor)


@njit(nogil=True, cache=True)
def _cir_step(rng, x, eps_to, eps_from, s):
    # freeze the noise factor that stays near one and sample the CIR law exactly
    b = eps_to + eps_from
    decay = np.exp(-b * s)
    if x <= 0.5:
        y, a = x, eps_to
    else:
        y, a = 1.0 - x, eps_from
    sig2 = 2.0 * (1.0 - y)
    c = sig2 * (1.0 - decay) / (4.0 * b)
    y = c * rng.noncentral_chisquare(4.0 * a / sig2, y * decay / c)
    if x > 0.5:
        y = 1.0 - y
    if y > 1.0:
        y = 2.0 - y
    if y < 0.0:
        y = -y
    if y > 1.0:
        y = 1.0
    return y


@njit(nogil=True, cache=True)
def _beta_step(rng, x, eps_to, eps_from, s):
    # Beta law with the exact conditional mean and variance of the diffusion
    b = eps_to + eps_from
    mu = eps_to / b
    e1 = np.exp(-b * s)
    m = mu + (x - mu) * e1
    # the second raw moment solves a linear ODE with rates b and 2(b + 1)
    m2_inf = (eps_to + 1.0) * mu / (b + 1.0)
    amp = 2.0 * (eps_to + 1.0) * (x - mu) / (b + 2.0)
    m2 = m2_inf + amp * e1 + (x * x - m2_inf - amp) * np.exp(-2.0 * (b + 1.0) * s)
    v = m2 - m * m
    cap = m * (1.0 - m)
    if v <= 0.0 or v >= cap:
        return m
    k = cap / v - 1.0
    return rng.beta(m * k, (1.0 - m) * k)


@njit(nogil=True, cache=True)
def jacobi_step(rng, x, eps_to, eps_from, s):
    """Advance dx = (eps_to (1-x) - eps_from x) ds + sqrt(2 x (1-x)) dW by ``s``.

    Within ``EDGE`` of a boundary the factor of the noise that stays near one
    is frozen, which makes the step a CIR transition sampled exactly from a
    scaled noncentral chi-square; this resolves the boundary layer at any
    step size. In the interior, where freezing would bias the density, the
    step draws from the Beta law with the exact conditional mean and
    variance. Both branches keep the state in [0, 1].
    """
    if x < EDGE or x > 1.0 - EDGE:
        return _cir_step(rng, x, eps_to, eps_from, s)
    return _beta_step(rng, x, eps_to, eps_from, s)


@njit(nogil=True, cache=True)
def two_state_em(rng, eps1, eps2, h, x0, dt, integrator, boundary, floor, grid, out):
    x = x0
    t = 0.0
    k = 0
    n_grid = grid.shape[0]
    s = h * dt
    while k < n_grid:
        t_next = t + dt
        while k < n_grid and grid[k] < t_next:
            out[k] = x
            k += 1
        if integrator == CIR:
            x = jacobi_step(rng, x, eps1, eps2, s)
        else:
            x = euler_step(rng, x, eps1, eps2, s, boundary, floor)
        t = t_next


@njit(nogil=True, cache=True)
def three_state_em(rng, eps_cf, eps_fc, eps_cc, big_h, a, alpha, r0,
                   xf0, xi0, dt, scheme, integrator, substeps, floor, grid, out):
    """Coupled integration of (x_f, xi) with tau feedback.

    xi takes Euler-Maruyama steps. x_f is held for ``substeps`` xi-steps and
    then advanced over the intrinsic time accumulated meanwhile, with
    :func:`jacobi_step` or :func:`euler_step`; the two equations share
    nothing but the clock.

    ``scheme == INTRINSIC``: every step covers ``dt`` of intrinsic time, i.e.
    ``dt * tau`` of model time, with unscaled coefficients.
    ``scheme == FIXED``: every step covers ``dt`` of model time with drift and
    squared diffusion divided by tau.

    ``out[k]`` receives (x_f, xi, p); the state is held constant between steps.
    Returns the number of samples whose x_f lay below ``floor``.
    """
    xf = xf0
    xi = xi0
    t = 0.0
    k = 0
    floor_hits = 0
    n_grid = grid.shape[0]
    sq_xi = np.sqrt(2.0 * big_h * dt)
    k_xi = 2.0 * big_h * eps_cc
    s_acc = 0.0
    j = 0
    while k < n_grid:
        xf_eff = xf if xf > floor else floor
        p = r0 * (1.0 - xf_eff) / xf_eff * xi
        tau = (1.0 + a * abs(p)) ** (-alpha)
        if scheme == INTRINSIC:
            t_next = t + dt * tau
            scale = 1.0
        else:
            t_next = t + dt
            scale = 1.0 / tau
        while k < n_grid and grid[k] < t_next:
            out[k, 0] = xf
            out[k, 1] = xi
            out[k, 2] = p
            if xf < floor:
                floor_hits += 1
            k += 1
        vxi = 1.0 - xi * xi
        if vxi < 0.0:
            vxi = 0.0
        xi = xi - k_xi * xi * scale * dt + sq_xi * np.sqrt(scale * vxi) * rng.standard_normal()
        if xi > 1.0:
            xi = 2.0 - xi
        if xi < -1.0:
            xi = -2.0 - xi
        if xi > 1.0:
            xi = 1.0
        elif xi < -1.0:
            xi = -1.0
        s_acc += scale * dt
        j += 1
        if j == substeps:
            if integrator == CIR:
                xf = jacobi_step(rng, xf, eps_cf, eps_fc, s_acc)
            else:
                xf = euler_step(rng, xf, eps_cf, eps_fc, s_acc, REFLECT, floor)
            if xf <= 0.0:
                xf = 5e-324
            s_acc = 0.0
            j = 0
        t = t_next
    return floor_hits

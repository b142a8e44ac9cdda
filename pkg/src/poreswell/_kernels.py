"""Compiled inner loops of the reference-grid stepper.

Everything that runs once per node per Picard sweep lives here so the
Python layer in :mod:`poreswell.pde` only dispatches. Constitutive laws are
passed as flat float arrays (see ``RationalSigmoid.encode`` and
``TabulatedLaw.encode``) and the scalar constants as
``pp = [a, a0, H, k, phi_a]``.

Status codes returned by the marches: ``OK``, ``DEGENERATE`` (front below the
guard) and ``STALLED`` (Picard limit reached or non-finite iterate).
"""

from __future__ import annotations

import numpy as np
from numba import njit

OK = 0
DEGENERATE = 1
STALLED = 2

MONOLITHIC = 0
AP = 1

LAW_RATIONAL = 0.0
LAW_TABLE = 1.0


@njit(cache=True)
def law_value(law, r):
    """Evaluate an encoded law at a scalar."""
    if r <= 0.0:
        return 0.0
    if law[0] == LAW_RATIONAL:
        return law[1] * r * r / (r * r + law[2] * law[2])
    m = int(law[1])
    r = min(max(r, law[2]), law[3])
    x = law[4:5 + m]
    i = np.searchsorted(x, r, side="right") - 1
    i = min(max(i, 0), m - 1)
    d = r - x[i]
    c = law[5 + m + 4 * i:9 + m + 4 * i]
    # same summation order as scipy's PPoly evaluation
    res = c[3]
    z = d
    res += c[2] * z
    z *= d
    res += c[1] * z
    z *= d
    res += c[0] * z
    return res


@njit(cache=True)
def fluxes(lag0, lagN, s, s_t, h_val, mode, pp, beta, phi):
    """Left inflow ``beta(h - H u0)`` and right outflow for the given mode."""
    flux_left = law_value(beta, h_val - pp[2] * lag0)
    if mode == MONOLITHIC:
        flux_right = lagN * s_t
    else:
        sig = max(lagN, pp[4])
        flux_right = pp[1] * sig * (sig - law_value(phi, s))
    return flux_left, flux_right


@njit(cache=True)
def advection(u, s, s_t, pp, out):
    """``y s_t/(s-a) u_y`` at interior nodes; returns the number of upwinded nodes."""
    N = u.size - 1
    dy = 1.0 / N
    span = s - pp[0]
    D = pp[3] / (span * span)
    out[0] = 0.0
    out[N] = 0.0
    n_up = 0
    for i in range(1, N):
        if s_t == 0.0:
            out[i] = 0.0
            continue
        speed = (i / N) * s_t / span
        if abs(speed) * dy / (2.0 * D) > 1.0:
            n_up += 1
            # transport u_t = A u_y carries information towards -A
            if s_t > 0:
                grad = (u[i + 1] - u[i]) / dy
            else:
                grad = (u[i] - u[i - 1]) / dy
        else:
            grad = (u[i + 1] - u[i - 1]) / (2.0 * dy)
        out[i] = speed * grad
    return n_up


@njit(cache=True)
def assemble(u_old, lag, s, s_t, h_val, dt, mode, pp, beta, phi, lower, diag, upper, rhs):
    """Fill the backward-Euler tridiagonal system; returns both lagged fluxes."""
    N = u_old.size - 1
    dy = 1.0 / N
    span = s - pp[0]
    D = pp[3] / (span * span)
    r = dt * D / (dy * dy)
    advection(lag, s, s_t, pp, rhs)
    for i in range(1, N):
        lower[i] = -r
        diag[i] = 1.0 + 2.0 * r
        upper[i] = -r
        rhs[i] = u_old[i] + dt * rhs[i]
    flux_left, flux_right = fluxes(lag[0], lag[N], s, s_t, h_val, mode, pp, beta, phi)
    # ghost values eliminated with centred differences at both ends
    c = 2.0 * D / (dy * dy)
    lower[0] = 0.0
    diag[0] = 1.0 + dt * c
    upper[0] = -dt * c
    rhs[0] = u_old[0] + dt * (2.0 * flux_left / (span * dy))
    speed_end = s_t / span
    source = -2.0 * flux_right / (span * dy) - speed_end * span * flux_right / pp[3]
    lower[N] = -dt * c
    diag[N] = 1.0 + dt * c
    upper[N] = 0.0
    rhs[N] = u_old[N] + dt * source
    return flux_left, flux_right


@njit(cache=True)
def thomas(lower, diag, upper, rhs, out):
    """Tridiagonal solve without pivoting (the systems here are diagonally dominant)."""
    n = diag.size
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / m
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]


@njit(cache=True)
def picard(u_old, s, s_t, h_val, dt, mode, tol, max_iter, pp, beta, phi, out):
    """Lagged boundary iteration for one step.

    Returns ``(iterations, last_change)``; iterations is negative when the
    loop stalled or produced a non-finite iterate.
    """
    n = u_old.size
    lower = np.empty(n)
    diag = np.empty(n)
    upper = np.empty(n)
    rhs = np.empty(n)
    lag = u_old.copy()
    change = np.inf
    for it in range(1, max_iter + 1):
        assemble(u_old, lag, s, s_t, h_val, dt, mode, pp, beta, phi, lower, diag, upper, rhs)
        thomas(lower, diag, upper, rhs, out)
        change = 0.0
        for i in range(n):
            d = abs(out[i] - lag[i])
            if not d <= change:
                change = d
        if not np.isfinite(change):
            return -it, change
        if change < tol:
            return it, change
        lag[:] = out
    return -max_iter, change


@njit(cache=True)
def march_monolithic(dt, tol, max_iter, delta, pp, beta, phi, ht, hv, U, S, ST, ITS):
    """Coupled march. ``U[0]`` and ``S[0]`` hold the initial state on entry.

    Returns ``(status, step, info)`` where ``step`` is the failing step index
    and ``info`` the offending gap or Picard change.
    """
    steps = S.size - 1
    a, a0 = pp[0], pp[1]
    for n in range(steps):
        s_t = a0 * (U[n, -1] - law_value(phi, S[n]))
        s_new = S[n] + dt * s_t
        if not s_new - a >= delta:
            return DEGENERATE, n, s_new - a
        h_val = np.interp(dt * (n + 1), ht, hv)
        its, change = picard(U[n], s_new, s_t, h_val, dt, MONOLITHIC, tol, max_iter,
                             pp, beta, phi, U[n + 1])
        if its < 0:
            return STALLED, n, change
        S[n + 1] = s_new
        ST[n] = s_t
        ITS[n + 1] = its
    ST[steps] = a0 * (U[steps, -1] - law_value(phi, S[steps]))
    return OK, steps, 0.0


@njit(cache=True)
def march_ap(dt, tol, max_iter, pp, beta, phi, ht, hv, t, S, ST, U, ITS):
    """Auxiliary-problem march for a frozen front path; ``U[0]`` is the initial field."""
    for n in range(t.size - 1):
        h_val = np.interp(t[n + 1], ht, hv)
        its, change = picard(U[n], S[n + 1], ST[n], h_val, dt, AP, tol, max_iter,
                             pp, beta, phi, U[n + 1])
        if its < 0:
            return STALLED, n, change
        ITS[n + 1] = its
    return OK, t.size - 1, 0.0

"""Compiled inner loops shared by the integrators.

Systems are stored as polynomial terms so a single set of kernels serves every
model: term ``k`` adds ``coef[k] * prod_j x[j]**exps[k, j]`` to component
``comp[k]``.  The linear part ``p * (B @ x)`` is evaluated separately and added
last, so the right-hand side is literally ``g(x) + p*B*x``.
"""
import math

import numpy as np
from numba import njit

OK = 0
NONFINITE = 1
ESCAPED = 2


@njit(cache=True, nogil=True)
def poly_eval(x, comp, coef, exps, out):
    n = x.shape[0]
    for i in range(n):
        out[i] = 0.0
    for k in range(coef.shape[0]):
        term = coef[k]
        for j in range(n):
            e = exps[k, j]
            for _ in range(e):
                term *= x[j]
        out[comp[k]] += term


@njit(cache=True, nogil=True)
def rhs_into(x, p, comp, coef, exps, B, gx, out):
    n = x.shape[0]
    poly_eval(x, comp, coef, exps, gx)
    for i in range(n):
        bx = 0.0
        for j in range(n):
            bx += B[i, j] * x[j]
        out[i] = gx[i] + p * bx


@njit(cache=True, nogil=True)
def _step(x, p, h, comp, coef, exps, B, k1, k2, k3, k4, tmp, gx, xn):
    n = x.shape[0]
    rhs_into(x, p, comp, coef, exps, B, gx, k1)
    for i in range(n):
        tmp[i] = x[i] + 0.5 * h * k1[i]
    rhs_into(tmp, p, comp, coef, exps, B, gx, k2)
    for i in range(n):
        tmp[i] = x[i] + 0.5 * h * k2[i]
    rhs_into(tmp, p, comp, coef, exps, B, gx, k3)
    for i in range(n):
        tmp[i] = x[i] + h * k3[i]
    rhs_into(tmp, p, comp, coef, exps, B, gx, k4)
    for i in range(n):
        xn[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True, nogil=True)
def _check(x, radius):
    s = 0.0
    for i in range(x.shape[0]):
        if not math.isfinite(x[i]):
            return NONFINITE
        s += x[i] * x[i]
    if math.sqrt(s) > radius:
        return ESCAPED
    return OK


@njit(cache=True, nogil=True)
def rk4_run(comp, coef, exps, B, params, h, radius, out):
    """Integrate ``len(params)`` steps into ``out`` (row 0 holds x0).

    Returns ``(status, steps_done)``; on failure rows ``0..steps_done`` are
    valid and step index ``steps_done`` produced the bad state.
    """
    n = out.shape[1]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    gx = np.empty(n)
    xn = np.empty(n)
    x = out[0].copy()
    for s in range(params.shape[0]):
        _step(x, params[s], h, comp, coef, exps, B, k1, k2, k3, k4, tmp, gx, xn)
        status = _check(xn, radius)
        if status != OK:
            return status, s
        for i in range(n):
            x[i] = xn[i]
            out[s + 1, i] = xn[i]
    return OK, params.shape[0]


@njit(cache=True, nogil=True)
def lyapunov_run(comp, coef, exps, B, params, h, radius, x0, d0, renorm, skip):
    """Largest Lyapunov exponent by shadow-trajectory renormalisation.

    The shadow starts ``d0`` away along the diagonal and is pulled back to
    distance ``d0`` every ``renorm`` steps.  The first ``skip`` renormalisations
    only align the offset and are not accumulated.
    Returns ``(status, exponent, renormalisations_used)``.
    """
    n = x0.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    gx = np.empty(n)
    xn = np.empty(n)
    x = x0.copy()
    y = x0.copy()
    for i in range(n):
        y[i] += d0 / math.sqrt(n)
    total = 0.0
    count = 0
    seen = 0
    for s in range(params.shape[0]):
        p = params[s]
        _step(x, p, h, comp, coef, exps, B, k1, k2, k3, k4, tmp, gx, xn)
        if _check(xn, radius) != OK:
            return ESCAPED, 0.0, count
        for i in range(n):
            x[i] = xn[i]
        _step(y, p, h, comp, coef, exps, B, k1, k2, k3, k4, tmp, gx, xn)
        if _check(xn, radius) != OK:
            return ESCAPED, 0.0, count
        for i in range(n):
            y[i] = xn[i]
        if (s + 1) % renorm == 0:
            d = 0.0
            for i in range(n):
                d += (y[i] - x[i]) ** 2
            d = math.sqrt(d)
            if d == 0.0:
                d = 1e-300
            seen += 1
            if seen > skip:
                total += math.log(d / d0)
                count += 1
            for i in range(n):
                y[i] = x[i] + (y[i] - x[i]) * (d0 / d)
    if count == 0:
        return OK, 0.0, 0
    return OK, total / (count * renorm * h), count

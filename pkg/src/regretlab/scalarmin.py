"""Deterministic scalar minimization and quadrature helpers.

All bound evaluators in this package reduce their tuning-parameter infima
to one-dimensional searches on a logarithmic axis.  Objectives are allowed
to return ``math.inf`` (infeasible branches are simply never selected).
"""

from __future__ import annotations

import math
from typing import Callable

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


def golden_section(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-8,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Minimize ``fn`` on [lo, hi] by golden-section search.

    Returns ``(argmin, min)``.  ``fn`` may return +inf; the search still
    converges to the boundary of the finite region when the minimum sits
    against an infinite branch.
    """
    if hi < lo:
        lo, hi = hi, lo
    a, b = lo, hi
    h = b - a
    if h <= rel_tol * max(1.0, abs(a), abs(b)):
        mid = 0.5 * (a + b)
        return mid, fn(mid)
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if h <= rel_tol * max(1.0, abs(a), abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = fn(d)
    if fc <= fd:
        return c, fc
    return d, fd


def minimize_log_axis(
    fn: Callable[[float], float],
    log_lo: float = -30.0,
    log_hi: float = 30.0,
    coarse: int = 241,
    rel_tol: float = 1e-8,
) -> tuple[float, float]:
    """Minimize ``fn`` over positive arguments x = exp(u), u in [log_lo, log_hi].

    A coarse grid on the log axis brackets the minimum (robust to +inf
    plateaus and boundary minima); golden-section search then refines the
    bracketing interval.  Returns ``(argmin_x, min_value)``.
    """
    if coarse < 3:
        coarse = 3
    step = (log_hi - log_lo) / (coarse - 1)
    us = [log_lo + i * step for i in range(coarse)]
    vals = [fn(math.exp(u)) for u in us]
    best_i = min(range(coarse), key=lambda i: (vals[i], i))
    if math.isinf(vals[best_i]):
        return math.exp(us[best_i]), vals[best_i]
    a = us[max(best_i - 1, 0)]
    b = us[min(best_i + 1, coarse - 1)]
    u_star, v_star = golden_section(lambda u: fn(math.exp(u)), a, b, rel_tol=rel_tol)
    # The coarse grid point may still beat the refined one on plateaus.
    if vals[best_i] < v_star:
        return math.exp(us[best_i]), vals[best_i]
    return math.exp(u_star), v_star


def adaptive_simpson(
    fn: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-8,
    max_depth: int = 40,
) -> float:
    """Adaptive Simpson quadrature of ``fn`` over [a, b].

    Tolerance is relative to the running integral estimate, with a small
    absolute floor so that near-zero integrals terminate.
    """
    if b <= a:
        return 0.0

    def simpson(x0: float, x2: float, f0: float, f1: float, f2: float) -> float:
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(
        x0: float,
        x2: float,
        f0: float,
        f1: float,
        f2: float,
        whole: float,
        eps: float,
        depth: int,
    ) -> float:
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl, fr = fn(xl), fn(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        half = max(eps / 2.0, 1e-300)
        return recurse(x0, xm, f0, fl, f1, left, half, depth + 1) + recurse(
            xm, x2, f1, fr, f2, right, half, depth + 1
        )

    f0, f2 = fn(a), fn(b)
    fm = fn(0.5 * (a + b))
    whole = simpson(a, b, f0, fm, f2)
    eps = max(abs(whole) * rel_tol, 1e-12)
    return recurse(a, b, f0, fm, f2, whole, eps, 0)

"""
Numerical kernels shared by the metric, path and reparametrisation layers.

- adaptive_simpson: recursive Simpson with Richardson correction
- monotone_interp_invert: leftmost-bracket linear inversion of a sampled monotone map
- solve_monotone: safeguarded Newton/bisection root finding for increasing maps
- golden_section: derivative-free 1-D minimisation
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from app.core.config import QuadConfig
from app.core.errors import OutOfRange, QuadratureNonConvergence

ScalarFunction = Callable[[float], float]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1 / phi
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0  # 1 / phi^2


# =====================================================
# QUADRATURE
# =====================================================
def adaptive_simpson(f: ScalarFunction, a: float, b: float, cfg: Optional[QuadConfig] = None) -> float:
    """
    Integrate f over [a, b] to absolute tolerance cfg.tol.

    Raises QuadratureNonConvergence when an interval still misses its
    (halved) tolerance at cfg.max_depth.
    """
    cfg = cfg or QuadConfig()
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, cfg)

    def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def _adaptive(lo: float, hi: float, flo: float, fmid: float, fhi: float,
                  whole: float, tol: float, depth: int) -> float:
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm)
        frm = f(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        if depth >= cfg.max_depth:
            raise QuadratureNonConvergence(lo, hi, depth)
        return (
            _adaptive(lo, mid, flo, flm, fmid, left, tol / 2.0, depth + 1)
            + _adaptive(mid, hi, fmid, frm, fhi, right, tol / 2.0, depth + 1)
        )

    fa = f(a)
    fb = f(b)
    fm = f(0.5 * (a + b))
    whole = _simpson(fa, fm, fb, b - a)
    return _adaptive(a, b, fa, fm, fb, whole, cfg.tol, 0)


# =====================================================
# MONOTONE INVERSION
# =====================================================
def monotone_interp_invert(grid: Sequence[float], values: Sequence[float], s: float) -> float:
    """
    Invert a sampled non-decreasing map by binary search + linear interpolation.

    On ties the leftmost parameter whose value reaches s is returned.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if s < values[0] or s > values[-1]:
        raise OutOfRange(f"{s} outside [{values[0]}, {values[-1]}]")
    i = int(np.searchsorted(values, s, side="left"))
    if values[i] == s:
        return float(grid[i])
    v0, v1 = values[i - 1], values[i]
    t0, t1 = grid[i - 1], grid[i]
    return float(t0 + (s - v0) * (t1 - t0) / (v1 - v0))


def solve_monotone(
    f: ScalarFunction,
    fprime: ScalarFunction,
    target: float,
    lo: float,
    hi: float,
    x0: float,
    tol: float,
    max_iter: int = 100,
) -> float:
    """
    Find x in [lo, hi] with |f(x) - target| <= tol for a non-decreasing f.

    Newton steps are taken while they stay inside the current bracket;
    otherwise the bracket is bisected.
    """
    x = min(max(x0, lo), hi)
    for _ in range(max_iter):
        fx = f(x) - target
        if abs(fx) <= tol:
            return x
        if fx > 0:
            hi = x
        else:
            lo = x
        slope = fprime(x)
        candidate = x - fx / slope if slope > 0 else math.nan
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
        if candidate == x or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            return candidate
        x = candidate
    return x


# =====================================================
# GOLDEN SECTION
# =====================================================
def golden_section(f: ScalarFunction, a: float, b: float, tol: float = 1e-6) -> Tuple[float, float]:
    """
    Golden-section search for a minimum of f on [a, b].

    Returns (x, f(x)) for the best point evaluated.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
    if yc < yd:
        return c, yc
    return d, yd

"""Bracketed scalar root finding: bisection followed by safeguarded Newton."""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .errors import NoBracketError

BISECTION_WIDTH = 1e-6
RESIDUAL_TOL = 1e-13


def find_root(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    dg: Optional[Callable[[float], float]] = None,
    *,
    residual_tol: float = RESIDUAL_TOL,
    xtol: float = 4 * np.finfo(float).eps,
    max_iter: int = 200,
) -> float:
    """Root of ``g`` in ``[lo, hi]`` where ``g`` changes sign.

    Bisects until the bracket is narrower than ``BISECTION_WIDTH``, then
    takes Newton steps with ``dg`` and falls back to bisection whenever a
    step would leave the current bracket or fails to halve the residual.
    Without ``dg`` the refinement is plain bisection.
    """
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if math.copysign(1.0, glo) == math.copysign(1.0, ghi):
        raise NoBracketError(f"no sign change on [{lo}, {hi}]: g={glo:.3e}, {ghi:.3e}")

    for _ in range(max_iter):
        if hi - lo <= BISECTION_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm

    x = 0.5 * (lo + hi)
    gx = g(x)
    for _ in range(max_iter):
        if abs(gx) <= residual_tol or hi - lo <= xtol * max(1.0, abs(x)):
            return x
        step_ok = False
        if dg is not None:
            d = dg(x)
            if d != 0 and math.isfinite(d):
                cand = x - gx / d
                if lo < cand < hi:
                    gc = g(cand)
                    if abs(gc) <= 0.5 * abs(gx):
                        step_ok = True
        if not step_ok:
            cand = 0.5 * (lo + hi)
            gc = g(cand)
        if gc == 0:
            return cand
        # keep the bracket valid around the new point
        if (gc < 0) == (glo < 0):
            lo, glo = cand, gc
        else:
            hi, ghi = cand, gc
        x, gx = cand, gc
    return x


def bracket_roots(g: Callable, lo: float, hi: float, points: int) -> list[tuple[float, float]]:
    """Subintervals of a uniform grid on ``[lo, hi]`` where ``g`` changes sign."""
    grid = np.linspace(lo, hi, points)
    vals = np.asarray(g(grid), dtype=float)
    nz = np.flatnonzero(vals != 0)
    out = []
    for a, b in zip(nz[:-1], nz[1:]):
        if np.sign(vals[a]) != np.sign(vals[b]):
            out.append((float(grid[a]), float(grid[b])))
    return out

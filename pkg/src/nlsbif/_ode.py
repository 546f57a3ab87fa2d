"""Adaptive Dormand-Prince 8(5,3) integration across the support of V.

Steps never straddle a breakpoint of the potential: the interval is cut at
every interior break and each piece is integrated separately.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .config import tolerances
from .errors import IntegrationFailure


def _pieces(x_from, x_to, breaks):
    lo, hi = min(x_from, x_to), max(x_from, x_to)
    cuts = sorted(b for b in breaks if lo < b < hi)
    if x_to < x_from:
        cuts.reverse()
    nodes = [x_from, *cuts, x_to]
    return [(a, b) for a, b in zip(nodes[:-1], nodes[1:]) if a != b]


def integrate(rhs, y0, x_from, x_to, breaks=(), x_eval=None, rtol=None, atol=None):
    """Integrate ``y' = rhs(x, y)`` from ``x_from`` to ``x_to``.

    Returns ``(y_end, xs, ys)``. ``xs``/``ys`` hold the solution at the points
    of ``x_eval`` lying in the interval, or at the accepted steps when
    ``x_eval`` is None, ordered in the direction of integration.
    """
    tol = tolerances()
    rtol = tol.rtol if rtol is None else rtol
    atol = tol.atol if atol is None else atol
    y = np.asarray(y0)
    xs, ys = [np.array([float(x_from)])], [y[:, None]]
    want = None if x_eval is None else np.unique(np.asarray(x_eval, dtype=float))
    for a, b in _pieces(x_from, x_to, breaks):
        t_eval = None
        if want is not None:
            lo, hi = min(a, b), max(a, b)
            inner = want[(want > lo) & (want < hi)]
            t_eval = np.append(inner if b > a else inner[::-1], b)
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval)
        if sol.status != 0:
            last = float(sol.t[-1]) if sol.t.size else a
            raise IntegrationFailure(f"integration stalled: {sol.message}", last_x=last)
        xs.append(sol.t)
        ys.append(sol.y)
        y = sol.y[:, -1]
    x_all = np.concatenate(xs)
    y_all = np.concatenate(ys, axis=1)
    # drop duplicates at piece joins
    keep = np.ones(x_all.size, dtype=bool)
    keep[1:] = np.diff(x_all) != 0
    x_all, y_all = x_all[keep], y_all[:, keep]
    if want is not None:
        mask = np.isin(x_all, want)
        x_all, y_all = x_all[mask], y_all[:, mask]
    return y, x_all, y_all

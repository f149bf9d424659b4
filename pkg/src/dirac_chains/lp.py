"""Small dense two-phase simplex solver.

Solves  min c.x  subject to  A x = b,  x >= 0.  Instances here are desk
scale (hundreds of rows, a few thousand columns), so a full tableau with
numpy row operations is adequate.  Dantzig pricing is used until a run of
degenerate pivots appears, after which Bland's rule takes over to rule
out cycling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, LPError


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    nit: int
    basis: list[int]


def _pivot(t: np.ndarray, row: int, col: int):
    t[row] /= t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0.0
    t -= np.outer(factor, t[row])


def _run(t, basis, ncols, tol, max_iter, nit):
    """Simplex iterations on tableau ``t`` whose last row holds reduced costs."""
    degenerate_run = 0
    while True:
        if nit >= max_iter:
            raise LPError(f"simplex iteration cap {max_iter} reached")
        costs = t[-1, :ncols]
        candidates = np.flatnonzero(costs < -tol)
        if candidates.size == 0:
            return nit
        if degenerate_run > 50:
            col = int(candidates[0])
        else:
            col = int(candidates[np.argmin(costs[candidates])])
        column = t[:-1, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise LPError("linear program is unbounded")
        ratios = t[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        degenerate_run = degenerate_run + 1 if best <= tol else 0
        _pivot(t, row, col)
        basis[row] = col
        nit += 1


def simplex(c, a_eq, b_eq, tol: float = 1e-10, max_iter: int = 100_000) -> LPResult:
    """Minimize ``c @ x`` subject to ``a_eq @ x == b_eq`` and ``x >= 0``.

    Raises:
        InfeasibleError: if no feasible point exists.
        LPError: if the problem is unbounded or the iteration cap is hit.
    """
    c = np.asarray(c, dtype=float)
    a = np.array(a_eq, dtype=float).reshape(-1, c.shape[0])
    b = np.array(b_eq, dtype=float).reshape(-1)
    m, n = a.shape
    if m == 0:
        if np.any(c < -tol):
            raise LPError("linear program is unbounded")
        return LPResult(np.zeros(n), 0.0, 0, [])

    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    flip = b < 0
    a[flip] *= -1
    b[flip] *= -1

    # phase one: artificial variables n .. n+m-1 form the initial basis
    t = np.zeros((m + 1, n + m + 1))
    t[:m, :n] = a
    t[:m, n:n + m] = np.eye(m)
    t[:m, -1] = b
    t[-1, :n] = -a.sum(axis=0)
    t[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    nit = _run(t, basis, n + m, tol, max_iter, 0)
    if -t[-1, -1] > tol * scale * max(1, m):
        raise InfeasibleError(f"linear program is infeasible (phase-one residual {-t[-1, -1]:.3e})")

    # drive artificial variables out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            cols = np.flatnonzero(np.abs(t[r, :n]) > tol * scale)
            if cols.size:
                _pivot(t, r, int(cols[0]))
                basis[r] = int(cols[0])
                keep.append(r)
        else:
            keep.append(r)
    t = np.vstack([t[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]

    # phase two: reduced costs of the real objective
    t[-1, :n] = c
    for r, j in enumerate(basis):
        t[-1] -= c[j] * t[r]
    nit = _run(t, basis, n, tol, max_iter, nit)

    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = t[r, -1]
    x[x < 0] = 0.0
    return LPResult(x, float(c @ x), nit, basis)


def l1_min(costs, g, target, tol: float = 1e-10) -> LPResult:
    """Minimize sum_j costs_j |y_j| subject to g @ y == target.

    Encoded with y = y_plus - y_minus.  The returned ``x`` is y itself.
    """
    costs = np.asarray(costs, dtype=float)
    g = np.asarray(g, dtype=float)
    res = simplex(np.concatenate([costs, costs]), np.hstack([g, -g]), target, tol=tol)
    k = costs.shape[0]
    y = res.x[:k] - res.x[k:]
    return LPResult(y, float(costs @ np.abs(y)), res.nit, res.basis)

"""Dense two-phase simplex with Bland's anti-cycling rule.

Solves ``min c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``x >= 0``.  Sizes in this package stay below a few thousand entries per
side, so a full tableau is simplest.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8


class LPError(RuntimeError):
    """Numerical trouble: the solver refuses to return a verdict."""


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray | None = None
    fun: float | None = None
    ray: np.ndarray | None = None  # for "unbounded": feasible direction with c.ray < 0
    iterations: int = 0


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int]):
        self.T = T
        self.basis = basis
        self.iterations = 0

    def pivot(self, r: int, col: int) -> None:
        T = self.T
        T[r] /= T[r, col]
        col_vals = T[:, col].copy()
        col_vals[r] = 0.0
        nz = np.nonzero(np.abs(col_vals) > 0)[0]
        T[nz] -= np.outer(col_vals[nz], T[r])
        self.basis[r] = col
        self.iterations += 1

    def run(self, allowed: np.ndarray, max_iter: int):
        """Iterate on the objective stored in the last row; returns None or an unbounded column."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.iterations > max_iter:
                raise LPError("simplex iteration limit reached")
            red = T[-1, :-1]
            cand = np.nonzero((red < -PIVOT_TOL) & allowed)[0]
            if len(cand) == 0:
                return None
            col = int(cand[0])  # Bland: lowest index enters
            colv = T[:m, col]
            pos = np.nonzero(colv > PIVOT_TOL)[0]
            if len(pos) == 0:
                return col
            ratios = T[pos, -1] / colv[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))  # Bland: lowest basic index leaves
            self.pivot(r, col)


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 50000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    if A_ub.shape[0] != b_ub.size or A_eq.shape[0] != b_eq.size:
        raise ValueError("constraint matrix and right-hand side sizes differ")
    if not (np.all(np.isfinite(A_ub)) and np.all(np.isfinite(A_eq)) and np.all(np.isfinite(c))):
        raise ValueError("non-finite LP data")

    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me
    # standard form: [A_ub I; A_eq 0] [x; s] = b, with rows flipped so b >= 0
    A = np.zeros((m, n + mu))
    A[:mu, :n] = A_ub
    A[:mu, n:] = np.eye(mu)
    A[mu:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    nv = n + mu

    # phase 1 with one artificial per row
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :nv] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    tab = _Tableau(T, list(range(nv, nv + m)))
    allowed = np.ones(nv + m, dtype=bool)
    if tab.run(allowed, max_iter) is not None:
        raise LPError("phase 1 reported an unbounded objective")
    if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
        return LPResult("infeasible", iterations=tab.iterations)

    # drive artificials out of the basis; drop redundant rows
    keep_rows = []
    for r in range(m):
        if tab.basis[r] >= nv:
            cols = np.nonzero(np.abs(T[r, :nv]) > PIVOT_TOL)[0]
            if len(cols):
                tab.pivot(r, int(cols[0]))
                keep_rows.append(r)
        else:
            keep_rows.append(r)
    T2 = np.zeros((len(keep_rows) + 1, nv + 1))
    T2[:-1, :nv] = T[keep_rows, :nv]
    T2[:-1, -1] = T[keep_rows, -1]
    basis = [tab.basis[r] for r in keep_rows]
    cost = np.concatenate([c, np.zeros(mu)])
    T2[-1, :nv] = cost
    T2[-1, -1] = 0.0
    for r, bv in enumerate(basis):
        if cost[bv] != 0.0:
            T2[-1] -= cost[bv] * T2[r]
    tab2 = _Tableau(T2, basis)
    tab2.iterations = tab.iterations
    col = tab2.run(np.ones(nv, dtype=bool), max_iter)
    x = np.zeros(nv)
    for r, bv in enumerate(tab2.basis):
        x[bv] = T2[r, -1]
    if col is not None:
        d = np.zeros(nv)
        d[col] = 1.0
        for r, bv in enumerate(tab2.basis):
            d[bv] = -T2[r, col]
        return LPResult("unbounded", x=x[:n], ray=d[:n], iterations=tab2.iterations)
    xs = x[:n]
    # guard against drift: the returned point must satisfy the constraints
    viol = max(np.max(A_ub @ xs - b_ub, initial=0.0), np.max(np.abs(A_eq @ xs - b_eq), initial=0.0),
               -xs.min(initial=0.0))
    if viol > 1e-6 * max(1.0, np.abs(b).max(initial=0.0)):
        raise LPError(f"simplex solution violates constraints by {viol:.3g}")
    return LPResult("optimal", x=xs, fun=float(c @ xs), iterations=tab2.iterations)

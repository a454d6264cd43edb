"""Dense two-phase tableau simplex.

Maximizes ``c @ x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and
``x >= lower``. Columns enter by largest reduced cost, and ratio-test ties
leave by largest pivot element. After a long run of
degenerate pivots the solver switches to Bland's rule (smallest index for
both entering and leaving) until the objective moves again, which rules out
cycling. Bland alone is correct but far slower on the long degenerate
stretches of the oracle programs, so it is only a fallback.

Pivots only touch rows with a nonzero in the pivot column, which keeps the
cost per iteration proportional to the tableau's fill-in rather than its
full size.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, SolverError

# Column entries at or below this (relative to the column's largest entry)
# are treated as zero in the ratio test.
PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
# Entries below this magnitude are flushed to zero after each pivot.
DROP_TOL = 1e-14
# Pivots smaller than this trigger a refactorization before they are taken.
SMALL_PIVOT = 1e-7
# Consecutive degenerate pivots (at least this many, or one per row) before
# switching to Bland's rule.
STALL_LIMIT = 100


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _as_matrix(a, n, name):
    if a is None:
        return np.zeros((0, n))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return a.reshape(0, n)
    if a.ndim != 2 or a.shape[1] != n:
        raise DimensionError(f"{name} must have {n} columns, got shape {a.shape}")
    return a


def _as_vector(b, m, name):
    if b is None:
        b = np.zeros(0)
    b = np.asarray(b, dtype=float).ravel()
    if b.shape != (m,):
        raise DimensionError(f"{name} must have length {m}, got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise DimensionError(f"{name} must be finite")
    return b


@dataclass
class LinearProgram:
    objective: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        if n == 0:
            raise DimensionError("program has no variables")
        if not np.all(np.isfinite(self.objective)):
            raise DimensionError("objective must be finite")
        self.A_eq = _as_matrix(self.A_eq, n, "A_eq")
        self.b_eq = _as_vector(self.b_eq, self.A_eq.shape[0], "b_eq")
        self.A_ub = _as_matrix(self.A_ub, n, "A_ub")
        self.b_ub = _as_vector(self.b_ub, self.A_ub.shape[0], "b_ub")
        self.lower = np.zeros(n) if self.lower is None else _as_vector(self.lower, n, "lower")

    @property
    def n(self) -> int:
        return self.objective.size

    def permuted(self, col_perm, eq_perm=None, ub_perm=None) -> "LinearProgram":
        """Same program with variables and rows reordered."""
        col_perm = np.asarray(col_perm)
        eq_perm = np.arange(self.A_eq.shape[0]) if eq_perm is None else np.asarray(eq_perm)
        ub_perm = np.arange(self.A_ub.shape[0]) if ub_perm is None else np.asarray(ub_perm)
        return LinearProgram(
            self.objective[col_perm],
            self.A_eq[np.ix_(eq_perm, col_perm)], self.b_eq[eq_perm],
            self.A_ub[np.ix_(ub_perm, col_perm)], self.b_ub[ub_perm],
            self.lower[col_perm],
        )


@dataclass
class ResidualReport:
    max_eq_residual: float = 0.0
    max_ineq_violation: float = 0.0
    max_bound_violation: float = 0.0
    objective_delta: float = 0.0

    @property
    def max_residual(self) -> float:
        return max(self.max_eq_residual, self.max_ineq_violation, self.max_bound_violation)

    def ok(self, tol: float = FEAS_TOL) -> bool:
        return self.max_residual <= tol


@dataclass
class LpSolution:
    status: Status
    x: Optional[np.ndarray] = None
    objective_value: float = math.nan
    certificate: Optional[ResidualReport] = None
    iterations: int = 0


def certify(lp: LinearProgram, sol: LpSolution) -> ResidualReport:
    """Recompute every residual of ``sol`` with compensated summation."""
    x = sol.x

    def rows(A, b):
        prod = A * x
        out = []
        for i in range(A.shape[0]):
            terms = prod[i][prod[i] != 0.0].tolist()
            terms.append(-b[i])
            out.append(math.fsum(terms))
        return out

    eq = rows(lp.A_eq, lp.b_eq)
    ub = rows(lp.A_ub, lp.b_ub)
    value = math.fsum(lp.objective * x)
    return ResidualReport(
        max_eq_residual=max((abs(r) for r in eq), default=0.0),
        max_ineq_violation=max((max(r, 0.0) for r in ub), default=0.0),
        max_bound_violation=float(max(np.max(lp.lower - x, initial=0.0), 0.0)),
        objective_delta=abs(value - sol.objective_value),
    )


class _Tableau:
    """Constraint rows, then the phase-2 and phase-1 reduced-cost rows.

    Objective rows hold reduced costs and, in the last column, minus the
    current objective value. ``A``, ``b`` and ``costs`` keep the original
    standard-form data so the tableau can be rebuilt from the current basis
    whenever rounding error has had a chance to build up.
    """

    def __init__(self, A, b, costs, basis):
        self.A = A
        self.b = b
        self.costs = costs
        self.basis = basis
        self.iterations = 0
        self.refactors = 0
        self._work = 0.0
        self._fresh = True
        m, N = A.shape
        self.T = np.zeros((m + 2, N + 1))
        self.T[:m, :N] = A
        self.T[:m, -1] = b
        self._objective_rows()

    @property
    def m(self):
        return self.T.shape[0] - 2

    def _objective_rows(self):
        T = self.T
        m = self.m
        for i, c in enumerate(self.costs):
            cb = c[self.basis]
            T[m + i, :-1] = c - cb @ T[:m, :-1]
            T[m + i, -1] = -(cb @ T[:m, -1])
            T[m + i, self.basis] = 0.0

    def refactor(self):
        """Recompute every row as B^-1 [A | b] for the current basis B."""
        m, N = self.A.shape
        try:
            rows = np.linalg.solve(self.A[:, self.basis], np.column_stack([self.A, self.b]))
        except np.linalg.LinAlgError as exc:
            raise SolverError("basis became singular") from exc
        rows[np.abs(rows) < DROP_TOL] = 0.0
        rows[:, self.basis] = np.eye(m)
        self.T[:m] = rows
        self._objective_rows()
        self.refactors += 1
        self._work = 0.0
        self._fresh = True

    def _refactor_cost(self):
        m, N = self.A.shape
        return float(m) * m * (N + m)

    def pivot(self, r, col):
        T = self.T
        prow = T[r] / T[r, col]
        prow[np.abs(prow) < DROP_TOL] = 0.0
        prow[col] = 1.0
        colv = T[:, col].copy()
        colv[r] = 0.0
        nz = np.flatnonzero(colv)
        if nz.size:
            pc = np.flatnonzero(prow)
            if pc.size * 3 < prow.size:
                block = T[np.ix_(nz, pc)] - np.outer(colv[nz], prow[pc])
                block[np.abs(block) < DROP_TOL] = 0.0
                T[np.ix_(nz, pc)] = block
                self._work += nz.size * pc.size
            else:
                block = T[nz] - np.outer(colv[nz], prow)
                block[np.abs(block) < DROP_TOL] = 0.0
                T[nz] = block
                self._work += nz.size * prow.size
            T[nz, col] = 0.0
        T[r] = prow
        self.basis[r] = col
        self.iterations += 1
        self._fresh = False

    def _choose_row(self, col, bland=False):
        m = self.m
        column = self.T[:m, col]
        rows = np.flatnonzero(column > PIVOT_TOL * max(1.0, float(np.abs(column).max())))
        if rows.size == 0:
            return None
        rhs = np.maximum(self.T[rows, -1], 0.0)
        ratios = rhs / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        if bland:
            return int(ties[np.argmin(self.basis[ties])])
        # Largest pivot among ties; far fewer degenerate steps than Bland.
        return int(ties[np.argmax(column[ties])])

    def run(self, obj_row, n_cols, max_iter):
        """Simplex on columns ``< n_cols``; returns False if unbounded."""
        stall = 0
        while True:
            if self.iterations >= max_iter:
                raise SolverError(f"simplex exceeded {max_iter} iterations")
            T = self.T
            drift = T[:self.m, -1].min(initial=0.0) < -FEAS_TOL
            if not self._fresh and (drift or self._work > self._refactor_cost()):
                self.refactor()
                continue
            cand = np.flatnonzero(T[obj_row, :n_cols] > FEAS_TOL)
            if cand.size == 0:
                if not self._fresh and self.iterations:
                    # Confirm optimality on freshly computed reduced costs.
                    self.refactor()
                    continue
                return True
            bland = stall >= max(STALL_LIMIT, self.m)
            col = int(cand[0]) if bland else int(cand[np.argmax(T[obj_row, cand])])
            r = self._choose_row(col, bland)
            if r is None:
                if not self._fresh:
                    self.refactor()
                    continue
                return False
            if abs(T[r, col]) < SMALL_PIVOT and not self._fresh:
                self.refactor()
                continue
            stall = stall + 1 if T[r, -1] <= FEAS_TOL else 0
            self.pivot(r, col)

    def drop_row(self, r):
        self.T = np.delete(self.T, r, axis=0)
        self.basis = np.delete(self.basis, r)
        self.A = np.delete(self.A, r, axis=0)
        self.b = np.delete(self.b, r)

    def drop_columns(self, start, stop):
        self.T = np.delete(self.T, np.s_[start:stop], axis=1)
        self.A = self.A[:, :start]
        self.costs = self.costs[:, :start]


def solve(lp: LinearProgram, max_iter: int = 100_000) -> LpSolution:
    n = lp.n
    lb = lp.lower
    A_eq = lp.A_eq.copy()
    b_eq = lp.b_eq - A_eq @ lb
    A_ub = lp.A_ub.copy()
    b_ub = lp.b_ub - A_ub @ lb
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m = m_eq + m_ub

    flip_eq = b_eq < 0
    A_eq[flip_eq] *= -1
    b_eq[flip_eq] *= -1
    flip_ub = b_ub < 0
    A_ub[flip_ub] *= -1
    b_ub[flip_ub] *= -1

    needs_art = np.concatenate([np.ones(m_eq, bool), flip_ub])
    n_art = int(needs_art.sum())
    n_real = n + m_ub
    N = n_real + n_art

    A = np.zeros((m, N))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq + np.arange(m_ub), n + np.arange(m_ub)] = np.where(flip_ub, -1.0, 1.0)
    art_rows = np.flatnonzero(needs_art)
    A[art_rows, n_real + np.arange(n_art)] = 1.0
    b = np.concatenate([b_eq, b_ub])
    basis = np.empty(m, dtype=int)
    basis[m_eq:] = n + np.arange(m_ub)
    basis[art_rows] = n_real + np.arange(n_art)

    costs = np.zeros((2, N))
    costs[0, :n] = lp.objective
    costs[1, n_real:] = -1.0
    tab = _Tableau(A, b, costs, basis)

    if n_art:
        tab.run(tab.m + 1, n_real, max_iter)
        infeas = tab.T[-1, -1]
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution(Status.INFEASIBLE, iterations=tab.iterations)
        # Drive remaining (zero-valued) artificials out of the basis; a row
        # with no eligible pivot is redundant.
        r = 0
        while r < tab.m:
            if tab.basis[r] >= n_real:
                cand = np.flatnonzero(np.abs(tab.T[r, :n_real]) > PIVOT_TOL)
                if cand.size:
                    tab.pivot(r, int(cand[np.argmax(np.abs(tab.T[r, cand]))]))
                else:
                    tab.drop_row(r)
                    continue
            r += 1
        tab.drop_columns(n_real, N)
    bounded = tab.run(tab.m, n_real, max_iter)
    if not bounded:
        return LpSolution(Status.UNBOUNDED, iterations=tab.iterations)

    y = np.zeros(n_real)
    y[tab.basis] = tab.T[:tab.m, -1]
    y = np.maximum(y, 0.0)
    x = lb + y[:n]
    sol = LpSolution(Status.OPTIMAL, x, math.fsum(lp.objective * x), iterations=tab.iterations)
    sol.certificate = certify(lp, sol)
    return sol

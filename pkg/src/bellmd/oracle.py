"""Independent ground truth for the closed forms.

The adversary is a finite mixture of hidden variables. Each hidden variable
``lambda`` carries an output strategy, a weight ``p(lambda)`` and a 3x3
conditional input table ``p(X_j, Y_k | lambda)`` confined to ``[S, P]``.
The observed input distribution must stay uniform (1/9 per cell).

For general input tables the optimum over such mixtures is a linear program
in the variables ``w_lambda = p(lambda)`` and
``q_{lambda,j,k} = p(lambda) p(X_j, Y_k | lambda)``. For factorizable tables
the program is bilinear and is attacked by alternating LPs.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import lp as lpmod
from .closedform import (
    TOL, UNIFORM, InputDistribution, MDParams, fake_max, general_high_md, validate,
)
from .errors import (
    DomainError, InfeasibleParams, InfeasibleStrategy, InvariantViolation, SolverError,
)
from .functional import BellFunctional, DeterministicStrategy, enumerate_strategies

MODEL_TOL = 1e-9
MATCH_TOL = 1e-6


@dataclass(frozen=True)
class NoiseStrategy:
    """Uniformly random outputs: every correlator is 0 and G(lambda) = 1/2."""

    guess = 0.5

    def correlators(self) -> np.ndarray:
        return np.zeros((3, 3))


@dataclass(frozen=True)
class BiasedStrategy:
    """Each party reproduces ``base`` with probability ``g`` and flips otherwise,
    independently per trial. Correlators are ``(2g-1)^2`` times those of ``base``."""

    base: DeterministicStrategy
    g: float

    @property
    def guess(self) -> float:
        return self.g

    def correlators(self) -> np.ndarray:
        return (2 * self.g - 1) ** 2 * self.base.correlators()


Strategy = Union[DeterministicStrategy, NoiseStrategy, BiasedStrategy]
NOISE = NoiseStrategy()


def agreement_probability(s: Strategy) -> float:
    """Probability that a party reproduces the base outputs of ``s``."""
    if isinstance(s, DeterministicStrategy):
        return 1.0
    if isinstance(s, NoiseStrategy):
        return 0.5
    return s.g


def base_outputs(s: Strategy) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if isinstance(s, DeterministicStrategy):
        return s.a, s.b
    if isinstance(s, BiasedStrategy):
        return s.base.a, s.base.b
    return (1, 1, 1), (1, 1, 1)


@dataclass
class ModelEntry:
    strategy: Strategy
    weight: float
    inputs: np.ndarray


@dataclass
class EveModel:
    entries: list[ModelEntry]
    dist: InputDistribution = InputDistribution.GENERAL
    # Measurement-dependence box the input tables were built for, if any.
    S: Optional[float] = None
    P: Optional[float] = None

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.entries])

    def marginal(self) -> np.ndarray:
        return sum((e.weight * e.inputs for e in self.entries), np.zeros((3, 3)))

    def guessing_probability(self) -> float:
        return math.fsum(e.weight * e.strategy.guess for e in self.entries)

    def check(self, tol: float = MODEL_TOL) -> None:
        """Raise :class:`InvariantViolation` naming the first broken invariant."""
        if not self.entries:
            raise InvariantViolation("model has no entries")
        w = self.weights
        if np.any(w < -tol):
            raise InvariantViolation(f"negative weight {w.min()}")
        if abs(math.fsum(w) - 1.0) > tol:
            raise InvariantViolation(f"weights sum to {math.fsum(w)}, not 1")
        for i, e in enumerate(self.entries):
            t = np.asarray(e.inputs)
            if t.shape != (3, 3):
                raise InvariantViolation(f"entry {i}: input table has shape {t.shape}")
            if abs(math.fsum(t.ravel()) - 1.0) > tol:
                raise InvariantViolation(f"entry {i}: input table sums to {t.sum()}")
            if np.any(t < -tol):
                raise InvariantViolation(f"entry {i}: negative input probability")
            if e.weight > tol:
                if self.S is not None and t.min() < self.S - tol:
                    raise InvariantViolation(f"entry {i}: input cell {t.min()} below S={self.S}")
                if self.P is not None and t.max() > self.P + tol:
                    raise InvariantViolation(f"entry {i}: input cell {t.max()} above P={self.P}")
                if self.dist is InputDistribution.FACTORIZABLE:
                    outer = np.outer(t.sum(axis=1), t.sum(axis=0))
                    if np.max(np.abs(outer - t)) > tol:
                        raise InvariantViolation(f"entry {i}: input table is not a product")
        marg = self.marginal()
        if np.max(np.abs(marg - UNIFORM)) > tol:
            raise InvariantViolation(
                f"observed input marginal deviates from 1/9 by {np.max(np.abs(marg - UNIFORM)):.3g}")

    # -- JSON round trip ---------------------------------------------------

    def to_dict(self) -> dict:
        def strat(s):
            if isinstance(s, DeterministicStrategy):
                return s.id
            if isinstance(s, NoiseStrategy):
                return "noise"
            return {"base": s.base.id, "g": s.g}

        return {
            "dist": self.dist.value,
            "S": self.S,
            "P": self.P,
            "entries": [
                {"strategy": strat(e.strategy), "weight": e.weight,
                 "inputs": np.asarray(e.inputs).tolist()}
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EveModel":
        def strat(s):
            if s == "noise":
                return NOISE
            if isinstance(s, dict):
                return BiasedStrategy(DeterministicStrategy.from_id(int(s["base"])), float(s["g"]))
            if isinstance(s, bool) or not isinstance(s, int):
                raise DomainError(f"unrecognised strategy {s!r}")
            return DeterministicStrategy.from_id(s)

        try:
            entries = [
                ModelEntry(strat(e["strategy"]), float(e["weight"]),
                           np.asarray(e["inputs"], dtype=float))
                for e in d["entries"]
            ]
            return cls(entries, InputDistribution(d.get("dist", "general")),
                       d.get("S"), d.get("P"))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed model: {exc}") from exc

    @classmethod
    def load(cls, path) -> "EveModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def evaluate_model(f: BellFunctional, model: EveModel) -> float:
    """Bell value of a mixture with uniform observed inputs (pure arithmetic)."""
    model.check()
    terms = []
    for e in model.entries:
        contrib = f.coeffs * np.asarray(e.inputs) * e.strategy.correlators()
        terms.extend((9.0 * e.weight * contrib).ravel().tolist())
    return math.fsum(terms)


# -- general input distribution -------------------------------------------


def strategy_universe(p: MDParams, vertex_grid: bool = False) -> list[Strategy]:
    """64 deterministic strategies, plus noise when G < 1.

    ``vertex_grid`` adds the 64 biased strategies whose marginals sit at
    ``G`` and ``1-G``; they tighten the G < 1 lower bound.
    """
    universe: list[Strategy] = list(enumerate_strategies())
    if p.G < 1.0 - TOL:
        universe.append(NOISE)
        if vertex_grid:
            universe.extend(BiasedStrategy(s, p.G) for s in enumerate_strategies())
    return universe


def build_lp_general(f: BellFunctional, p: MDParams, vertex_grid: bool = False,
                     check: bool = True) -> lpmod.LinearProgram:
    """Variables ``[w_0..w_{L-1}, q_{0,0,0}, .., q_{L-1,2,2}]``; ``q`` index is
    ``L + 9*lambda + 3*j + k``.

    Box rows that the nonnegativity bounds already imply (``S == 0``, or
    ``P == 1``) are omitted.
    """
    if check:
        validate(p)
    universe = strategy_universe(p, vertex_grid)
    L = len(universe)
    n = L + 9 * L
    corr = np.array([s.correlators() for s in universe])  # (L, 3, 3)
    c = np.zeros(n)
    c[L:] = (9.0 * f.coeffs[None] * corr).ravel()

    eq_rows, eq_rhs = [], []
    for lam in range(L):
        row = np.zeros(n)
        row[L + 9 * lam: L + 9 * lam + 9] = 1.0
        row[lam] = -1.0
        eq_rows.append(row)
        eq_rhs.append(0.0)
    for cell in range(9):
        row = np.zeros(n)
        row[L + cell::9] = 1.0
        eq_rows.append(row)
        eq_rhs.append(UNIFORM)
    row = np.zeros(n)
    row[:L] = 1.0
    eq_rows.append(row)
    eq_rhs.append(1.0)
    if p.G < 1.0 - TOL:
        row = np.zeros(n)
        row[:L] = [s.guess for s in universe]
        eq_rows.append(row)
        eq_rhs.append(p.G)

    ub_rows = []
    for lam in range(L):
        for cell in range(9):
            qi = L + 9 * lam + cell
            if p.S > 0.0:
                row = np.zeros(n)
                row[lam] = p.S
                row[qi] = -1.0
                ub_rows.append(row)
            if p.P < 1.0:
                row = np.zeros(n)
                row[qi] = 1.0
                row[lam] = -p.P
                ub_rows.append(row)
    A_ub = np.array(ub_rows) if ub_rows else None
    b_ub = np.zeros(len(ub_rows)) if ub_rows else None
    return lpmod.LinearProgram(c, np.array(eq_rows), np.array(eq_rhs), A_ub, b_ub)


def _model_from_solution(universe, x, p: MDParams, dist) -> EveModel:
    L = len(universe)
    w = x[:L]
    q = x[L:].reshape(L, 3, 3)
    entries = []
    for lam in range(L):
        if w[lam] <= 1e-12:
            continue
        table = np.clip(q[lam] / w[lam], 0.0, None)
        table /= table.sum()
        entries.append(ModelEntry(universe[lam], float(w[lam]), table))
    total = math.fsum(e.weight for e in entries)
    for e in entries:
        e.weight /= total
    return EveModel(entries, dist, p.S, p.P)


@dataclass
class OracleResult:
    """``value`` is certified achievable (the model attains it); ``upper``
    bounds the true optimum from above. ``exact`` when they coincide."""

    value: float
    model: EveModel
    upper: float
    exact: bool
    trace: list[float] = field(default_factory=list)


def _solve_lp(program):
    sol = lpmod.solve(program)
    if sol.status is lpmod.Status.INFEASIBLE:
        raise InfeasibleParams("oracle program is infeasible")
    if sol.status is not lpmod.Status.OPTIMAL:
        raise SolverError(f"oracle program returned status {sol.status.value}")
    return sol


def solve_general(f: BellFunctional, p: MDParams, vertex_grid: bool = False,
                  check: bool = True) -> OracleResult:
    """Exact optimum for G = 1; for G < 1 a lower bound, with the G = 1
    optimum as the upper bound (dropping the G constraint only enlarges
    the feasible set)."""
    program = build_lp_general(f, p, vertex_grid, check)
    sol = _solve_lp(program)
    universe = strategy_universe(p, vertex_grid)
    model = _model_from_solution(universe, sol.x, p, InputDistribution.GENERAL)
    if p.G >= 1.0 - TOL:
        return OracleResult(sol.objective_value, model, sol.objective_value, True)
    upper = _solve_lp(build_lp_general(f, p.replace(G=1.0), check=False)).objective_value
    return OracleResult(sol.objective_value, model, upper, abs(upper - sol.objective_value) <= 1e-9)


# -- explicit four-strategy construction -------------------------------------

# (a0, b0, a1, b1, a2, b2) for lambda_0..lambda_3.
TABLE1_ROWS = (
    (-1, 1, 1, -1, 1, -1),
    (1, 1, -1, -1, 1, 1),
    (1, -1, -1, 1, -1, 1),
    (1, 1, -1, -1, 1, 1),
)
# Cells on which each lambda's output contradicts the sign of the coefficient.
TABLE1_PENALTY_CELLS = (
    ((0, 0), (1, 1)),
    ((0, 1), (1, 0)),
    ((0, 0), (1, 1)),
    ((0, 1), (1, 0)),
)


def table1_strategies() -> list[DeterministicStrategy]:
    out = []
    for a0, b0, a1, b1, a2, b2 in TABLE1_ROWS:
        out.append(DeterministicStrategy.from_outputs((a0, a1, a2), (b0, b1, b2)))
    return out


def _diagnose_table1(fixed: np.ndarray, p: MDParams) -> str:
    """Name a single constraint that no completion of ``fixed`` can meet.

    ``fixed`` is 4x3x3 with NaN on free cells.
    """
    for lam in range(4):
        for j, k in zip(*np.nonzero(~np.isnan(fixed[lam]))):
            v = fixed[lam, j, k]
            if v < p.S - TOL or v > p.P + TOL:
                return f"box: fixed cell ({j},{k}) of lambda_{lam} = {v:.6g} outside [S, P]"
    for lam in range(4):
        free = np.isnan(fixed[lam])
        fsum = np.nansum(fixed[lam])
        if fsum + free.sum() * p.P < 1.0 - TOL:
            return f"row sum of lambda_{lam}: fixed cells + free cells at P reach only {fsum + free.sum() * p.P:.6g} < 1"
        if fsum + free.sum() * p.S > 1.0 + TOL:
            return f"row sum of lambda_{lam}: fixed cells + free cells at S exceed 1"
    need = 4.0 * UNIFORM  # sum over the four lambdas of equal weight 1/4
    for j in range(3):
        for k in range(3):
            col = fixed[:, j, k]
            free = np.isnan(col).sum()
            fsum = np.nansum(col)
            if fsum + free * p.P < need - TOL:
                return f"uniform marginal of cell ({j},{k}): at most {fsum + free * p.P:.6g} < 4/9 available"
            if fsum + free * p.S > need + TOL:
                return f"uniform marginal of cell ({j},{k}): at least {fsum + free * p.S:.6g} > 4/9 forced"
    return "joint: row sums, marginals and boxes admit no common completion"


def table1_model(alpha: float, p: MDParams) -> EveModel:
    """Four equally weighted deterministic strategies with the penalty cells
    pinned as in the optimality argument: at S on the HighMD branch, at
    ``1 - 8P`` on the LowMD branch. The remaining cells are completed as
    close to uniform as the box, row-sum and marginal constraints allow.
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    validate(p)
    if p.dist is not InputDistribution.GENERAL or p.G < 1.0 - TOL:
        raise DomainError("table1_model is defined for general inputs with G = 1")
    pinned = p.S if general_high_md(p) else 1.0 - 8.0 * p.P
    fixed = np.full((4, 3, 3), np.nan)
    for lam, cells in enumerate(TABLE1_PENALTY_CELLS):
        for j, k in cells:
            fixed[lam, j, k] = pinned

    # Variables: the 36 cells then t = max deviation from 1/9 over free cells;
    # maximize -t.
    n = 37
    c = np.zeros(n)
    c[-1] = -1.0
    eq, eq_b, ub, ub_b = [], [], [], []
    for lam in range(4):
        row = np.zeros(n)
        row[9 * lam: 9 * lam + 9] = 1.0
        eq.append(row)
        eq_b.append(1.0)
    for cell in range(9):
        row = np.zeros(n)
        row[cell:36:9] = 0.25
        eq.append(row)
        eq_b.append(UNIFORM)
    for lam in range(4):
        for cell in range(9):
            i = 9 * lam + cell
            v = fixed[lam].ravel()[cell]
            row = np.zeros(n)
            row[i] = 1.0
            if not np.isnan(v):
                eq.append(row)
                eq_b.append(v)
                continue
            ub.append(row.copy())
            ub_b.append(p.P)
            ub.append(-row)
            ub_b.append(-p.S)
            dev = row.copy()
            dev[-1] = -1.0
            ub.append(dev)
            ub_b.append(UNIFORM)
            dev = -row
            dev[-1] = -1.0
            ub.append(dev)
            ub_b.append(-UNIFORM)
    program = lpmod.LinearProgram(c, np.array(eq), np.array(eq_b), np.array(ub), np.array(ub_b))
    sol = lpmod.solve(program)
    if sol.status is not lpmod.Status.OPTIMAL:
        constraint = _diagnose_table1(fixed, p)
        raise InfeasibleStrategy(
            f"four-strategy model cannot be completed at P={p.P:.6g}, S={p.S:.6g}: {constraint}",
            constraint)
    # Box violations of pinned cells are not checked by the LP.
    for lam in range(4):
        for j, k in TABLE1_PENALTY_CELLS[lam]:
            if not p.S - TOL <= pinned <= p.P + TOL:
                constraint = _diagnose_table1(fixed, p)
                raise InfeasibleStrategy(
                    f"four-strategy model cannot be completed at P={p.P:.6g}, S={p.S:.6g}: {constraint}",
                    constraint)
    tables = np.clip(sol.x[:36].reshape(4, 3, 3), 0.0, None)
    entries = [ModelEntry(s, 0.25, tables[i]) for i, s in enumerate(table1_strategies())]
    return EveModel(entries, InputDistribution.GENERAL, p.S, p.P)


# -- factorizable input distribution ----------------------------------------


def _split_caps(p: MDParams, split: Optional[float]):
    if split is None:
        return None, None
    if not 0.0 <= split <= 1.0:
        raise DomainError(f"split must lie in [0, 1], got {split}")
    caps = p.P ** split, p.P ** (1.0 - split)
    if min(caps) < 1.0 / 3.0 - TOL:
        raise InfeasibleParams(f"split {split} gives a per-party cap {min(caps):.4g} below 1/3")
    return caps


def _mix_into_box(vec, cap, rng_t=None):
    """Move ``vec`` toward uniform until its largest entry is within ``cap``."""
    uniform = np.full(3, 1.0 / 3.0)
    if cap is None or vec.max() <= cap:
        return vec
    # max((1-t) v + t u) <= cap is linear in t.
    t = (vec.max() - cap) / (vec.max() - 1.0 / 3.0)
    return (1.0 - t) * vec + t * uniform


def _side_lp(f, universe, own_prev, other, p, own_cap, side):
    """Optimize one party's input vectors (and the weights) with the other
    party's vectors fixed.

    Variables ``u[lambda, x] = w_lambda * p_side(x | lambda)``.
    """
    L = len(universe)
    n = 3 * L
    corr = np.array([s.correlators() for s in universe])
    coef = 9.0 * f.coeffs[None] * corr  # (L, j, k)
    if side == "A":
        obj = np.einsum("ljk,lk->lj", coef, other)
    else:
        obj = np.einsum("ljk,lj->lk", coef, other)
    c = obj.ravel()

    eq, eq_b = [], []
    for j in range(3):
        for k in range(3):
            row = np.zeros(n)
            own = j if side == "A" else k
            oth = k if side == "A" else j
            row[own::3] = other[:, oth]
            eq.append(row)
            eq_b.append(UNIFORM)
    if p.G < 1.0 - TOL:
        row = np.repeat([s.guess for s in universe], 3)
        eq.append(row)
        eq_b.append(p.G)

    ub, ub_b = [], []
    omax = other.max(axis=1)
    omin = other.min(axis=1)
    for lam in range(L):
        for x in range(3):
            i = 3 * lam + x
            # split: u <= cap * w; exact: u * max(other) <= P * w
            if own_cap is not None:
                scale, cap = 1.0, own_cap
            else:
                scale, cap = omax[lam], p.P
            if cap < 1.0:
                row = np.zeros(n)
                row[3 * lam: 3 * lam + 3] = -cap
                row[i] += scale
                ub.append(row)
                ub_b.append(0.0)
            if p.S > 0.0:
                row = np.zeros(n)
                row[3 * lam: 3 * lam + 3] = p.S
                row[i] -= omin[lam]
                ub.append(row)
                ub_b.append(0.0)
    program = lpmod.LinearProgram(c, np.array(eq), np.array(eq_b),
                                  np.array(ub) if ub else None,
                                  np.zeros(len(ub)) if ub else None)
    try:
        sol = lpmod.solve(program)
    except SolverError:
        return None
    if sol.status is not lpmod.Status.OPTIMAL:
        return None
    u = sol.x.reshape(L, 3)
    w = u.sum(axis=1)
    own = own_prev.copy()
    alive = w > 1e-12
    own[alive] = u[alive] / w[alive, None]
    own = np.clip(own, 0.0, None)
    own /= own.sum(axis=1, keepdims=True)
    w = np.where(alive, w, 0.0)
    return sol.objective_value, own, w / w.sum()


def _factorizable_model(universe, pa, pb, w, p) -> EveModel:
    entries = [ModelEntry(universe[i], float(w[i]), np.outer(pa[i], pb[i]))
               for i in range(len(universe)) if w[i] > 1e-12]
    total = math.fsum(e.weight for e in entries)
    for e in entries:
        e.weight /= total
    return EveModel(entries, InputDistribution.FACTORIZABLE, p.S, p.P)


def _box_ok(pa, pb, w, p, tol=MODEL_TOL):
    alive = w > 1e-12
    prod = pa[alive][:, :, None] * pb[alive][:, None, :]
    return prod.size == 0 or (prod.max() <= p.P + tol and prod.min() >= p.S - tol)


def solve_factorizable(f: BellFunctional, p: MDParams, restarts: int = 32, seed: int = 0,
                       split: Optional[float] = 0.5, max_iter: int = 500,
                       tol: float = 1e-9, check: bool = True,
                       upper: Optional[float] = None) -> OracleResult:
    """Alternating-LP lower bound for factorizable input tables.

    Each restart draws random per-lambda input vectors, then alternately
    re-optimizes Alice's vectors (with Bob's fixed) and Bob's (with
    Alice's fixed); each half-step is an LP and never decreases the value.
    ``split`` caps each party's input probabilities at ``P**split`` and
    ``P**(1-split)``; ``split=None`` imposes the product cap directly.
    The general-distribution optimum at G = 1 is returned as ``upper``
    (pass it in to skip recomputing it); restarts stop early once it is met.
    """
    if check:
        validate(p)
    if upper is None:
        upper = solve_general(f, p.replace(G=1.0, dist=InputDistribution.GENERAL), check=False).value
    universe = strategy_universe(p)
    L = len(universe)
    cap_a, cap_b = _split_caps(p, split)
    rng = np.random.default_rng(seed)
    uniform = np.full((L, 3), 1.0 / 3.0)
    best = None

    for r in range(max(1, restarts)):
        if r == 0:
            pa, pb = uniform.copy(), uniform.copy()
        else:
            pa = rng.dirichlet(np.ones(3), size=L)
            pb = rng.dirichlet(np.ones(3), size=L)
        # Respect the caps and the S floor before the first LP.
        for mix in (0.0, 0.5, 1.0):
            pa0 = (1 - mix) * pa + mix * uniform
            pb0 = (1 - mix) * pb + mix * uniform
            if cap_a is not None:
                pa0 = np.array([_mix_into_box(v, cap_a) for v in pa0])
                pb0 = np.array([_mix_into_box(v, cap_b) for v in pb0])
            else:
                limit = math.sqrt(p.P)
                pa0 = np.array([_mix_into_box(v, limit) for v in pa0])
                pb0 = np.array([_mix_into_box(v, limit) for v in pb0])
            if p.S > 0.0:
                floor = math.sqrt(p.S)
                for arr in (pa0, pb0):
                    low = arr.min(axis=1) < floor
                    if np.any(low):
                        t = (floor - arr[low].min(axis=1)) / (1.0 / 3.0 - arr[low].min(axis=1))
                        arr[low] = (1 - t[:, None]) * arr[low] + t[:, None] / 3.0
            step = _side_lp(f, universe, pa0, pb0, p, cap_a, "A")
            if step is not None:
                break
        if step is None:
            continue
        value, pa, w = step
        pb = pb0
        trace = [value]
        side = "B"
        for _ in range(2 * max_iter):
            if side == "B":
                step = _side_lp(f, universe, pb, pa, p, cap_b, "B")
            else:
                step = _side_lp(f, universe, pa, pb, p, cap_a, "A")
            if step is None:
                break
            new_value, vec, w_new = step
            if side == "B":
                pb = vec
            else:
                pa = vec
            w = w_new
            trace.append(new_value)
            side = "A" if side == "B" else "B"
            if len(trace) >= 3 and trace[-1] - trace[-3] <= tol:
                break
        if best is None or trace[-1] > best[0]:
            best = (trace[-1], pa.copy(), pb.copy(), w.copy(), trace)
        if best[0] >= upper - tol:
            break  # the general optimum is an envelope; nothing left to gain

    if best is None:
        raise InfeasibleParams("no restart produced a feasible factorizable model")
    _, pa, pb, w, trace = best
    model = _factorizable_model(universe, pa, pb, w, p)
    value = evaluate_model(f, model)
    return OracleResult(value, model, upper, abs(upper - value) <= 1e-9, trace)


# -- verification ------------------------------------------------------------


class Classification(str, enum.Enum):
    MATCH = "Match"
    ORACLE_ABOVE = "OracleAboveFormula"
    ORACLE_BELOW = "OracleBelowFormula"


@dataclass
class VerificationReport:
    functional: str
    alpha: Optional[float]
    params: MDParams
    theorem: str
    branch: str
    closed_form: float
    oracle_value: float
    oracle_upper: float
    achievability_value: float
    explicit_strategy: Optional[float]
    explicit_strategy_note: Optional[str]
    classification: Classification

    @property
    def gap(self) -> float:
        return self.oracle_value - self.closed_form

    @property
    def conclusive(self) -> bool:
        """Above/Match rest on an achieved value; Below needs the upper bound."""
        if self.classification is Classification.ORACLE_BELOW:
            return self.oracle_upper < self.closed_form - MATCH_TOL
        return True

    def to_dict(self) -> dict:
        return {
            "functional": self.functional,
            "alpha": self.alpha,
            "P": self.params.P,
            "S": self.params.S,
            "G": self.params.G,
            "dist": self.params.dist.value,
            "theorem": self.theorem,
            "branch": self.branch,
            "closed_form": self.closed_form,
            "oracle_lower": self.oracle_value,
            "oracle_upper": self.oracle_upper,
            "achievability": self.achievability_value,
            "explicit_strategy": self.explicit_strategy,
            "explicit_strategy_note": self.explicit_strategy_note,
            "gap": self.gap,
            "conclusive": self.conclusive,
            "classification": self.classification.value,
        }


def classify(closed_form: float, oracle_value: float, tol: float = MATCH_TOL) -> Classification:
    if abs(closed_form - oracle_value) <= tol:
        return Classification.MATCH
    return Classification.ORACLE_ABOVE if oracle_value > closed_form else Classification.ORACLE_BELOW


def verify_theorem(f: BellFunctional, p: MDParams, restarts: int = 32, seed: int = 0,
                   split: Optional[float] = 0.5,
                   general_value: Optional[float] = None) -> VerificationReport:
    """Closed form vs oracle at one point.

    ``general_value`` is the general-input optimum at the same (P, S) and
    G = 1, if already known; the factorizable run uses it as its envelope.
    """
    validate(p)
    bound = fake_max(f, p)
    if p.dist is InputDistribution.GENERAL:
        res = solve_general(f, p)
    else:
        res = solve_factorizable(f, p, restarts=restarts, seed=seed, split=split,
                                 upper=general_value)
    achieved = evaluate_model(f, res.model)

    explicit_value, note = None, None
    if f.name == "pfb" and p.dist is InputDistribution.GENERAL and p.G >= 1.0 - TOL:
        try:
            explicit_value = evaluate_model(f, table1_model(f.alpha, p))
        except InfeasibleStrategy as exc:
            note = f"infeasible: {exc.constraint}"

    return VerificationReport(
        functional=f.name, alpha=f.alpha, params=p,
        theorem=bound.theorem.value, branch=bound.branch.value,
        closed_form=bound.value, oracle_value=res.value, oracle_upper=res.upper,
        achievability_value=achieved, explicit_strategy=explicit_value,
        explicit_strategy_note=note, classification=classify(bound.value, res.value),
    )

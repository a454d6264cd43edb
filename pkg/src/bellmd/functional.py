"""Bell functionals for the three-setting, two-outcome scenario.

Outcomes are represented as +1/-1 throughout. A functional is a 3x3 matrix
``coeffs`` whose entry ``(j, k)`` multiplies the correlator <X_j Y_k>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, UnsupportedFunctional

# Slack allowed when checking Fréchet windows supplied as floats.
WINDOW_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BellFunctional:
    coeffs: np.ndarray
    name: str = "custom"
    alpha: Optional[float] = None

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        if coeffs.shape != (3, 3):
            raise DomainError(f"coefficient matrix must be 3x3, got {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def label(self) -> str:
        if self.name == "pfb":
            return f"pfb({self.alpha:g})"
        return self.name

    def __repr__(self):
        return f"BellFunctional({self.label})"


def chain3() -> BellFunctional:
    """Three-setting chained functional, classical bound 4."""
    c = np.ones((3, 3))
    c[0, 1] = 0.0
    c[1, 2] = 0.0
    c[2, 0] = 0.0
    c[0, 2] = -1.0
    return BellFunctional(c, name="chain3")


def pfb(alpha: float) -> BellFunctional:
    """The one-parameter I_3322 family; ``pfb(1)`` is I_3322 itself."""
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in the open interval (0, 2), got {alpha}")
    c = np.array([
        [1.0, 1.0, alpha],
        [1.0, 1.0, -alpha],
        [alpha, -alpha, 0.0],
    ])
    return BellFunctional(c, name="pfb", alpha=alpha)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Output table of one hidden variable.

    Bit ``i`` of ``id`` (i = 0..2) encodes ``a[i]``, bits 3..5 encode ``b``;
    a zero bit means outcome +1. Id 0 is the all-plus strategy.
    """

    a: tuple[int, int, int]
    b: tuple[int, int, int]
    id: int

    @classmethod
    def from_id(cls, sid: int) -> "DeterministicStrategy":
        if not 0 <= sid < 64:
            raise DomainError(f"strategy id must be in 0..63, got {sid}")
        bits = [(sid >> i) & 1 for i in range(6)]
        signs = tuple(1 - 2 * bit for bit in bits)
        return cls(a=signs[:3], b=signs[3:], id=sid)

    @classmethod
    def from_outputs(cls, a: Sequence[int], b: Sequence[int]) -> "DeterministicStrategy":
        sid = 0
        for i, out in enumerate(list(a) + list(b)):
            if out not in (-1, 1):
                raise DomainError(f"outcomes must be +1 or -1, got {out}")
            if out == -1:
                sid |= 1 << i
        return cls.from_id(sid)

    # Uniform interface with the stochastic strategies in ``oracle``.
    guess = 1.0

    def correlators(self) -> np.ndarray:
        return np.outer(self.a, self.b).astype(float)

    def flipped(self) -> "DeterministicStrategy":
        return DeterministicStrategy.from_outputs([-x for x in self.a], [-x for x in self.b])


@lru_cache(maxsize=None)
def enumerate_strategies() -> tuple[DeterministicStrategy, ...]:
    return tuple(DeterministicStrategy.from_id(i) for i in range(64))


def strategy_value(f: BellFunctional, s: DeterministicStrategy) -> float:
    # fsum keeps sums of +-1 and +-alpha exact, so bound comparisons can use ==.
    return math.fsum(
        f.coeffs[j, k] * s.a[j] * s.b[k] for j in range(3) for k in range(3)
    )


def classical_bound(f: BellFunctional) -> float:
    """Maximum over all 64 deterministic strategies, by enumeration."""
    return max(strategy_value(f, s) for s in enumerate_strategies())


def quantum_bound(f: BellFunctional) -> float:
    if f.name == "chain3":
        return 3.0 * math.sqrt(3.0)
    if f.name == "pfb":
        return 4.0 + f.alpha ** 2
    raise UnsupportedFunctional(f"no known quantum bound for {f.label}")


def nosignaling_bound(f: BellFunctional) -> float:
    """Every correlator pushed independently to the sign of its coefficient."""
    return math.fsum(abs(x) for x in f.coeffs.ravel())


# -- single-cell probability identities --------------------------------------


def frechet_interval(m_j: float, n_k: float) -> tuple[float, float]:
    """Admissible range of p(-1,-1) given the two marginals p(-1)."""
    return max(0.0, m_j + n_k - 1.0), min(m_j, n_k)


def correlator_bounds(m_j: float, n_k: float) -> tuple[float, float]:
    return 2.0 * abs(m_j + n_k - 1.0) - 1.0, 1.0 - 2.0 * abs(m_j - n_k)


def cell_probabilities(m_j: float, n_k: float, c_jk: float) -> dict[tuple[int, int], float]:
    """The four joint outcome probabilities fixed by two marginals and p(-1,-1)."""
    return {
        (-1, -1): c_jk,
        (-1, 1): m_j - c_jk,
        (1, -1): n_k - c_jk,
        (1, 1): 1.0 + c_jk - m_j - n_k,
    }


def correlator_from_joint(m_j: float, n_k: float, c_jk: float) -> float:
    lo, hi = frechet_interval(m_j, n_k)
    if not (0.0 - WINDOW_TOL <= m_j <= 1.0 + WINDOW_TOL and 0.0 - WINDOW_TOL <= n_k <= 1.0 + WINDOW_TOL):
        raise DomainError(f"marginals must be probabilities, got m={m_j}, n={n_k}")
    if not lo - WINDOW_TOL <= c_jk <= hi + WINDOW_TOL:
        raise DomainError(f"c={c_jk} outside the Fréchet window [{lo}, {hi}]")
    return 1.0 + 4.0 * c_jk - 2.0 * (m_j + n_k)


@dataclass(frozen=True, eq=False)
class JointOutcomeDistribution:
    """Per-hidden-variable response: marginals p(-1) for each setting and
    the joint p(-1,-1) for each setting pair."""

    m: np.ndarray
    n: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", _frozen(self.m))
        object.__setattr__(self, "n", _frozen(self.n))
        object.__setattr__(self, "c", _frozen(self.c))
        if self.m.shape != (3,) or self.n.shape != (3,) or self.c.shape != (3, 3):
            raise DomainError("expected m, n of length 3 and c of shape 3x3")
        for j in range(3):
            for k in range(3):
                lo, hi = frechet_interval(self.m[j], self.n[k])
                if not lo - WINDOW_TOL <= self.c[j, k] <= hi + WINDOW_TOL:
                    raise DomainError(f"c[{j},{k}]={self.c[j, k]} outside [{lo}, {hi}]")

    @classmethod
    def product(cls, m, n) -> "JointOutcomeDistribution":
        """Independent outputs, as produced by a local hidden variable."""
        m = np.asarray(m, dtype=float)
        n = np.asarray(n, dtype=float)
        return cls(m, n, np.outer(m, n))

    def cells(self, j: int, k: int) -> dict[tuple[int, int], float]:
        return cell_probabilities(self.m[j], self.n[k], self.c[j, k])

    def correlators(self) -> np.ndarray:
        return 1.0 + 4.0 * self.c - 2.0 * (self.m[:, None] + self.n[None, :])

"""Closed-form maximum Bell values an adversary can fake under measurement
dependence, for general and factorizable input distributions.

Each function returns the printed formula verbatim; whether the formula is
actually optimal is judged separately by :mod:`bellmd.oracle`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, RangeError, UnsupportedFunctional
from .functional import BellFunctional

UNIFORM = 1.0 / 9.0
# Branch tests and range checks absorb float noise such as 8*(1/9)+1/9.
TOL = 1e-12


class InputDistribution(str, enum.Enum):
    GENERAL = "general"
    FACTORIZABLE = "factorizable"


class Branch(str, enum.Enum):
    HIGH_MD = "HighMD"
    LOW_MD = "LowMD"


class Theorem(str, enum.Enum):
    T1 = "T1"  # pfb, general inputs
    T2 = "T2"  # chain3, general inputs
    T3 = "T3"  # pfb, factorizable inputs
    T4 = "T4"  # chain3, factorizable inputs


@dataclass(frozen=True)
class MDParams:
    """Measurement-dependence box S <= p(X_j,Y_k|lambda) <= P and guessing probability G."""

    P: float
    S: float = 0.0
    G: float = 1.0
    dist: InputDistribution = InputDistribution.GENERAL

    def __post_init__(self):
        object.__setattr__(self, "dist", InputDistribution(self.dist))

    def replace(self, **changes) -> "MDParams":
        fields = dict(P=self.P, S=self.S, G=self.G, dist=self.dist)
        fields.update(changes)
        return MDParams(**fields)

    def describe(self) -> str:
        if abs(self.P - UNIFORM) <= TOL or abs(self.S - UNIFORM) <= TOL:
            return "uniform inputs"
        if self.P >= 1.0 - TOL:
            return "full control"
        return "partial control"


def validate(p: MDParams) -> str:
    """Raise :class:`RangeError` naming the violated bound, else describe ``p``."""
    if not UNIFORM - TOL <= p.P <= 1.0 + TOL:
        raise RangeError(f"P={p.P} outside [1/9, 1]")
    if not -TOL <= p.S <= UNIFORM + TOL:
        raise RangeError(f"S={p.S} outside [0, 1/9]")
    if p.S > p.P + TOL:
        raise RangeError(f"S={p.S} exceeds P={p.P}")
    if p.P + 8.0 * p.S > 1.0 + TOL:
        raise RangeError(f"P + 8S = {p.P + 8 * p.S} > 1: nine cells cannot have min S and max P")
    if not 0.5 - TOL <= p.G <= 1.0 + TOL:
        raise RangeError(f"G={p.G} outside [1/2, 1]")
    return p.describe()


@dataclass(frozen=True)
class FakeBound:
    value: float
    branch: Branch
    theorem: Theorem
    # Set when G < 1 on the HighMD branch: the printed formula ignores G
    # there, so the surface jumps at the branch boundary.
    warning: Optional[str] = None


def _two_branch(theorem, p, high_md, ns_value, low_coef, k):
    """Shared shape of all four theorems.

    HighMD: ns_value - 36 S; LowMD: ns_value - low_coef (2G-1)(1 - k P).
    """
    if high_md:
        warning = None
        if p.G < 1.0 - TOL:
            warning = "HighMD branch is independent of G; surface is discontinuous at the branch boundary for G < 1"
        return FakeBound(ns_value - 36.0 * p.S, Branch.HIGH_MD, theorem, warning)
    value = ns_value - low_coef * (2.0 * p.G - 1.0) * (1.0 - k * p.P)
    return FakeBound(value, Branch.LOW_MD, theorem)


def _require(p: MDParams, dist: InputDistribution):
    validate(p)
    if p.dist is not dist:
        raise RangeError(f"theorem applies to {dist.value} inputs, got {p.dist.value}")


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")


def general_high_md(p: MDParams) -> bool:
    return 8.0 * p.P + p.S >= 1.0 - TOL


def factorizable_high_md(p: MDParams) -> bool:
    return 2.0 * p.P + p.S >= 1.0 / 3.0 - TOL


def fake_max_pfb_general(alpha: float, p: MDParams) -> FakeBound:
    _check_alpha(alpha)
    _require(p, InputDistribution.GENERAL)
    return _two_branch(Theorem.T1, p, general_high_md(p), 4 * alpha + 4, 36.0, 8.0)


def fake_max_chain_general(p: MDParams) -> FakeBound:
    _require(p, InputDistribution.GENERAL)
    return _two_branch(Theorem.T2, p, general_high_md(p), 6.0, 18.0, 8.0)


def fake_max_pfb_fact(alpha: float, p: MDParams) -> FakeBound:
    _check_alpha(alpha)
    _require(p, InputDistribution.FACTORIZABLE)
    return _two_branch(Theorem.T3, p, factorizable_high_md(p), 4 * alpha + 4, 12.0, 6.0)


def fake_max_chain_fact(p: MDParams) -> FakeBound:
    _require(p, InputDistribution.FACTORIZABLE)
    return _two_branch(Theorem.T4, p, factorizable_high_md(p), 6.0, 6.0, 6.0)


def fake_max(f: BellFunctional, p: MDParams) -> FakeBound:
    general = p.dist is InputDistribution.GENERAL
    if f.name == "chain3":
        return fake_max_chain_general(p) if general else fake_max_chain_fact(p)
    if f.name == "pfb":
        return fake_max_pfb_general(f.alpha, p) if general else fake_max_pfb_fact(f.alpha, p)
    raise UnsupportedFunctional(f"no closed form for {f.label}")

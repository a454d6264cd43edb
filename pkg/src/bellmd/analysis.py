"""Unknown information rates, critical measurement dependence and
randomness-certification verdicts derived from the closed forms."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .closedform import (
    TOL, UNIFORM, InputDistribution, MDParams, fake_max, validate,
)
from .errors import DomainError, InvariantViolation, NoSolution
from .functional import BellFunctional, chain3, classical_bound, nosignaling_bound, pfb, quantum_bound

# Number of measurement settings per party; the rate is measured in base M.
M = 3
BISECT_TOL = 1e-12
ALPHA_TOL = 1e-10
# Printed crossing points we compare against; they do not follow from the
# rate formulas under exact arithmetic.
PRINTED_CRITICAL_ALPHA = {
    InputDistribution.GENERAL: 0.498,
    InputDistribution.FACTORIZABLE: 0.461,
}
EXACT_CRITICAL_ALPHA = 2.0 - math.sqrt(6.0 * math.sqrt(3.0) - 8.0)
RATE_HEADER = ["alpha", "tau_pfb_general", "tau_pfb_fact", "tau_chain_general", "tau_chain_fact"]


@dataclass(frozen=True)
class RateResult:
    p_hat: float
    tau: float
    inequality: str
    dist: InputDistribution


@dataclass(frozen=True)
class CertificationVerdict:
    observed: float
    threshold: float
    certified: bool
    margin: float
    # Which value set the threshold: "closed form", "classical bound" or "oracle".
    source: str = "closed form"


def _low_md_shape(f: BellFunctional, dist: InputDistribution):
    """(no-signaling value, LowMD coefficient, k) of the matching theorem."""
    ns = nosignaling_bound(f)
    if dist is InputDistribution.GENERAL:
        coef = 18.0 if f.name == "chain3" else 36.0
        return ns, coef, 8.0
    coef = 6.0 if f.name == "chain3" else 12.0
    return ns, coef, 6.0


def _branch_boundary(p: MDParams) -> float:
    """Smallest P that lands on the HighMD branch at this S."""
    if p.dist is InputDistribution.GENERAL:
        return (1.0 - p.S) / 8.0
    return (1.0 / 3.0 - p.S) / 2.0


def _bisect(pred, lo: float, hi: float, tol: float) -> float:
    """Smallest x in [lo, hi] with pred(x) true, for pred monotone false->true."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def critical_p(f: BellFunctional, p_template: Optional[MDParams] = None,
               target: Optional[float] = None) -> float:
    """Smallest P at which the closed form reaches ``target``.

    ``target`` defaults to the quantum bound of ``f``. The LowMD branch is
    linear in P, so the root is solved directly and then re-found by
    bisection as a guard against branch-logic slips.
    """
    p = p_template or MDParams(UNIFORM)
    if abs(p.G - 1.0) > TOL:
        raise DomainError(f"critical P is defined at G = 1, got G={p.G}")
    if target is None:
        target = quantum_bound(f)
    if not classical_bound(f) < target <= nosignaling_bound(f) + TOL:
        raise DomainError(f"target {target} outside (classical, no-signaling] for {f.label}")

    p_max = 1.0 - 8.0 * p.S
    validate(p.replace(P=max(UNIFORM, p.S)))

    def value(P):
        return fake_max(f, p.replace(P=P)).value

    ns, coef, k = _low_md_shape(f, p.dist)
    boundary = _branch_boundary(p)
    low_end = min(boundary, p_max)

    if low_end > UNIFORM and ns - coef * (1.0 - k * low_end) >= target - TOL:
        # Root on the LowMD branch, clamped at the uniform point.
        algebraic = max(UNIFORM, (1.0 - (ns - target) / coef) / k)
        bisected = _bisect(lambda P: value(P) >= target - TOL, UNIFORM, low_end, BISECT_TOL)
        if value(UNIFORM) >= target - TOL:
            bisected = UNIFORM
        if abs(algebraic - bisected) > 1e-10:
            raise InvariantViolation(f"critical P mismatch: algebraic {algebraic}, bisection {bisected}")
        return algebraic
    if boundary <= p_max + TOL and ns - 36.0 * p.S >= target - TOL:
        return max(UNIFORM, boundary)
    raise NoSolution(f"{f.label} never reaches {target} for P in [1/9, {p_max:g}] at S={p.S}")


def unknown_info_rate(p_hat: float) -> float:
    if not 0.0 < p_hat <= 1.0:
        raise DomainError(f"p_hat must lie in (0, 1], got {p_hat}")
    return -0.5 * math.log(p_hat) / math.log(M)


def rate(f: BellFunctional, dist: InputDistribution = InputDistribution.GENERAL) -> RateResult:
    dist = InputDistribution(dist)
    p_hat = critical_p(f, MDParams(UNIFORM, dist=dist))
    return RateResult(p_hat, unknown_info_rate(p_hat), f.label, dist)


def rate_curves(alpha_grid: Iterable[float]) -> list[tuple[float, float, float, float, float]]:
    """Rows of (alpha, tau_pfb_general, tau_pfb_fact, tau_chain_general, tau_chain_fact)."""
    chain_g = rate(chain3(), InputDistribution.GENERAL).tau
    chain_f = rate(chain3(), InputDistribution.FACTORIZABLE).tau
    rows = []
    for alpha in alpha_grid:
        f = pfb(alpha)
        rows.append((float(alpha),
                     rate(f, InputDistribution.GENERAL).tau,
                     rate(f, InputDistribution.FACTORIZABLE).tau,
                     chain_g, chain_f))
    return rows


def rate_curves_csv(alpha_grid: Iterable[float]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RATE_HEADER)
    for row in rate_curves(alpha_grid):
        writer.writerow([f"{x:.10g}" for x in row])
    return buf.getvalue()


def _rate_gap(alpha: float, dist: InputDistribution) -> float:
    return rate(pfb(alpha), dist).tau - rate(chain3(), dist).tau


def critical_alpha(dist: InputDistribution = InputDistribution.GENERAL) -> float:
    """Alpha in (0, 2) where the pfb and chain3 rates coincide."""
    dist = InputDistribution(dist)
    # Near alpha = 0 the quantum and classical bounds merge; 1e-3 is well inside.
    lo, hi = 1e-3, 2.0 - 1e-3
    g_lo = _rate_gap(lo, dist)
    if g_lo * _rate_gap(hi, dist) > 0:
        raise NoSolution("rate difference does not change sign on (0, 2)")
    while hi - lo > ALPHA_TOL:
        mid = 0.5 * (lo + hi)
        g_mid = _rate_gap(mid, dist)
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CriticalAlphaReport:
    dist: InputDistribution
    root: float
    exact: float
    printed: float
    note: str

    def lines(self) -> list[str]:
        return [
            f"{self.dist.value}: crossing alpha = {self.root:.10f} (exact 2 - sqrt(6 sqrt3 - 8) = {self.exact:.10f})",
            f"  printed value {self.printed} is not reproduced under exact arithmetic "
            f"(difference {self.printed - self.root:+.4f})",
            f"  {self.note}",
        ]


def critical_alpha_report(dist: InputDistribution = InputDistribution.GENERAL) -> CriticalAlphaReport:
    dist = InputDistribution(dist)
    root = critical_alpha(dist)
    note = ("below the crossing the pfb rate is lower than the chain rate, so Eve needs "
            "more input control to fake the quantum bound of pfb")
    return CriticalAlphaReport(dist, root, EXACT_CRITICAL_ALPHA, PRINTED_CRITICAL_ALPHA[dist], note)


def certify_randomness(observed: float, f: BellFunctional, p: MDParams,
                       strict: bool = False, **oracle_kwargs) -> CertificationVerdict:
    """Certified when ``observed`` strictly exceeds what Eve can fake.

    The threshold is the closed form, raised to the classical bound where the
    printed value falls below it. With ``strict`` the oracle optimum is used
    whenever it is larger still.
    """
    validate(p)
    p1 = p.replace(G=1.0)
    threshold = fake_max(f, p1).value
    source = "closed form"
    # Any local model reaches the classical bound without touching the
    # inputs, so a printed value below it cannot serve as a threshold.
    floor = classical_bound(f)
    if threshold < floor:
        threshold, source = floor, "classical bound"
    if strict:
        from .oracle import solve_factorizable, solve_general

        if p1.dist is InputDistribution.GENERAL:
            found = solve_general(f, p1).value
        else:
            found = solve_factorizable(f, p1, **oracle_kwargs).value
        if found > threshold:
            threshold, source = found, "oracle"
    return CertificationVerdict(observed, threshold, observed > threshold, observed - threshold, source)

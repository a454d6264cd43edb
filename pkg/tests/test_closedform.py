import pytest
from hypothesis import assume, given, strategies as st

from bellmd.closedform import (
    UNIFORM, Branch, InputDistribution, MDParams, Theorem, fake_max, fake_max_chain_fact,
    fake_max_chain_general, fake_max_pfb_fact, fake_max_pfb_general, factorizable_high_md,
    general_high_md, validate,
)
from bellmd.errors import DomainError, RangeError, UnsupportedFunctional
from bellmd.functional import BellFunctional, chain3, nosignaling_bound, pfb

GEN = InputDistribution.GENERAL
FAC = InputDistribution.FACTORIZABLE

alphas = st.floats(min_value=0.01, max_value=1.99)


@st.composite
def params(draw, dist=GEN, g=None):
    S = draw(st.floats(min_value=0.0, max_value=UNIFORM))
    P = draw(st.floats(min_value=UNIFORM, max_value=1.0 - 8 * S))
    G = draw(st.floats(min_value=0.5, max_value=1.0)) if g is None else g
    return MDParams(P, S, G, dist)


# -- hand-evaluated points ------------------------------------------------------


def test_pfb_general_uniform_point():
    b = fake_max_pfb_general(1.0, MDParams(UNIFORM, UNIFORM))
    assert b.value == pytest.approx(4.0)
    assert b.branch is Branch.HIGH_MD  # 8P + S = 1 exactly
    assert b.theorem is Theorem.T1


def test_pfb_general_low_branch():
    # 8 - 36 * (1 - 0.96)
    b = fake_max_pfb_general(1.0, MDParams(0.12))
    assert b.value == pytest.approx(6.56)
    assert b.branch is Branch.LOW_MD


def test_pfb_general_at_one_eighth():
    assert fake_max_pfb_general(1.0, MDParams(0.125)).value == pytest.approx(8.0)


def test_pfb_general_guessing_probability():
    # 8 - 36 * 0.6 * 0.04
    b = fake_max_pfb_general(1.0, MDParams(0.12, 0.0, 0.8))
    assert b.value == pytest.approx(7.136)
    assert b.warning is None


def test_high_branch_warns_below_full_guessing():
    b = fake_max_pfb_general(1.0, MDParams(0.3, 0.0, 0.8))
    assert b.branch is Branch.HIGH_MD
    assert b.value == pytest.approx(8.0)
    assert b.warning


def test_chain_general_points():
    assert fake_max_chain_general(MDParams(0.125)).value == pytest.approx(6.0)
    assert fake_max_chain_general(MDParams(0.12)).value == pytest.approx(5.28)
    # printed formula at the uniform point, below the classical bound
    assert fake_max_chain_general(MDParams(UNIFORM, UNIFORM)).value == pytest.approx(2.0)


def test_pfb_fact_points():
    assert fake_max_pfb_fact(1.0, MDParams(1 / 6, dist=FAC)).value == pytest.approx(8.0)
    b = fake_max_pfb_fact(1.0, MDParams(0.15, dist=FAC))
    assert b.branch is Branch.LOW_MD
    assert b.value == pytest.approx(8 - 12 * 0.1)
    assert fake_max_pfb_fact(1.0, MDParams(UNIFORM, UNIFORM, dist=FAC)).value == pytest.approx(4.0)


def test_chain_fact_points():
    assert fake_max_chain_fact(MDParams(1 / 6, dist=FAC)).value == pytest.approx(6.0)
    assert fake_max_chain_fact(MDParams(0.15, dist=FAC)).value == pytest.approx(5.4)
    assert fake_max_chain_fact(MDParams(UNIFORM, UNIFORM, dist=FAC)).value == pytest.approx(2.0)


def test_dispatch():
    assert fake_max(chain3(), MDParams(0.12)).theorem is Theorem.T2
    assert fake_max(pfb(1), MDParams(0.12, dist=FAC)).theorem is Theorem.T3
    assert fake_max(chain3(), MDParams(0.12, dist=FAC)).theorem is Theorem.T4
    with pytest.raises(UnsupportedFunctional):
        fake_max(BellFunctional([[1, 0, 0], [0, 1, 0], [0, 0, 1]]), MDParams(0.2))


def test_wrong_distribution_rejected():
    with pytest.raises(RangeError):
        fake_max_pfb_fact(1.0, MDParams(0.2))
    with pytest.raises(DomainError):
        fake_max_pfb_general(2.0, MDParams(0.2))


# -- validation --------------------------------------------------------------


@pytest.mark.parametrize("P,S,G", [
    (0.05, 0.0, 1.0),
    (0.5, 0.2, 1.0),
    (0.5, 0.1, 1.0),   # P + 8S > 1
    (0.5, 0.0, 0.4),
    (1.2, 0.0, 1.0),
    (0.5, -0.01, 1.0),
])
def test_validate_rejects(P, S, G):
    with pytest.raises(RangeError):
        validate(MDParams(P, S, G))


def test_validate_describes():
    assert validate(MDParams(UNIFORM, UNIFORM)) == "uniform inputs"
    assert validate(MDParams(1.0)) == "full control"
    assert validate(MDParams(0.3, 0.05)) == "partial control"


def test_branch_tests():
    assert general_high_md(MDParams(0.125))
    assert not general_high_md(MDParams(0.12))
    assert factorizable_high_md(MDParams(1 / 6, dist=FAC))
    assert not factorizable_high_md(MDParams(0.16, dist=FAC))


# -- properties -----------------------------------------------------------------


@given(alphas, params(g=None))
def test_never_above_no_signaling(alpha, p):
    assert fake_max(pfb(alpha), p).value <= nosignaling_bound(pfb(alpha)) + 1e-12
    assert fake_max(chain3(), p).value <= 6.0 + 1e-12


@given(alphas, params(dist=FAC))
def test_fact_never_above_no_signaling(alpha, p):
    assert fake_max(pfb(alpha), p).value <= nosignaling_bound(pfb(alpha)) + 1e-12


@given(alphas, st.floats(min_value=0.0, max_value=UNIFORM))
def test_pfb_continuous_at_boundary(alpha, S):
    f = pfb(alpha)
    P = (1.0 - S) / 8.0
    assume(P >= UNIFORM and P + 8 * S <= 1.0)
    high = fake_max(f, MDParams(P, S)).value
    low = fake_max(f, MDParams(P - 1e-12, S)).value
    assert high == pytest.approx(low, abs=1e-9)


@given(alphas, st.floats(min_value=0.0, max_value=UNIFORM))
def test_pfb_fact_continuous_at_boundary(alpha, S):
    f = pfb(alpha)
    P = (1.0 / 3.0 - S) / 2.0
    assume(P >= UNIFORM and P + 8 * S <= 1.0)
    high = fake_max(f, MDParams(P, S, dist=FAC)).value
    low = fake_max(f, MDParams(P - 1e-12, S, dist=FAC)).value
    assert high == pytest.approx(low, abs=1e-9)


@given(st.floats(min_value=0.0, max_value=UNIFORM))
def test_chain_jumps_at_boundary(S):
    # The chain formulas drop by 18 S when crossing into the HighMD branch.
    P = (1.0 - S) / 8.0
    assume(P >= UNIFORM + 1e-9)
    high = fake_max(chain3(), MDParams(P, S)).value
    low = fake_max(chain3(), MDParams(P - 1e-12, S)).value
    assert low - high == pytest.approx(18 * S, abs=1e-9)


@given(alphas, params(g=1.0))
def test_pfb_nondecreasing_in_P(alpha, p):
    f = pfb(alpha)
    bigger = min(1.0 - 8 * p.S, p.P + 0.01)
    assert fake_max(f, p.replace(P=bigger)).value >= fake_max(f, p).value - 1e-12


@given(params(g=None))
def test_low_branch_difference_has_slope_four(p):
    assume(not general_high_md(p))
    d1 = fake_max(pfb(1.2), p).value - fake_max(pfb(0.2), p).value
    assert d1 == pytest.approx(4.0, abs=1e-9)


@given(alphas)
def test_uniform_point_is_four_alpha(alpha):
    # The printed formula at the uniform point is its own boundary value.
    assert fake_max(pfb(alpha), MDParams(UNIFORM, UNIFORM)).value == pytest.approx(4 * alpha)
    assert fake_max(pfb(alpha), MDParams(UNIFORM, UNIFORM, dist=FAC)).value == pytest.approx(4 * alpha)


def test_replace_keeps_other_fields():
    p = MDParams(0.3, 0.05, 0.9, FAC)
    q = p.replace(P=0.4)
    assert (q.S, q.G, q.dist) == (0.05, 0.9, FAC)

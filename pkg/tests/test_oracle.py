import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellmd.closedform import UNIFORM, InputDistribution, MDParams, fake_max
from bellmd.errors import DomainError, InfeasibleParams, InfeasibleStrategy, InvariantViolation
from bellmd.functional import DeterministicStrategy, chain3, classical_bound, nosignaling_bound, pfb
from bellmd.oracle import (
    NOISE, BiasedStrategy, Classification, EveModel, ModelEntry, build_lp_general, classify,
    evaluate_model, solve_factorizable, solve_general, table1_model, verify_theorem,
)

FAC = InputDistribution.FACTORIZABLE
uniform_table = np.full((3, 3), UNIFORM)


def single(strategy):
    return EveModel([ModelEntry(strategy, 1.0, uniform_table.copy())])


# -- evaluate_model -------------------------------------------------------------


def test_all_plus_strategy_chain():
    assert evaluate_model(chain3(), single(DeterministicStrategy.from_id(0))) == pytest.approx(4.0)


def test_noise_only_is_zero():
    assert evaluate_model(pfb(1.0), single(NOISE)) == 0.0


def test_biased_strategy_scales_value():
    base = DeterministicStrategy.from_id(0)
    full = evaluate_model(chain3(), single(base))
    assert evaluate_model(chain3(), single(BiasedStrategy(base, 0.75))) == pytest.approx(0.25 * full)


def test_invariants_are_named():
    bad = EveModel([ModelEntry(DeterministicStrategy.from_id(0), 1.0, np.eye(3) / 3)])
    with pytest.raises(InvariantViolation, match="marginal"):
        evaluate_model(chain3(), bad)
    with pytest.raises(InvariantViolation, match="weights"):
        evaluate_model(chain3(), EveModel([ModelEntry(NOISE, 0.5, uniform_table)]))
    with pytest.raises(InvariantViolation, match="no entries"):
        EveModel([]).check()


def test_box_invariant():
    m = EveModel([ModelEntry(NOISE, 1.0, uniform_table)], S=0.12)
    with pytest.raises(InvariantViolation, match="below S"):
        m.check()


def test_json_roundtrip(tmp_path):
    m = table1_model(1.0, MDParams(0.3, 0.05))
    m.entries.append(ModelEntry(BiasedStrategy(DeterministicStrategy.from_id(5), 0.8), 0.0, uniform_table))
    m.entries.append(ModelEntry(NOISE, 0.0, uniform_table))
    path = tmp_path / "m.json"
    path.write_text(json.dumps(m.to_dict()))
    again = EveModel.load(path)
    assert evaluate_model(pfb(1.0), again) == pytest.approx(evaluate_model(pfb(1.0), m), abs=1e-12)
    assert isinstance(again.entries[-1].strategy, type(NOISE))


def test_malformed_model():
    with pytest.raises(DomainError):
        EveModel.from_dict({"entries": [{"strategy": "bogus", "weight": 1, "inputs": []}]})
    with pytest.raises(DomainError):
        EveModel.from_dict({})


# -- general-input oracle ------------------------------------------------------------


def test_program_size():
    lp = build_lp_general(pfb(1.0), MDParams(0.3, 0.05))
    assert lp.n == 640
    lp = build_lp_general(pfb(1.0), MDParams(0.3, 0.05, 0.8))
    assert lp.n == 650


@pytest.mark.parametrize("f", [chain3(), pfb(0.3), pfb(1.0), pfb(1.7)], ids=lambda f: f.label)
def test_uniform_point_is_classical(f):
    res = solve_general(f, MDParams(UNIFORM, UNIFORM))
    assert res.value == pytest.approx(classical_bound(f), abs=1e-8)


@pytest.mark.parametrize("f", [chain3(), pfb(0.5), pfb(1.5)], ids=lambda f: f.label)
def test_full_control_reaches_no_signaling(f):
    # With P = 1 each lambda can fix a single cell and answer it perfectly.
    assert solve_general(f, MDParams(1.0)).value == pytest.approx(nosignaling_bound(f), abs=1e-8)


def test_model_roundtrip_and_box():
    p = MDParams(0.2, 0.03)
    res = solve_general(pfb(1.0), p)
    assert res.exact
    assert evaluate_model(pfb(1.0), res.model) == pytest.approx(res.value, abs=1e-7)
    for e in res.model.entries:
        assert e.inputs.min() >= p.S - 1e-9 and e.inputs.max() <= p.P + 1e-9


def test_monotone_in_P_and_S():
    f = pfb(1.0)
    v = {}
    for P in (UNIFORM, 0.12, 0.15, 0.3):
        for S in (0.0, 0.03, 0.06):
            v[P, S] = solve_general(f, MDParams(P, S)).value
    for (P, S), val in v.items():
        assert val <= nosignaling_bound(f) + 1e-8
        for (P2, S2), val2 in v.items():
            if P2 >= P and S2 <= S:
                assert val2 >= val - 1e-8


def test_noise_strategy_is_inert_at_full_guessing():
    f = chain3()
    p = MDParams(0.15, 0.02)
    with_noise = solve_general(f, p.replace(G=1.0 - 1e-13))
    assert with_noise.value == pytest.approx(solve_general(f, p).value, abs=1e-8)


def test_partial_guessing_brackets():
    f = pfb(1.0)
    res = solve_general(f, MDParams(0.15, 0.0, 0.8))
    assert res.value <= res.upper + 1e-9
    assert res.upper == pytest.approx(solve_general(f, MDParams(0.15)).value)
    res_grid = solve_general(f, MDParams(0.15, 0.0, 0.8), vertex_grid=True)
    assert res_grid.value >= res.value - 1e-9
    assert res.model.guessing_probability() == pytest.approx(0.8, abs=1e-9)


def test_invalid_params():
    with pytest.raises(Exception):
        solve_general(chain3(), MDParams(0.05))


# -- explicit four-strategy model --------------------------------------------------


@pytest.mark.parametrize("alpha,P,S", [(1.0, 0.3, 0.05), (0.5, 0.3, 0.05), (1.5, 0.5, 0.02), (1.0, 0.2, 0.1)])
def test_table1_high_branch_value(alpha, P, S):
    m = table1_model(alpha, MDParams(P, S))
    assert evaluate_model(pfb(alpha), m) == pytest.approx(4 + 4 * alpha - 36 * S, abs=1e-9)


def test_table1_low_branch_at_uniform_marginal():
    # P = 1/9 pins the penalty cells at 1 - 8P = 1/9: value 4 + 4a - 4
    m = table1_model(1.5, MDParams(UNIFORM, 0.05))
    assert evaluate_model(pfb(1.5), m) == pytest.approx(6.0, abs=1e-9)


def test_table1_infeasible_at_one_eighth():
    with pytest.raises(InfeasibleStrategy) as info:
        table1_model(1.0, MDParams(0.125, 0.0))
    assert "row sum" in info.value.constraint


def test_table1_needs_general_full_guessing():
    with pytest.raises(DomainError):
        table1_model(1.0, MDParams(0.3, 0.0, 0.9))


# -- factorizable oracle --------------------------------------------------------------


def test_factorizable_uniform_point():
    res = solve_factorizable(chain3(), MDParams(UNIFORM, UNIFORM, dist=FAC), restarts=2)
    assert res.value == pytest.approx(4.0, abs=1e-8)


def test_factorizable_ascent_and_dominance():
    p = MDParams(0.3, 0.05, dist=FAC)
    res = solve_factorizable(pfb(1.0), p, restarts=3, seed=1)
    assert all(b >= a - 1e-9 for a, b in zip(res.trace, res.trace[1:]))
    assert res.value <= res.upper + 1e-7
    assert evaluate_model(pfb(1.0), res.model) == pytest.approx(res.value)
    res.model.check()  # product tables and boxes


def test_factorizable_seed_determinism():
    p = MDParams(0.2, 0.02, dist=FAC)
    a = solve_factorizable(chain3(), p, restarts=3, seed=7)
    b = solve_factorizable(chain3(), p, restarts=3, seed=7)
    assert a.value == b.value
    assert a.trace == b.trace


def test_factorizable_split_too_tight():
    with pytest.raises(InfeasibleParams):
        solve_factorizable(chain3(), MDParams(0.2, dist=FAC), split=0.0)


def test_factorizable_one_sixth_gap():
    # The formula claims 8 here; record what the alternating search reaches.
    p = MDParams(1 / 6, 0.0, dist=FAC)
    res = solve_factorizable(pfb(1.0), p, restarts=4)
    assert classical_bound(pfb(1.0)) - 1e-9 <= res.value <= 8.0 + 1e-9
    assert res.upper == pytest.approx(8.0, abs=1e-7)


# -- verification -------------------------------------------------------------------


def test_classify():
    assert classify(4.0, 4.0 + 1e-7) is Classification.MATCH
    assert classify(2.0, 4.0) is Classification.ORACLE_ABOVE
    assert classify(8.0, 5.5) is Classification.ORACLE_BELOW


def test_verify_uniform_pfb_half():
    r = verify_theorem(pfb(0.5), MDParams(UNIFORM, UNIFORM))
    assert r.closed_form == pytest.approx(2.0)
    assert r.oracle_value == pytest.approx(4.0)
    assert r.classification is Classification.ORACLE_ABOVE


def test_verify_reports_three_values():
    r = verify_theorem(pfb(1.5), MDParams(0.12))
    d = r.to_dict()
    for key in ("functional", "alpha", "P", "S", "G", "dist", "closed_form", "oracle_lower",
                "oracle_upper", "achievability", "classification"):
        assert key in d
    assert r.closed_form == pytest.approx(fake_max(pfb(1.5), MDParams(0.12)).value)
    assert r.explicit_strategy is None and "infeasible" in r.explicit_strategy_note


def test_verify_chain_one_eighth():
    r = verify_theorem(chain3(), MDParams(0.125))
    assert r.closed_form == pytest.approx(6.0)
    assert r.oracle_value < r.closed_form
    assert r.conclusive  # exact LP: the formula is out of reach


def test_verify_high_branch_match():
    r = verify_theorem(pfb(1.0), MDParams(0.3, 0.05))
    assert r.classification is Classification.MATCH
    assert r.explicit_strategy == pytest.approx(r.closed_form, abs=1e-9)


@settings(max_examples=10)
@given(st.floats(min_value=0.05, max_value=1.95))
def test_never_above_no_signaling(alpha):
    f = pfb(alpha)
    assert solve_general(f, MDParams(0.2, 0.01)).value <= nosignaling_bound(f) + 1e-8

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phragmen_lab.election import Election, hundred_voter_election, seven_voter_election, random_election
from phragmen_lab.functions import CostFunction, SpeedSchedule
from phragmen_lab.phragmen import (
    PhragmenError,
    PhragmenState,
    TieRule,
    purchasable_count,
    run_phragmen,
)

from strategies import elections

F = Fraction
QUARTER_BETA = CostFunction.exponential("1/4", 7)


def textbook_phragmen(e: Election, k: int) -> tuple[int, ...]:
    """Classic sequential Phragmén in its load-balancing form."""
    load = [F(0)] * e.n
    chosen: list[int] = []
    for _ in range(k):
        best = None
        for c in range(e.m):
            voters = e.approvers(c)
            if c in chosen or not voters:
                continue
            s = (1 + sum(load[v] for v in voters)) / len(voters)
            if best is None or s < best[0]:
                best = (s, c)
        s, c = best
        for v in e.approvers(c):
            load[v] = s
        chosen.append(c)
    return tuple(chosen)


def test_seven_voter_alpha():
    e = seven_voter_election()
    trace = run_phragmen(e, alpha=SpeedSchedule.geometric("1/10"))
    assert trace.committee == (0, 1, 2)
    assert trace.times == [F(1, 4), F(1, 2), F(1)]
    assert trace.final_balances == (F(3, 40),) * 4 + (F(1, 20),) * 2 + (F(0),)


@pytest.mark.parametrize("tie", [TieRule.lex(), TieRule.fixed([0, 1, 2, 5, 4, 3])])
def test_seven_voter_beta(tie):
    trace = run_phragmen(seven_voter_election(), beta=QUARTER_BETA, tie=tie)
    assert set(trace.committee) == {0, 3, 5}
    t1, t2, t3 = trace.times
    assert t1 == F(1, 1024)
    assert t2 == t1 + F(1, 192)
    assert t3 == t2 + F(1, 288)


def test_fixed_order_picks_c6_first_at_the_tie():
    trace = run_phragmen(seven_voter_election(), beta=QUARTER_BETA, tie=TieRule.fixed([5, 0, 1, 2, 3, 4]))
    assert trace.committee[1] == 5


def test_two_block_purchase_order():
    e = Election.from_lists([{0, 1, 2}] * 3 + [{3, 4, 5}] * 2, 3)
    trace = run_phragmen(e)
    assert trace.committee == (0, 3, 1)
    assert trace.times == [F(1, 3), F(1, 2), F(2, 3)]


def test_full_committee():
    e = Election.from_lists([{0, 1}, {2}, {1, 2}], 3)
    assert set(run_phragmen(e).committee) == {0, 1, 2}


def test_next_purchase_time_after_first_beta_purchase():
    state = PhragmenState(seven_voter_election(), SpeedSchedule.constant(), QUARTER_BETA)
    state.advance(F(1, 1024))
    state.buy(0)
    assert state.next_purchase_time(3) == F(1, 1024) + F(1, 192)


def test_next_purchase_time_edges():
    e = Election.from_lists([{0}, {0}], 1, candidates=["a", "b"])
    state = PhragmenState(e, SpeedSchedule.constant(), CostFunction.constant())
    assert state.next_purchase_time(1) is None
    state.advance(F(1, 2))
    assert state.next_purchase_time(0) == state.now


def test_hundred_voter_increasing_speed():
    e = hundred_voter_election()
    trace = run_phragmen(e, alpha=SpeedSchedule.power(100), mode="exact")
    assert trace.committee == (0, 1, 2, 3, 4, 5)
    assert all(e.representation_count(trace.committee, v) <= 1 for v in range(50, 100))


@pytest.mark.parametrize("beta", ["exp:0.9:100", "exp:0.25:7", "exp:0.5:2", "exp:0.01:1"])
def test_hundred_voter_beta_rules_serve_the_majority_block(beta):
    _, b, c = beta.split(":")
    trace = run_phragmen(hundred_voter_election(), beta=CostFunction.exponential(b, c), mode="auto")
    assert len(set(trace.committee) & set(range(6, 13))) >= 3


def test_insufficient_candidates():
    e = Election.from_lists([{0}], 2, candidates=["a", "b"])
    assert purchasable_count(e) == 1
    with pytest.raises(PhragmenError, match="insufficient"):
        run_phragmen(e)


def test_exact_mode_refuses_irrational_prices():
    e = Election.from_lists([{0}, {0}, {1}], 1)
    with pytest.raises(PhragmenError, match="float"):
        run_phragmen(e, beta=CostFunction.exponential("0.9", 100), mode="exact")
    assert run_phragmen(e, beta=CostFunction.exponential("0.9", 100), mode="auto").mode == "float"


@settings(max_examples=150, deadline=None)
@given(elections(), st.sampled_from(["1", "1/2", "9/10"]))
def test_trace_invariants(e, q):
    if purchasable_count(e) < e.k:
        return
    trace = run_phragmen(e, alpha=SpeedSchedule.geometric(q))
    assert len(trace.events) == e.k
    assert trace.times == sorted(trace.times)
    for ev in trace.events:
        assert sum(ev.payments.values()) == ev.cost
        assert ev.earned == ev.spent + ev.held


@settings(max_examples=100, deadline=None)
@given(elections())
def test_prefix_property(e):
    if purchasable_count(e) < e.k or e.k == 1:
        return
    small = run_phragmen(e.with_k(e.k - 1), alpha=SpeedSchedule.geometric("1/2")).committee
    large = run_phragmen(e, alpha=SpeedSchedule.geometric("1/2")).committee
    assert large[: len(small)] == small


@settings(max_examples=100, deadline=None)
@given(elections())
def test_uniform_speed_scaling(e):
    if purchasable_count(e) < e.k:
        return
    base = run_phragmen(e, alpha=SpeedSchedule.geometric("1/2"))
    shifted = run_phragmen(e, alpha=SpeedSchedule.geometric_shifted("1/2"))
    assert shifted.committee == base.committee
    assert shifted.times == [2 * t for t in base.times]


def test_classic_matches_textbook(rng):
    checked = 0
    for _ in range(300):
        n, m = int(rng.integers(1, 11)), int(rng.integers(1, 9))
        e = random_election(rng, n, m, int(rng.integers(1, m + 1)))
        if purchasable_count(e) < e.k:
            continue
        assert run_phragmen(e).committee == textbook_phragmen(e, e.k)
        checked += 1
    assert checked > 200


def test_float_agrees_with_exact(rng):
    rules = [
        (SpeedSchedule.geometric("1/2"), None),
        (SpeedSchedule.geometric("9/10"), None),
        (None, CostFunction.from_table(lambda x: 1 / (1 + 3 * x))),
        (SpeedSchedule.geometric("3/4"), CostFunction.from_table(lambda x: F(1, 2) ** (4 * x.numerator // x.denominator))),
    ]
    disagreements = 0
    for i in range(1000):
        n, m = int(rng.integers(1, 11)), int(rng.integers(1, 9))
        e = random_election(rng, n, m, int(rng.integers(1, m + 1)))
        if purchasable_count(e) < e.k:
            continue
        alpha, beta = rules[i % len(rules)]
        exact = run_phragmen(e, alpha, beta, mode="exact").committee
        approx = run_phragmen(e, alpha, beta, mode="float", eps=1e-9).committee
        disagreements += exact != approx
    assert disagreements == 0


def test_float_empty_voters_never_pay():
    e = Election.from_matrix(np.array([[0, 0], [1, 0], [1, 1]]), 2, allow_empty=True)
    trace = run_phragmen(e, mode="float")
    assert trace.committee == (0, 1)
    assert trace.final_balances[0] == pytest.approx(trace.times[-1])

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import elections

from phragmen_lab.election import (
    Election,
    ElectionError,
    hundred_voter_election,
    seven_voter_election,
    parse_election,
    random_election,
    serialize_election,
)


def test_seven_voter_counts():
    e = seven_voter_election()
    assert (e.n, e.m, e.k) == (7, 6, 3)
    assert e.approvers(0) == {0, 1, 2, 3}
    assert e.representation_count([0, 1, 2], 0) == 1


def test_representation_bounds():
    e = seven_voter_election()
    assert e.representation_count([1, 2, 4], 6) == 1
    assert e.representation_count([1, 4], 0) == 0
    assert e.representation_count([0, 3, 5], 0) == 3


def test_unapproved_candidate_is_legal():
    e = Election.from_lists([{0}, {0, 1}], 2, candidates=["a", "b", "c"])
    assert e.approvers(2) == frozenset()


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ('{"candidates": ["a"], "k": 1, "approvals": [[]]}', "empty approval set"),
        ('{"candidates": ["a", "a"], "k": 1, "approvals": [[0]]}', "duplicate"),
        ('{"candidates": ["a"], "k": 2, "approvals": [[0]]}', "'k'"),
        ('{"candidates": ["a"], "k": 1, "approvals": [[3]]}', "out of range"),
        ('{"candidates": ["a"], "approvals": [[0]]}', "missing"),
        ('{"candidates": ["a"], "k": 1, "approvals": [[0]]', "invalid JSON"),
    ],
)
def test_json_errors(doc, fragment):
    with pytest.raises(ElectionError, match=fragment):
        parse_election(doc)


def test_lines_errors_name_the_line():
    with pytest.raises(ElectionError, match="line 3"):
        parse_election("2 2 1\n1\n3\n")
    with pytest.raises(ElectionError, match="found 1"):
        parse_election("2 2 1\n1\n")
    with pytest.raises(ElectionError, match="line 1"):
        parse_election("2 2\n1\n")


def test_lines_comments_and_blank_tail():
    e = parse_election("# fig\n3 2 2\n1 2\n# mid\n3\n\n")
    assert e.approvals == (frozenset({0, 1}), frozenset({2}))


def test_allow_empty_round_trip():
    e = Election.from_lists([set(), {0}], 1, candidates=["a"], allow_empty=True)
    text = serialize_election(e)
    assert json.loads(text)["allow_empty"] is True
    assert parse_election(text) == e
    with pytest.raises(ElectionError):
        parse_election(serialize_election(e, "lines"))
    back = parse_election(serialize_election(e, "lines"), allow_empty=True)
    assert back.approvals == e.approvals  # the line format carries no labels


@settings(max_examples=100, deadline=None)
@given(elections())
def test_round_trip_both_formats(e):
    assert parse_election(serialize_election(e, "json")) == e
    assert parse_election(serialize_election(e, "lines")) == e


@settings(max_examples=100, deadline=None)
@given(elections())
def test_double_counting(e):
    assert sum(len(e.approvers(c)) for c in range(e.m)) == sum(len(a) for a in e.approvals)
    assert e.matrix.sum() == sum(len(a) for a in e.approvals)


@settings(max_examples=50, deadline=None)
@given(elections(), st.data())
def test_representation_monotone(e, data):
    small = data.draw(st.sets(st.integers(0, e.m - 1)))
    extra = data.draw(st.sets(st.integers(0, e.m - 1)))
    for v in range(e.n):
        assert e.representation_count(small, v) <= e.representation_count(small | extra, v)


def test_without_candidate_relabels():
    e = seven_voter_election()
    r = e.without_candidate(0)
    assert r.m == 5 and r.candidates[0] == "c2"
    assert r.approvals[0] == {2, 4}  # c4, c6 shifted down


def test_voter_types_group_identical_ballots():
    types = seven_voter_election().voter_types()
    assert types[0] == (frozenset({0, 3, 5}), [0, 1])
    assert sum(len(vs) for _, vs in types) == 7


def test_hundred_voter_shape():
    e = hundred_voter_election()
    assert (e.n, e.m, e.k) == (100, 13, 6)
    assert len(e.approvers(0)) == 55
    assert all(e.approvals[v] == frozenset(range(6, 13)) for v in range(55, 100))


def test_from_matrix_read_only():
    e = Election.from_matrix(np.array([[1, 0], [1, 1]]), 1)
    assert e.approvals == (frozenset({0}), frozenset({0, 1}))
    with pytest.raises(ValueError):
        e.matrix[0, 0] = False


def test_random_election_nonempty(rng):
    for _ in range(20):
        e = random_election(rng, 5, 4, 2)
        assert all(1 <= len(a) <= 4 for a in e.approvals)

"""
Brute-force axiom checks: PJR degree, IUAC and committee monotonicity, and
the instance families used to probe them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import bounds
from .election import Election
from .functions import as_fraction
from .phragmen import TieRule
from .rules import RuleSpec

BoundFn = Callable[[Fraction, int], object]

VOTER_CAP = 16
TYPE_CAP = 16


class AxiomError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    group: tuple[int, ...]
    gamma: Fraction
    represented: int  # |union of A(v) ∩ W over the group|
    cohesion: int  # |intersection of A(v) over the group|
    required: int  # min(cohesion, floor f(gamma, k))

    def to_dict(self) -> dict:
        return {
            "group": [v + 1 for v in self.group],
            "gamma": str(self.gamma),
            "represented": self.represented,
            "cohesion": self.cohesion,
            "required": self.required,
        }


def _floor(value) -> int:
    return math.floor(value)


def verify_pjr_degree(
    e: Election,
    committee: Iterable[int],
    f: BoundFn,
    method: str = "auto",
    cap: int = VOTER_CAP,
    type_cap: int = TYPE_CAP,
) -> Violation | None:
    """
    Check every group ``S`` of voters, ``S = V`` included, for

        |∪_{v∈S} A(v) ∩ W| >= min(|∩_{v∈S} A(v)|, floor(f(|S|/n, k))).

    Returns None when the committee passes, otherwise the first violation:
    the smallest group, lexicographically first among equals.

    Parameters
    ----------
    method : {"auto", "brute", "types"}
        ``brute`` enumerates all ``2**n`` groups (``n <= cap``). ``types``
        enumerates sets of distinct ballots (at most ``type_cap`` of them);
        it is exact whenever ``f`` is non-decreasing in ``gamma``, which holds
        for every bound in :mod:`phragmen_lab.bounds`. ``auto`` picks
        ``brute`` for small electorates.
    """
    committee = frozenset(committee)
    if method == "auto":
        method = "brute" if e.n <= cap else "types"
    if method == "brute":
        if e.n > cap:
            raise AxiomError(f"n={e.n} exceeds the enumeration cap {cap}")
        return _pjr_brute(e, committee, f)
    if method == "types":
        return _pjr_types(e, committee, f, type_cap)
    raise ValueError(f"unknown method {method!r}")


def _pjr_brute(e: Election, committee: frozenset[int], f: BoundFn) -> Violation | None:
    ballots = e.approvals
    covered = [a & committee for a in ballots]
    thresholds = {}
    for size in range(1, e.n + 1):
        gamma = Fraction(size, e.n)
        thresholds[size] = _floor(f(gamma, e.k))
        if thresholds[size] <= 0:
            continue
        for group in itertools.combinations(range(e.n), size):
            common = ballots[group[0]]
            for v in group[1:]:
                common = common & ballots[v]
                if not common:
                    break
            if not common:
                continue
            required = min(len(common), thresholds[size])
            represented = len(frozenset().union(*(covered[v] for v in group)))
            if represented < required:
                return Violation(group, gamma, represented, len(common), required)
    return None


def check_group(e: Election, committee: Iterable[int], f: BoundFn,
                group: Iterable[int]) -> Violation | None:
    """The PJR-degree condition for one given group of voters."""
    committee = frozenset(committee)
    group = tuple(sorted(set(group)))
    if not group:
        raise ValueError("group must be nonempty")
    common = frozenset.intersection(*(e.approvals[v] for v in group))
    represented = len(frozenset().union(*(e.approvals[v] & committee for v in group)))
    gamma = Fraction(len(group), e.n)
    required = min(len(common), _floor(f(gamma, e.k)))
    if represented < required:
        return Violation(group, gamma, represented, len(common), required)
    return None


def pjr_satisfiable(e: Election, f: BoundFn, method: str = "auto") -> bool:
    """Whether any committee of size ``k`` meets the PJR degree ``f`` on ``e``."""
    return any(
        verify_pjr_degree(e, w, f, method) is None
        for w in itertools.combinations(range(e.m), e.k)
    )


def _lex_smallest_group(types_voters: list[list[int]], size: int) -> tuple[int, ...]:
    """Lexicographically smallest sorted group of ``size`` voters hitting every type."""
    owner = {}
    for t, voters in enumerate(types_voters):
        for v in voters:
            owner[v] = t
    uncovered = set(range(len(types_voters)))
    chosen = []
    for v in sorted(owner):
        if len(chosen) == size:
            break
        t = owner[v]
        need = len(uncovered - {t})
        if size - len(chosen) - 1 >= need:
            chosen.append(v)
            uncovered.discard(t)
    return tuple(chosen)


def _pjr_types(e, committee, f, type_cap) -> Violation | None:
    types = e.voter_types()
    if len(types) > type_cap:
        raise AxiomError(f"{len(types)} distinct ballots exceed the type cap {type_cap}")
    n, k = e.n, e.k
    thresholds = [None] + [_floor(f(Fraction(s, n), k)) for s in range(1, n + 1)]
    best: tuple[int, tuple[int, ...]] | None = None
    found = None

    def visit(start, chosen, common, union, pool):
        nonlocal best, found
        for t in range(start, len(types)):
            ballot, voters = types[t]
            new_common = common & ballot if chosen else ballot
            new_union = union | (ballot & committee)
            if len(new_common) <= len(new_union):
                # both sides only get worse for supersets
                continue
            members = chosen + [t]
            total = pool + len(voters)
            for size in range(len(members), total + 1):
                if best is not None and size > best[0]:
                    break
                required = min(len(new_common), thresholds[size])
                if len(new_union) < required:
                    group = _lex_smallest_group([types[i][1] for i in members], size)
                    if best is None or (size, group) < best:
                        best = (size, group)
                        found = Violation(
                            group, Fraction(size, n), len(new_union), len(new_common), required
                        )
                    break
            visit(t + 1, members, new_common, new_union, total)

    visit(0, [], frozenset(), frozenset(), 0)
    return found


def pjr_bound_for(rule: RuleSpec, strict: bool = False) -> BoundFn:
    """
    The PJR-degree lower bound claimed for the rule.

    The claimed bounds use non-strict inequalities, and at equality they can
    be impossible to meet: two voters with disjoint ballots and ``k = 1`` each
    hold ``gamma = 1/2`` and are owed ``floor(2 * 1/2) = 1`` seat. ``strict``
    returns the largest integer strictly below the real-valued bound instead.
    """
    family = rule.family
    if family == "classic":
        if strict:
            return lambda g, k: min(math.ceil(g * (k + 1)) - 1, k)
        return lambda g, k: min(g * (k + 1), k)
    if family == "alpha":
        return lambda g, k: bounds.f_alpha_exact(rule.alpha, g, k, strict)
    if family == "beta":
        return lambda g, k: bounds.f_beta(rule.beta, g, k, strict)
    if family == "thiele":
        return lambda g, k: bounds.thiele_lower(rule.lam, g, k)
    raise AxiomError(f"no PJR-degree bound known for {rule.text or family!r}")


# ---------------------------------------------------------------------------
# IUAC


@dataclass(frozen=True)
class IUACReport:
    holds: bool
    unanimous: int
    winners: list[tuple[int, ...]]
    reduced_winners: list[tuple[int, ...]]  # in the original candidate ids
    counterexample: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "unanimous": self.unanimous + 1,
            "winners": [[c + 1 for c in w] for w in self.winners],
            "reduced_winners": [[c + 1 for c in w] for w in self.reduced_winners],
            "counterexample": (
                None if self.counterexample is None else [c + 1 for c in self.counterexample]
            ),
        }


def unanimous_candidates(e: Election) -> list[int]:
    common = frozenset.intersection(*e.approvals)
    return sorted(common)


def check_iuac(rule: RuleSpec, e: Election, tie: TieRule | None = None,
               mode: str = "auto") -> IUACReport:
    """
    Compare the winners of ``e`` (size ``k``) with the winners of ``e`` minus its
    unanimous candidate ``c`` (size ``k - 1``): IUAC holds iff every winner of
    the former is a winner of the latter plus ``c``.
    """
    found = unanimous_candidates(e)
    if not found:
        raise AxiomError("no unanimously approved candidate")
    if len(found) > 1:
        raise AxiomError(f"{len(found)} unanimously approved candidates; exactly one required")
    c = found[0]
    tie = tie or TieRule.lex()
    winners = rule.winners(e, tie, mode)
    keep = [x for x in range(e.m) if x != c]
    if e.k == 1:
        reduced = [()]
    else:
        small = e.without_candidate(c).with_k(e.k - 1)
        reduced = [
            tuple(keep[x] for x in w) for w in rule.winners(small, tie.restricted(keep), mode)
        ]
    targets = {frozenset(w) | {c} for w in reduced}
    for w in winners:
        if frozenset(w) not in targets:
            return IUACReport(False, c, winners, reduced, tuple(w))
    return IUACReport(True, c, winners, reduced)


def with_unanimous_candidate(e: Election, position: int | None = None) -> Election:
    """Insert a candidate approved by everyone at ``position`` and raise ``k`` by one."""
    position = e.m if position is None else position
    approvals = []
    for a in e.approvals:
        shifted = {x + 1 if x >= position else x for x in a}
        shifted.add(position)
        approvals.append(frozenset(shifted))
    labels = list(e.candidates)
    name = "u"
    while name in labels:
        name += "'"
    labels.insert(position, name)
    return Election(tuple(labels), tuple(approvals), e.k + 1, e.allow_empty)


def two_block_instance(n1: int, n2: int, m1: int, m2: int, k: int) -> Election:
    """``n1`` voters approve ``C1`` (``m1`` candidates), ``n2`` approve ``C2``,
    and one extra candidate (the last) is approved by everybody."""
    c1 = list(range(m1))
    c2 = list(range(m1, m1 + m2))
    u = m1 + m2
    approvals = [frozenset(c1 + [u])] * n1 + [frozenset(c2 + [u])] * n2
    labels = [f"a{i + 1}" for i in range(m1)] + [f"b{i + 1}" for i in range(m2)] + ["u"]
    return Election(tuple(labels), tuple(approvals), k)


def find_iuac_violation(rule: RuleSpec, max_n: int = 40, max_k: int = 6,
                        mode: str = "auto") -> Election | None:
    """
    Search two-block instances with one unanimous candidate, by committee
    size, then electorate size, then block imbalance. Returns the first
    instance failing IUAC.
    """
    for k in range(2, max_k + 1):
        for n in range(2, max_n + 1):
            for n2 in range(1, n // 2 + 1):
                e = two_block_instance(n - n2, n2, k, k, k)
                if not check_iuac(rule, e, mode=mode).holds:
                    return e
    return None


# ---------------------------------------------------------------------------
# a cohesive group squeezed by geometric Thiele


@dataclass(frozen=True)
class SmallFractionInstance:
    election: Election
    k: int
    cohesive: tuple[int, ...]  # voters of the cohesive group
    cohesive_candidates: tuple[int, ...]
    gamma: Fraction
    epsilon: Fraction


def small_fraction_instance(q, gamma, epsilon, scale: int = 1, min_k: int = 1,
                            max_k: int = 10_000) -> SmallFractionInstance:
    """
    Instance in which a cohesive group holding a ``gamma`` share of the voters
    wins at most ``floor(epsilon k)`` seats under ``q``-geometric Thiele.

    ``k`` is the smallest value ``>= min_k`` with
    ``(1-gamma)/(k - floor(epsilon k) + 1) > gamma q**floor(epsilon k)``. The
    other voters form ``r = k - floor(epsilon k)`` equal blocks, each with its
    own single candidate; block shares are ``(1-gamma)/r`` so that all groups
    partition the electorate. The cohesive group approves ``k`` candidates.
    """
    q, gamma, epsilon = as_fraction(q), as_fraction(gamma), as_fraction(epsilon)
    if not (0 < q < 1 and 0 < gamma < 1 and epsilon > 0):
        raise ValueError("need 0 < q < 1, 0 < gamma < 1, epsilon > 0")
    k = None
    for cand in range(max(1, min_k), max_k + 1):
        s = min(math.floor(epsilon * cand), cand)
        if (1 - gamma) / (cand - s + 1) > gamma * q**s:
            k = cand
            break
    if k is None:
        raise ValueError(f"no committee size up to {max_k} satisfies the inequality")
    # epsilon >= 1 makes every committee qualify; one block keeps the instance well formed
    r = max(k - math.floor(epsilon * k), 1)
    block_share = (1 - gamma) / r
    n = math.lcm(gamma.denominator, block_share.denominator) * scale
    cohesive_size = int(gamma * n)
    block_size = int(block_share * n)
    cohesive_cands = list(range(k))
    approvals = [frozenset(cohesive_cands)] * cohesive_size
    for i in range(r):
        approvals += [frozenset({k + i})] * block_size
    labels = [f"p{i + 1}" for i in range(k)] + [f"s{i + 1}" for i in range(r)]
    e = Election(tuple(labels), tuple(approvals), k)
    return SmallFractionInstance(
        e, k, tuple(range(cohesive_size)), tuple(cohesive_cands), gamma, epsilon
    )


# ---------------------------------------------------------------------------
# committee monotonicity


@dataclass(frozen=True)
class MonotonicityReport:
    holds: bool
    k: int | None = None  # first size whose winner is not extended at k + 1
    smaller: tuple[int, ...] | None = None
    larger: list[tuple[int, ...]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "k": self.k,
            "smaller": None if self.smaller is None else [c + 1 for c in self.smaller],
            "larger": [[c + 1 for c in w] for w in self.larger],
        }


def check_committee_monotonicity(rule: RuleSpec, e: Election, k_max: int,
                                 tie: TieRule | None = None, mode: str = "auto",
                                 allow_set_valued: bool = False) -> MonotonicityReport:
    """
    Whether every winner for size ``k`` is contained in a winner for size
    ``k + 1``, for ``k < k_max``. Set-valued rules are rejected unless
    ``allow_set_valued`` is given.
    """
    if not rule.sequential and not allow_set_valued:
        raise AxiomError(f"{rule.text or rule.kind!r} is not a sequential rule")
    k_max = min(k_max, e.m)
    previous = None
    for k in range(1, k_max + 1):
        current = rule.winners(e.with_k(k), tie, mode)
        if previous is not None:
            for w in previous:
                if not any(set(w) <= set(x) for x in current):
                    return MonotonicityReport(False, k - 1, w, current)
        previous = current
    return MonotonicityReport(True)


def random_instances(rng, count: int, max_n: int, max_m: int, max_k: int,
                     min_n: int = 1) -> list[Election]:
    """Random small elections with uniform sizes and uniform ballot lengths."""
    from .election import random_election

    out = []
    for _ in range(count):
        n = int(rng.integers(min_n, max_n + 1))
        m = int(rng.integers(1, max_m + 1))
        k = int(rng.integers(1, min(max_k, m) + 1))
        out.append(random_election(rng, n, m, k))
    return out

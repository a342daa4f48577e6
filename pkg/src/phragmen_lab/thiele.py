"""Thiele methods: scores, exhaustive optimisation and the sequential greedy variant."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

from .election import Election
from .functions import ThieleWeights
from .phragmen import TieRule

ENUMERATION_CAP = 2_000_000


class InstanceTooLarge(RuntimeError):
    pass


def lambda_score(e: Election, committee: Iterable[int], lam: ThieleWeights) -> Fraction:
    """``sum_v sum_{j <= |W ∩ A(v)|} lambda(j)``, exact."""
    committee = frozenset(committee)
    prefix = lam.prefix(len(committee))
    return sum((prefix[len(a & committee)] for a in e.approvals), Fraction(0))


def _integer_weights(lam: ThieleWeights, k: int) -> tuple[list[int], int]:
    """Weights scaled to integers: ``w[j] = lambda(j) * scale`` for ``j = 1..k``."""
    values = [lam(j) for j in range(1, k + 1)]
    scale = 1
    for v in values:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    return [0] + [int(v * scale) for v in values], scale


def _typed(e: Election):
    types = e.voter_types()
    counts = [len(voters) for _, voters in types]
    supporters = [[] for _ in range(e.m)]
    for t, (ballot, _) in enumerate(types):
        for c in ballot:
            supporters[c].append(t)
    return counts, supporters


def exact_thiele(
    e: Election, lam: ThieleWeights, cap: int = ENUMERATION_CAP
) -> list[tuple[int, ...]]:
    """
    All committees of size ``e.k`` maximising the ``lam``-score.

    Exhaustive depth-first enumeration over candidates in id order, pruned
    when even ``lambda(1)`` per remaining seat for the best-supported
    remaining candidate cannot reach the incumbent score. Ties are kept, so
    the result is exact. Committees are ascending tuples in ascending order.

    Raises
    ------
    InstanceTooLarge
        If ``C(m, k)`` exceeds ``cap``.
    """
    m, k = e.m, e.k
    if math.comb(m, k) > cap:
        raise InstanceTooLarge(
            f"instance too large for exact enumeration: C({m},{k}) > {cap}"
        )
    weights, _ = _integer_weights(lam, k)
    counts, supporters = _typed(e)
    support = [sum(counts[t] for t in supporters[c]) for c in range(m)]
    # suffix_max[i] = max support among candidates i..m-1
    suffix_max = [0] * (m + 1)
    for c in range(m - 1, -1, -1):
        suffix_max[c] = max(support[c], suffix_max[c + 1])
    have = [0] * len(counts)
    best = [-1]
    winners: list[tuple[int, ...]] = []
    chosen: list[int] = []

    def dfs(start: int, score: int) -> None:
        left = k - len(chosen)
        if left == 0:
            if score > best[0]:
                best[0] = score
                winners.clear()
            if score == best[0]:
                winners.append(tuple(chosen))
            return
        for c in range(start, m - left + 1):
            if score + left * weights[1] * suffix_max[c] < best[0]:
                return
            gain = 0
            for t in supporters[c]:
                have[t] += 1
                gain += counts[t] * weights[have[t]]
            chosen.append(c)
            dfs(c + 1, score + gain)
            chosen.pop()
            for t in supporters[c]:
                have[t] -= 1

    dfs(0, 0)
    return sorted(winners)


def seq_thiele(e: Election, lam: ThieleWeights, tie: TieRule | None = None) -> tuple[int, ...]:
    """Greedy Thiele: add the candidate with the largest marginal score, ``k`` times."""
    tie = tie or TieRule.lex()
    weights, _ = _integer_weights(lam, e.k)
    counts, supporters = _typed(e)
    have = [0] * len(counts)
    committee: list[int] = []
    for _ in range(e.k):
        best, tied = None, []
        for c in range(e.m):
            if c in committee:
                continue
            gain = sum(counts[t] * weights[have[t] + 1] for t in supporters[c])
            if best is None or gain > best:
                best, tied = gain, [c]
            elif gain == best:
                tied.append(c)
        c = tie.pick(tied)
        committee.append(c)
        for t in supporters[c]:
            have[t] += 1
    return tuple(committee)

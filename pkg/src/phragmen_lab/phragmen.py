"""
Generalized sequential Phragmén: voters earn credits continuously and buy
approved candidates.

A voter who has paid for ``i - 1`` candidates earns at speed ``alpha(i)``; a
candidate approved by a share ``x`` of the electorate costs ``beta(x)``. At the
earliest moment some not-yet-elected candidate is affordable by its approvers,
it is bought: every approver pays her whole balance and moves to the next
speed. Constant ``alpha`` and ``beta`` give the classic rule.

Two engines share these semantics: an exact one over ``Fraction`` and a
vectorised float one used by the simulations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .election import Election
from .functions import CostFunction, IrrationalValue, SpeedSchedule


class PhragmenError(RuntimeError):
    pass


@dataclass(frozen=True)
class TieRule:
    """Choice among candidates affordable at the same moment.

    ``lex`` picks the lowest candidate id; ``fixed`` the first candidate in
    ``order``.
    """

    kind: str = "lex"
    order: tuple[int, ...] = ()

    @classmethod
    def lex(cls):
        return cls("lex")

    @classmethod
    def fixed(cls, order: Sequence[int]):
        return cls("fixed", tuple(int(c) for c in order))

    def __post_init__(self):
        if self.kind not in ("lex", "fixed"):
            raise ValueError(f"unknown tie rule {self.kind!r}")

    def check(self, m: int) -> None:
        if self.kind == "fixed" and sorted(self.order) != list(range(m)):
            raise ValueError("fixed tie order must be a permutation of the candidates")

    def pick(self, tied) -> int:
        tied = list(tied)
        if self.kind == "lex":
            return min(tied)
        rank = {c: i for i, c in enumerate(self.order)}
        return min(tied, key=rank.__getitem__)

    def restricted(self, keep: Sequence[int]) -> "TieRule":
        """The same preference over a candidate subset, relabelled ``0..len(keep)-1``."""
        if self.kind == "lex":
            return self
        pos = {c: i for i, c in enumerate(keep)}
        return TieRule.fixed([pos[c] for c in self.order if c in pos])


@dataclass(frozen=True)
class PurchaseEvent:
    time: Fraction | float
    candidate: int
    payers: frozenset[int]
    cost: Fraction | float
    payments: dict[int, Fraction | float]
    earned: Fraction | float  # total credits earned by all voters up to ``time``
    spent: Fraction | float  # total credits spent, this purchase included
    held: Fraction | float  # sum of balances right after the purchase


@dataclass(frozen=True)
class PhragmenTrace:
    events: tuple[PurchaseEvent, ...]
    committee: tuple[int, ...]
    final_balances: tuple
    mode: str

    @property
    def times(self):
        return [ev.time for ev in self.events]

    def to_dict(self, e: Election | None = None) -> dict:
        def num(x):
            return str(x) if isinstance(x, Fraction) else float(x)

        return {
            "mode": self.mode,
            "events": [
                {
                    "t": num(ev.time),
                    "candidate": ev.candidate + 1,
                    "payers": sorted(v + 1 for v in ev.payers),
                    "cost": num(ev.cost),
                }
                for ev in self.events
            ],
            "committee": [c + 1 for c in self.committee],
            "committee_labels": (
                [e.candidates[c] for c in self.committee] if e is not None else None
            ),
        }


class PhragmenState:
    """Mutable state of the exact purchase process."""

    def __init__(self, e: Election, alpha: SpeedSchedule, beta: CostFunction):
        self.e = e
        self.alpha = alpha
        self.now = Fraction(0)
        self.balance = [Fraction(0)] * e.n
        self.paid = [0] * e.n
        self.speed = [alpha(1)] * e.n
        self.elected: list[int] = []
        self.costs: dict[int, Fraction] = {}
        for c in range(e.m):
            count = len(e.approvers(c))
            if count:
                self.costs[c] = beta.exact(Fraction(count, e.n))

    def next_purchase_time(self, c: int) -> Fraction | None:
        """
        Earliest ``t >= now`` at which the approvers of ``c`` can afford it,
        or None if nobody approves ``c``.
        """
        voters = self.e.approvers(c)
        if not voters:
            return None
        held = sum((self.balance[v] for v in voters), Fraction(0))
        rate = sum((self.speed[v] for v in voters), Fraction(0))
        gap = self.costs[c] - held
        if gap <= 0:
            return self.now
        return self.now + gap / rate

    def advance(self, t: Fraction) -> None:
        dt = t - self.now
        if dt:
            self.balance = [b + dt * s for b, s in zip(self.balance, self.speed)]
        self.now = t

    def buy(self, c: int) -> dict[int, Fraction]:
        payments = {}
        for v in sorted(self.e.approvers(c)):
            payments[v] = self.balance[v]
            self.balance[v] = Fraction(0)
            self.paid[v] += 1
            self.speed[v] = self.alpha(self.paid[v] + 1)
        self.elected.append(c)
        return payments


def purchasable_count(e: Election) -> int:
    return sum(1 for c in range(e.m) if e.approvers(c))


def run_phragmen(
    e: Election,
    alpha: SpeedSchedule | None = None,
    beta: CostFunction | None = None,
    tie: TieRule | None = None,
    mode: str = "exact",
    eps: float = 1e-9,
) -> PhragmenTrace:
    """
    Run the purchase process until ``e.k`` candidates are bought.

    Parameters
    ----------
    e : Election
    alpha : SpeedSchedule, optional
        Earning speeds; constant 1 when omitted.
    beta : CostFunction, optional
        Candidate prices; constant 1 when omitted.
    tie : TieRule, optional
        Defaults to the lowest candidate id.
    mode : {"exact", "float", "auto"}
        ``exact`` uses rationals and fails on irrational prices; ``auto``
        falls back to ``float`` in that case.
    eps : float
        Relative tolerance for simultaneous purchases in float mode.

    Returns
    -------
    PhragmenTrace
    """
    alpha = alpha or SpeedSchedule.constant()
    beta = beta or CostFunction.constant()
    tie = tie or TieRule.lex()
    tie.check(e.m)
    if purchasable_count(e) < e.k:
        raise PhragmenError(
            f"insufficient purchasable candidates: {purchasable_count(e)} approved, k={e.k}"
        )
    if mode == "auto":
        try:
            return _run_exact(e, alpha, beta, tie)
        except IrrationalValue:
            return _run_float(e, alpha, beta, tie, eps)
    if mode == "exact":
        try:
            return _run_exact(e, alpha, beta, tie)
        except IrrationalValue as err:
            raise PhragmenError(f"exact mode impossible: {err}; use float mode") from None
    if mode == "float":
        return _run_float(e, alpha, beta, tie, eps)
    raise ValueError(f"unknown mode {mode!r}")


def _run_exact(e, alpha, beta, tie) -> PhragmenTrace:
    state = PhragmenState(e, alpha, beta)
    events = []
    earned = spent = Fraction(0)
    for _ in range(e.k):
        best, tied = None, []
        for c in state.costs:
            if c in state.elected:
                continue
            t = state.next_purchase_time(c)
            if best is None or t < best:
                best, tied = t, [c]
            elif t == best:
                tied.append(c)
        c = tie.pick(tied)
        earned += (best - state.now) * sum(state.speed, Fraction(0))
        state.advance(best)
        payments = state.buy(c)
        paid_total = sum(payments.values(), Fraction(0))
        spent += paid_total
        events.append(
            PurchaseEvent(
                time=best,
                candidate=c,
                payers=frozenset(payments),
                cost=state.costs[c],
                payments=payments,
                earned=earned,
                spent=spent,
                held=sum(state.balance, Fraction(0)),
            )
        )
    return PhragmenTrace(tuple(events), tuple(state.elected), tuple(state.balance), "exact")


def _run_float(e, alpha, beta, tie, eps) -> PhragmenTrace:
    A = e.matrix.astype(np.float64)
    n, m = A.shape
    counts = e.matrix.sum(axis=0)
    cost = np.full(m, np.inf)
    for c in np.flatnonzero(counts):
        cost[c] = beta.approx(Fraction(int(counts[c]), n))
    speeds = np.array([alpha.approx(i) for i in range(1, e.k + 2)])
    balance = np.zeros(n)
    paid = np.zeros(n, dtype=np.int64)
    speed = np.full(n, speeds[0])
    open_ = counts > 0
    now = earned = spent = 0.0
    events, committee = [], []
    for _ in range(e.k):
        held = balance @ A
        rate = speed @ A
        with np.errstate(divide="ignore", invalid="ignore"):
            dt = np.where(open_, (cost - held) / rate, np.inf)
        np.maximum(dt, 0.0, out=dt)
        c0 = int(np.argmin(dt))
        d = float(dt[c0])
        tol = eps * (d + float(cost[c0] / rate[c0]))
        tied = np.flatnonzero(dt <= d + tol)
        c = tie.pick(tied.tolist()) if len(tied) > 1 else c0
        earned += d * float(speed.sum())
        balance += d * speed
        now += d
        payers = np.flatnonzero(e.matrix[:, c])
        payments = dict(zip(payers.tolist(), balance[payers].tolist()))
        spent += float(balance[payers].sum())
        balance[payers] = 0.0
        paid[payers] += 1
        speed[payers] = speeds[np.minimum(paid[payers], e.k)]
        open_[c] = False
        committee.append(c)
        events.append(
            PurchaseEvent(
                time=now,
                candidate=c,
                payers=frozenset(payments),
                cost=float(cost[c]),
                payments=payments,
                earned=earned,
                spent=spent,
                held=float(balance.sum()),
            )
        )
    return PhragmenTrace(tuple(events), tuple(committee), tuple(balance.tolist()), "float")


def phragmen_committee(e, alpha=None, beta=None, tie=None, mode="float", eps=1e-9):
    """Committee only, in purchase order."""
    return run_phragmen(e, alpha, beta, tie, mode, eps).committee

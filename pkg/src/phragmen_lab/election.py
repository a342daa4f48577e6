"""
Approval-based elections: data model, serialization and basic queries.

Candidates and voters are 0-based internally. Human-facing output (the line
format, error messages, CLI reports) uses 1-based labels ``c1..cm`` and
``v1..vn``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class ElectionError(ValueError):
    """Raised for malformed election documents or invalid elections."""


@dataclass(frozen=True)
class Election:
    """
    An approval-based election ``(C, V, A, k)``.

    Parameters
    ----------
    candidates : tuple of str
        Candidate labels; the index of a label is the candidate id.
    approvals : tuple of frozenset of int
        Approval set of every voter, indexed by voter id.
    k : int
        Committee size, ``1 <= k <= m``.
    allow_empty : bool
        Permit voters with empty approval sets. Only generated (Euclidean)
        elections use this; such voters never pay and never score.
    """

    candidates: tuple[str, ...]
    approvals: tuple[frozenset[int], ...]
    k: int
    allow_empty: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(
            self, "approvals", tuple(frozenset(a) for a in self.approvals)
        )
        m = len(self.candidates)
        if m == 0:
            raise ElectionError("election has no candidates")
        if len(set(self.candidates)) != m:
            seen = set()
            for label in self.candidates:
                if label in seen:
                    raise ElectionError(f"duplicate candidate label {label!r}")
                seen.add(label)
        if not self.approvals:
            raise ElectionError("election has no voters")
        for v, approved in enumerate(self.approvals):
            if not approved and not self.allow_empty:
                raise ElectionError(f"voter v{v + 1}: empty approval set")
            for c in approved:
                if not isinstance(c, (int, np.integer)) or not 0 <= c < m:
                    raise ElectionError(
                        f"voter v{v + 1}: candidate index {c!r} out of range"
                    )
        if not isinstance(self.k, (int, np.integer)) or not 1 <= self.k <= m:
            raise ElectionError(f"k={self.k!r} out of range [1, {m}]")

    @classmethod
    def from_lists(cls, approvals, k, candidates=None, allow_empty=False):
        """Build an election from 0-based approval lists."""
        approvals = [frozenset(a) for a in approvals]
        if candidates is None:
            m = 1 + max((max(a) for a in approvals if a), default=0)
            candidates = [f"c{i + 1}" for i in range(m)]
        return cls(tuple(candidates), tuple(approvals), k, allow_empty)

    @classmethod
    def from_matrix(cls, matrix, k, candidates=None, allow_empty=False):
        """Build an election from a boolean ``n x m`` approval matrix."""
        matrix = np.asarray(matrix, dtype=bool)
        n, m = matrix.shape
        if candidates is None:
            candidates = [f"c{i + 1}" for i in range(m)]
        approvals = tuple(frozenset(np.flatnonzero(row).tolist()) for row in matrix)
        e = cls(tuple(candidates), approvals, k, allow_empty)
        e.__dict__["matrix"] = matrix.copy()
        e.matrix.setflags(write=False)
        return e

    @property
    def n(self) -> int:
        return len(self.approvals)

    @property
    def m(self) -> int:
        return len(self.candidates)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense boolean approval matrix, voters by candidates (read-only)."""
        mat = np.zeros((self.n, self.m), dtype=bool)
        for v, approved in enumerate(self.approvals):
            mat[v, list(approved)] = True
        mat.setflags(write=False)
        return mat

    @cached_property
    def _approvers(self) -> tuple[frozenset[int], ...]:
        buckets = [set() for _ in range(self.m)]
        for v, approved in enumerate(self.approvals):
            for c in approved:
                buckets[c].add(v)
        return tuple(frozenset(b) for b in buckets)

    def approvers(self, c: int) -> frozenset[int]:
        """Voters approving candidate ``c`` (possibly empty)."""
        return self._approvers[c]

    def representation_count(self, committee: Iterable[int], v: int) -> int:
        """``|W ∩ A(v)|``."""
        return len(self.approvals[v].intersection(committee))

    def with_k(self, k: int) -> "Election":
        return Election(self.candidates, self.approvals, k, self.allow_empty)

    def without_candidate(self, c: int) -> "Election":
        """Remove ``c`` from the candidate set and every ballot; ``k`` is kept."""
        remap = {old: new for new, old in enumerate(i for i in range(self.m) if i != c)}
        approvals = tuple(frozenset(remap[x] for x in a if x != c) for a in self.approvals)
        candidates = tuple(label for i, label in enumerate(self.candidates) if i != c)
        return Election(candidates, approvals, min(self.k, len(candidates)), self.allow_empty)

    def voter_types(self) -> list[tuple[frozenset[int], list[int]]]:
        """Distinct ballots with their voters, ordered by first occurrence."""
        groups: dict[frozenset[int], list[int]] = {}
        for v, approved in enumerate(self.approvals):
            groups.setdefault(approved, []).append(v)
        return list(groups.items())


def committee_labels(e: Election, committee: Iterable[int]) -> list[str]:
    return [e.candidates[c] for c in committee]


# ---------------------------------------------------------------------------
# serialization


def serialize_election(e: Election, fmt: str = "json") -> str:
    """Render ``e`` in the ``json`` or ``lines`` format."""
    if fmt == "json":
        doc = {
            "candidates": list(e.candidates),
            "k": int(e.k),
            "approvals": [sorted(int(c) for c in a) for a in e.approvals],
        }
        if e.allow_empty:
            doc["allow_empty"] = True
        return json.dumps(doc) + "\n"
    if fmt == "lines":
        rows = [f"{e.m} {e.n} {e.k}"]
        rows += [" ".join(str(c + 1) for c in sorted(a)) for a in e.approvals]
        return "\n".join(rows) + "\n"
    raise ElectionError(f"unknown format {fmt!r}")


def parse_election(text: str, fmt: str | None = None, allow_empty: bool = False) -> Election:
    """
    Parse an election document.

    Parameters
    ----------
    text : str
        The document.
    fmt : {"json", "lines"}, optional
        Format; guessed from the first non-blank character when omitted.
    allow_empty : bool
        Accept voters with empty approval sets. A JSON document may also
        request this with ``"allow_empty": true``.
    """
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "lines"
    if fmt == "json":
        return _parse_json(text, allow_empty)
    if fmt == "lines":
        return _parse_lines(text, allow_empty)
    raise ElectionError(f"unknown format {fmt!r}")


def _parse_json(text: str, allow_empty: bool) -> Election:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ElectionError(f"line {err.lineno}: invalid JSON ({err.msg})") from None
    if not isinstance(doc, dict):
        raise ElectionError("top-level JSON value must be an object")
    for key in ("candidates", "k", "approvals"):
        if key not in doc:
            raise ElectionError(f"field {key!r}: missing")
    candidates = doc["candidates"]
    if not isinstance(candidates, list) or not all(isinstance(c, str) for c in candidates):
        raise ElectionError("field 'candidates': expected a list of strings")
    k = doc["k"]
    if isinstance(k, bool) or not isinstance(k, int):
        raise ElectionError("field 'k': expected an integer")
    approvals = doc["approvals"]
    if not isinstance(approvals, list):
        raise ElectionError("field 'approvals': expected a list of lists")
    allow_empty = allow_empty or bool(doc.get("allow_empty", False))
    ballots = []
    for v, ballot in enumerate(approvals):
        if not isinstance(ballot, list) or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in ballot
        ):
            raise ElectionError(f"field 'approvals[{v}]': expected a list of integers")
        if not ballot and not allow_empty:
            raise ElectionError(f"field 'approvals[{v}]': empty approval set")
        if len(set(ballot)) != len(ballot):
            raise ElectionError(f"field 'approvals[{v}]': repeated candidate")
        ballots.append(ballot)
    try:
        return Election(tuple(candidates), tuple(frozenset(b) for b in ballots), k, allow_empty)
    except ElectionError as err:
        raise ElectionError(f"field {_json_field(str(err))}: {err}") from None


def _json_field(msg: str) -> str:
    if msg.startswith("k="):
        return "'k'"
    if msg.startswith("duplicate candidate") or "no candidates" in msg:
        return "'candidates'"
    return "'approvals'"


def _parse_lines(text: str, allow_empty: bool) -> Election:
    lines = text.splitlines()
    numbered = [(i + 1, ln.strip()) for i, ln in enumerate(lines)]
    numbered = [(i, ln) for i, ln in numbered if not ln.startswith("#")]
    while numbered and not numbered[0][1]:
        numbered.pop(0)
    if not numbered:
        raise ElectionError("line 1: missing header 'm n k'")
    head_no, head = numbered[0]
    parts = head.split()
    if len(parts) != 3 or not all(_is_int(p) for p in parts):
        raise ElectionError(f"line {head_no}: header must be three integers 'm n k'")
    m, n, k = (int(p) for p in parts)
    if m < 1 or n < 1:
        raise ElectionError(f"line {head_no}: m and n must be positive")
    if not 1 <= k <= m:
        raise ElectionError(f"line {head_no}: k={k} out of range [1, {m}]")
    body = numbered[1:]
    # trailing blank lines are not voters
    while body and not body[-1][1]:
        body.pop()
    if len(body) != n:
        raise ElectionError(f"line {head_no}: header announces {n} voters, found {len(body)}")
    ballots = []
    for line_no, ln in body:
        tokens = ln.split()
        if not all(_is_int(t) for t in tokens):
            raise ElectionError(f"line {line_no}: candidate indices must be integers")
        idx = [int(t) for t in tokens]
        if not idx and not allow_empty:
            raise ElectionError(f"line {line_no}: empty approval set")
        for c in idx:
            if not 1 <= c <= m:
                raise ElectionError(f"line {line_no}: candidate index {c} out of range [1, {m}]")
        if len(set(idx)) != len(idx):
            raise ElectionError(f"line {line_no}: repeated candidate")
        ballots.append(frozenset(c - 1 for c in idx))
    candidates = tuple(f"c{i + 1}" for i in range(m))
    return Election(candidates, tuple(ballots), k, allow_empty)


def _is_int(token: str) -> bool:
    try:
        int(token)
    except ValueError:
        return False
    return True


def seven_voter_election(k: int = 3) -> Election:
    """Seven voters, six candidates: a small profile where c1 is popular and c6 ties c4."""
    approvals = [
        {0, 3, 5},  # v1: c1 c4 c6
        {0, 3, 5},  # v2
        {0, 3},  # v3
        {0, 4, 5},  # v4: c1 c5 c6
        {1, 4},  # v5: c2 c5
        {1},  # v6
        {2},  # v7
    ]
    return Election.from_lists(approvals, k, candidates=[f"c{i}" for i in range(1, 7)])


def hundred_voter_election() -> Election:
    """100 voters, 13 candidates, k=6: increasing earning speeds misbehave here."""
    approvals: list[set[int]] = []
    for v in range(1, 101):
        a: set[int] = set()
        if v <= 55:
            a.add(0)
        if v <= 30:
            a.update(range(1, 6))
        if v >= 51:
            a.update(range(6, 13))
        approvals.append(a)
    return Election.from_lists(approvals, 6, candidates=[f"c{i}" for i in range(1, 14)])


def random_election(rng, n: int, m: int, k: int) -> Election:
    """Ballot sizes uniform on ``[1, m]``, then a uniform subset of that size."""
    approvals = []
    for _ in range(n):
        size = int(rng.integers(1, m + 1))
        approvals.append(frozenset(int(c) for c in rng.choice(m, size=size, replace=False)))
    return Election(tuple(f"c{i + 1}" for i in range(m)), tuple(approvals), k)


def _check_committee(e: Election, committee: Sequence[int]) -> None:
    if len(set(committee)) != len(committee):
        raise ElectionError("committee has duplicate members")
    for c in committee:
        if not 0 <= c < e.m:
            raise ElectionError(f"committee member {c} out of range")

"""
One-dimensional Euclidean elections and the voting-committee model.

Individuals (voters, candidates, issues) sit in ``[-1, 1]`` at positions
drawn from a beta distribution stretched onto that interval. A voter
approves every candidate within distance ``xi``. Each individual holds a
binary opinion on every issue, drawn from Bernoulli variables whose success
probability is :func:`p_eta`, and an elected committee decides each issue by
strict majority.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .election import Election


@dataclass(frozen=True)
class EuclideanConfig:
    beta_a: float
    beta_b: float
    n: int
    m: int
    k: int
    xi: float

    def __post_init__(self):
        if not (self.beta_a > 0 and self.beta_b > 0):
            raise ValueError("beta shape parameters must be positive")
        if not 0 < self.xi <= 0.5:
            raise ValueError(f"xi={self.xi} outside (0, 0.5]")
        if not (self.n >= 1 and 1 <= self.k <= self.m):
            raise ValueError("need n >= 1 and 1 <= k <= m")


@dataclass(frozen=True)
class IssueModelConfig:
    p: int = 100
    tau: float = 30.0
    delta: float = 120.0

    def __post_init__(self):
        if self.p < 1 or self.tau <= 0 or self.delta < 0:
            raise ValueError("need p >= 1, tau > 0 and delta >= 0")


@dataclass(frozen=True)
class PositionedElection:
    election: Election
    voter_positions: np.ndarray
    candidate_positions: np.ndarray
    xi: float


def sample_beta_scaled(a: float, b: float, rng: np.random.Generator, size=None):
    """
    ``2X - 1`` with ``X ~ Beta(a, b)``, where ``X = G_a / (G_a + G_b)`` for
    independent gamma variates (numpy draws those with Marsaglia and Tsang's
    squeeze method, boosted for shapes below one).
    """
    if not (a > 0 and b > 0):
        raise ValueError("beta shape parameters must be positive")
    ga = rng.standard_gamma(a, size)
    gb = rng.standard_gamma(b, size)
    return 2.0 * ga / (ga + gb) - 1.0


def radius_approvals(voters: np.ndarray, candidates: np.ndarray, xi: float) -> np.ndarray:
    """Boolean ``n x m`` matrix of ``|v - c| <= xi``."""
    return np.abs(voters[:, None] - candidates[None, :]) <= xi


def election_from_positions(voters, candidates, xi: float, k: int) -> PositionedElection:
    voters = np.asarray(voters, dtype=float)
    candidates = np.asarray(candidates, dtype=float)
    if voters.size and (voters.min() < -1 or voters.max() > 1):
        raise ValueError("voter positions must lie in [-1, 1]")
    if candidates.size and (candidates.min() < -1 or candidates.max() > 1):
        raise ValueError("candidate positions must lie in [-1, 1]")
    matrix = radius_approvals(voters, candidates, xi)
    election = Election.from_matrix(matrix, k, allow_empty=True)
    return PositionedElection(election, voters, candidates, xi)


def build_euclidean_election(cfg: EuclideanConfig, rng: np.random.Generator) -> PositionedElection:
    """Voters first, then candidates, from the same beta distribution."""
    voters = sample_beta_scaled(cfg.beta_a, cfg.beta_b, rng, cfg.n)
    candidates = sample_beta_scaled(cfg.beta_a, cfg.beta_b, rng, cfg.m)
    return election_from_positions(voters, candidates, cfg.xi, cfg.k)


def has_consecutive_ones(matrix: np.ndarray, column_order) -> bool:
    """Whether every row's ones are contiguous once columns are put in ``column_order``."""
    ordered = np.asarray(matrix, dtype=bool)[:, list(column_order)]
    for row in ordered:
        hits = np.flatnonzero(row)
        if hits.size and hits[-1] - hits[0] + 1 != hits.size:
            return False
    return True


def is_candidate_interval(pe: PositionedElection) -> bool:
    """Consecutive-ones check with candidates sorted by position (stable on ties)."""
    order = np.argsort(pe.candidate_positions, kind="stable")
    return has_consecutive_ones(pe.election.matrix, order)


def p_eta(eta, x, tau: float, delta: float):
    """
    Probability that an individual at ``eta`` supports an issue at ``x``.

    Same side, issue further out: ``1 / (tau (1-|eta|) |eta-x| + 1)``.
    Same side, issue no further out than ``eta``: 1. Opposite side or either
    at zero: ``1 / ((delta |eta| + tau) |x| + 1)``. Works elementwise on arrays.
    """
    eta = np.asarray(eta, dtype=float)
    x = np.asarray(x, dtype=float)
    same_side = x * eta > 0
    further = np.abs(x) > np.abs(eta)
    out = np.where(
        same_side,
        np.where(further, 1.0 / (tau * (1 - np.abs(eta)) * np.abs(eta - x) + 1), 1.0),
        1.0 / ((delta * np.abs(eta) + tau) * np.abs(x) + 1),
    )
    return out if out.ndim else float(out)


def generate_issue_profile(positions, issue_positions, cfg: IssueModelConfig,
                           rng: np.random.Generator) -> np.ndarray:
    """Individuals x issues 0/1 matrix; entry ``(i, j)`` is 1 w.p. ``p_eta(pos_i, issue_j)``."""
    positions = np.asarray(positions, dtype=float)
    issue_positions = np.asarray(issue_positions, dtype=float)
    prob = p_eta(positions[:, None], issue_positions[None, :], cfg.tau, cfg.delta)
    return (rng.random(prob.shape) < prob).astype(np.int8)


def committee_decisions(member_vectors) -> np.ndarray:
    """1 where strictly more than half of the members hold 1; ties keep the status quo (0)."""
    members = np.asarray(member_vectors)
    if members.ndim != 2 or members.shape[0] == 0:
        raise ValueError("expected a nonempty members x issues matrix")
    return (2 * members.sum(axis=0) > members.shape[0]).astype(np.int8)


def decision_satisfaction(voter_vectors, decisions):
    """
    Share of issues on which a voter agrees with the decisions. A single
    vector gives an exact Fraction; a matrix gives one float per row.
    """
    voters = np.asarray(voter_vectors)
    decisions = np.asarray(decisions)
    if voters.shape[-1] != decisions.shape[-1]:
        raise ValueError("vector lengths differ")
    if voters.ndim == 1:
        return Fraction(int((voters == decisions).sum()), decisions.size)
    return (voters == decisions[None, :]).mean(axis=1)

"""
Simulation experiments over Euclidean elections.

A scenario is one (beta distribution, approval radius) pair. Every run of a
scenario samples one election and one issue profile and scores all
configured rules on them, so the rules are compared on paired samples.
Runs get independent random streams keyed by (seed, scenario, run index),
which makes the output independent of the number of worker processes.
"""

from __future__ import annotations

import csv
import gzip
import io
import json
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .euclidean import (
    EuclideanConfig,
    IssueModelConfig,
    build_euclidean_election,
    committee_decisions,
    generate_issue_profile,
    sample_beta_scaled,
)
from .functions import as_fraction
from .phragmen import PhragmenError
from .rules import RuleSpec, parse_rule

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

DEFAULT_RULES = {
    "degr": "alpha:geomshift:1/2",
    "lin": "classic",
    "regr": "beta:exp:9/10:100",
}
DEFAULT_DISTRIBUTIONS = ((2, 2), (2, 4), (Fraction(1, 2), 2), (Fraction(1, 2), Fraction(1, 2)))
DEFAULT_GROUPS = ("[-1,-1/3)", "[-1/3,1/3]", "(1/3,1]")
MEASURES = ("representatives", "decisions")
FLOAT_EPS = 1e-9


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    low: Fraction
    high: Fraction
    low_closed: bool
    high_closed: bool

    _PATTERN = re.compile(r"^\s*([\[(])\s*([^,]+?)\s*,\s*([^\])]+?)\s*([\])])\s*$")

    @classmethod
    def parse(cls, text: str) -> "Interval":
        match = cls._PATTERN.match(text)
        if not match:
            raise ConfigError(f"bad interval {text!r}; expected e.g. '[-1,-1/3)'")
        lo, a, b, hi = match.groups()
        try:
            low, high = as_fraction(a), as_fraction(b)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad interval bounds in {text!r}") from None
        if low > high:
            raise ConfigError(f"empty interval {text!r}")
        return cls(low, high, lo == "[", hi == "]")

    def mask(self, x: np.ndarray) -> np.ndarray:
        lo, hi = float(self.low), float(self.high)
        left = x >= lo if self.low_closed else x > lo
        right = x <= hi if self.high_closed else x < hi
        return left & right

    def __str__(self) -> str:
        return f"{'[' if self.low_closed else '('}{self.low},{self.high}{']' if self.high_closed else ')'}"


def check_partition(groups: list[Interval]) -> None:
    """Raise unless the intervals, in order, partition ``[-1, 1]``."""
    if not groups:
        raise ConfigError("at least one group is required")
    if groups[0].low != -1 or not groups[0].low_closed:
        raise ConfigError("groups must start at a closed -1")
    if groups[-1].high != 1 or not groups[-1].high_closed:
        raise ConfigError("groups must end at a closed 1")
    for left, right in zip(groups, groups[1:]):
        if left.high != right.low or left.high_closed == right.low_closed:
            raise ConfigError(f"groups {left} and {right} do not meet in exactly one point")


@dataclass(frozen=True)
class SimConfig:
    distributions: tuple[tuple[Fraction, Fraction], ...] = DEFAULT_DISTRIBUTIONS
    xi: tuple[float, ...] = (0.2,)
    rules: tuple[tuple[str, str], ...] = tuple(DEFAULT_RULES.items())
    n: int = 200
    m: int = 150
    k: int = 25
    runs: int = 1000
    p: int = 100
    tau: float = 30.0
    delta: float = 120.0
    seed: int = 0
    groups: tuple[str, ...] = DEFAULT_GROUPS

    def __post_init__(self):
        object.__setattr__(
            self,
            "distributions",
            tuple((as_fraction(a), as_fraction(b)) for a, b in self.distributions),
        )
        object.__setattr__(self, "xi", tuple(float(x) for x in self.xi))
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if not self.distributions or not self.xi or not self.rules:
            raise ConfigError("distributions, xi and rules must be nonempty")
        labels = [label for label, _ in self.rules]
        if len(set(labels)) != len(labels):
            raise ConfigError("rule labels must be unique")
        try:
            for a, b in self.distributions:
                for xi in self.xi:
                    EuclideanConfig(float(a), float(b), self.n, self.m, self.k, xi)
            IssueModelConfig(self.p, self.tau, self.delta)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        check_partition(self.intervals)
        for _, text in self.rules:
            parse_rule(text)

    @property
    def intervals(self) -> list[Interval]:
        return [Interval.parse(g) for g in self.groups]

    @property
    def rule_specs(self) -> list[tuple[str, RuleSpec]]:
        return [(label, parse_rule(text)) for label, text in self.rules]

    @property
    def issue_model(self) -> IssueModelConfig:
        return IssueModelConfig(self.p, self.tau, self.delta)

    def scenarios(self) -> list[tuple[int, tuple[Fraction, Fraction], int, float]]:
        return [
            (d * len(self.xi) + x, dist, x, xi)
            for d, dist in enumerate(self.distributions)
            for x, xi in enumerate(self.xi)
        ]


def distribution_label(dist) -> str:
    return f"{dist[0]},{dist[1]}"


def load_config(path: str | Path, **overrides) -> SimConfig:
    """Read a TOML or JSON config; keyword overrides win over file values."""
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"{path}: {err}") from None
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(raw)


_KEYS = {"distributions", "xi", "rules", "n", "m", "k", "runs", "p", "tau", "delta", "seed", "groups"}


def config_from_mapping(raw: dict) -> SimConfig:
    unknown = set(raw) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs = dict(raw)
    if "distributions" in kwargs:
        dists = []
        for d in kwargs["distributions"]:
            if isinstance(d, str):
                d = d.split(",")
            if len(d) != 2:
                raise ConfigError(f"distribution {d!r} needs two shape parameters")
            try:
                dists.append((as_fraction(d[0]), as_fraction(d[1])))
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"bad distribution {d!r}") from None
        kwargs["distributions"] = tuple(dists)
    if "xi" in kwargs:
        xi = kwargs["xi"]
        kwargs["xi"] = tuple(xi) if isinstance(xi, (list, tuple)) else (xi,)
    if "rules" in kwargs:
        rules = kwargs["rules"]
        if isinstance(rules, dict):
            kwargs["rules"] = tuple(rules.items())
        else:
            kwargs["rules"] = tuple((text, text) for text in rules)
    if "groups" in kwargs:
        kwargs["groups"] = tuple(kwargs["groups"])
    try:
        return SimConfig(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None


# ---------------------------------------------------------------------------
# one run


@dataclass
class RunResult:
    positions: np.ndarray  # voter positions
    representatives: dict[str, np.ndarray]  # per rule, |W ∩ A(v)| per voter
    agreements: dict[str, np.ndarray]  # per rule, matching decisions (out of p) per voter
    error: str | None = None


def run_stream(seed: int, scenario: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(scenario, run)))


def simulate_run(cfg: SimConfig, scenario: int, dist, xi: float, run: int) -> RunResult:
    rng = run_stream(cfg.seed, scenario, run)
    a, b = float(dist[0]), float(dist[1])
    pe = build_euclidean_election(EuclideanConfig(a, b, cfg.n, cfg.m, cfg.k, xi), rng)
    issues = sample_beta_scaled(a, b, rng, cfg.p)
    everyone = np.concatenate([pe.voter_positions, pe.candidate_positions])
    profile = generate_issue_profile(everyone, issues, cfg.issue_model, rng)
    voters, candidates = profile[: cfg.n], profile[cfg.n :]
    matrix = pe.election.matrix
    reps, agree = {}, {}
    for label, rule in cfg.rule_specs:
        try:
            committee = list(rule.committee(pe.election, mode="float", eps=FLOAT_EPS))
        except PhragmenError as err:
            return RunResult(pe.voter_positions, reps, agree, f"run {run}, rule {label}: {err}")
        reps[label] = matrix[:, committee].sum(axis=1).astype(np.int64)
        decisions = committee_decisions(candidates[committee])
        agree[label] = (voters == decisions[None, :]).sum(axis=1).astype(np.int64)
    return RunResult(pe.voter_positions, reps, agree)


def _run_task(args) -> RunResult:
    return simulate_run(*args)


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class FiveNumber:
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float


def five_number(values) -> FiveNumber | None:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return None
    q = np.quantile(values, [0, 0.25, 0.5, 0.75, 1], method="linear")
    return FiveNumber(int(values.size), *(float(v) for v in q))


def group_boxplot_stats(positions, satisfactions, groups) -> list[FiveNumber | None]:
    """
    Five-number summary of the satisfactions of voters in each group; None
    marks an empty group. Quartiles use linear interpolation between order
    statistics, whiskers are the plain minimum and maximum.
    """
    positions = np.asarray(positions, dtype=float)
    satisfactions = np.asarray(satisfactions, dtype=float)
    if positions.shape != satisfactions.shape:
        raise ValueError("positions and satisfactions differ in length")
    intervals = [g if isinstance(g, Interval) else Interval.parse(g) for g in groups]
    return [five_number(satisfactions[g.mask(positions)]) for g in intervals]


def pooled_stats(values: np.ndarray, scale: int = 1) -> tuple[float, float]:
    """Mean and population std of integer data divided by ``scale``, summed exactly."""
    values = np.asarray(values, dtype=np.int64)
    n = values.size
    total = int(values.sum())
    squares = int((values * values).sum())
    mean = Fraction(total, n * scale)
    var = Fraction(n * squares - total * total, n * n * scale * scale)
    return float(mean), float(np.sqrt(float(var)))


@dataclass
class ScenarioSummary:
    distribution: tuple[Fraction, Fraction]
    xi: float
    runs: int
    stats: dict[tuple[str, str], tuple[float, float]] = field(default_factory=dict)
    boxes: dict[tuple[str, str], list[FiveNumber | None]] = field(default_factory=dict)
    error: str | None = None


@dataclass
class RunSummary:
    config: SimConfig
    scenarios: list[ScenarioSummary]

    @property
    def errors(self) -> list[str]:
        return [s.error for s in self.scenarios if s.error]

    def stat(self, dist, xi: float, rule: str, measure: str) -> tuple[float, float]:
        dist = (as_fraction(dist[0]), as_fraction(dist[1]))
        for s in self.scenarios:
            if s.distribution == dist and s.xi == float(xi):
                return s.stats[rule, measure]
        raise KeyError((dist, xi))

    def summary_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(
            ["distribution", "xi", "rule", "representatives_avg", "representatives_std",
             "decisions_avg", "decisions_std"]
        )
        for s in self.scenarios:
            if s.error:
                continue
            for label, _ in self.config.rules:
                row = [distribution_label(s.distribution), repr(s.xi), label]
                for measure in MEASURES:
                    avg, std = s.stats[label, measure]
                    row += [f"{avg:.6f}", f"{std:.6f}"]
                w.writerow(row)
        return out.getvalue()

    def boxplot_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["distribution", "xi", "rule", "measure", "group", "count",
                    "min", "q1", "median", "q3", "max"])
        for s in self.scenarios:
            if s.error:
                continue
            for label, _ in self.config.rules:
                for measure in MEASURES:
                    for group, box in zip(self.config.groups, s.boxes[label, measure]):
                        head = [distribution_label(s.distribution), repr(s.xi), label, measure, group]
                        if box is None:
                            w.writerow(head + [0, "", "", "", "", ""])
                        else:
                            w.writerow(head + [box.count] + [f"{v:.6f}" for v in
                                       (box.min, box.q1, box.median, box.q3, box.max)])
        return out.getvalue()


def _summarize(cfg: SimConfig, dist, xi, results: list[RunResult]) -> ScenarioSummary:
    summary = ScenarioSummary(dist, xi, len(results))
    failed = [r.error for r in results if r.error]
    if failed:
        summary.error = f"scenario {distribution_label(dist)} xi={xi}: {len(failed)} runs failed; first: {failed[0]}"
        return summary
    positions = np.concatenate([r.positions for r in results])
    for label, _ in cfg.rules:
        reps = np.concatenate([r.representatives[label] for r in results])
        agree = np.concatenate([r.agreements[label] for r in results])
        summary.stats[label, "representatives"] = pooled_stats(reps)
        summary.stats[label, "decisions"] = pooled_stats(agree, cfg.p)
        summary.boxes[label, "representatives"] = group_boxplot_stats(positions, reps, cfg.intervals)
        summary.boxes[label, "decisions"] = group_boxplot_stats(positions, agree / cfg.p, cfg.intervals)
    return summary


def _raw_rows(cfg, dist, xi, results):
    for run, r in enumerate(results):
        if r.error:
            continue
        for label, _ in cfg.rules:
            reps, agree = r.representatives[label], r.agreements[label]
            for v in range(cfg.n):
                yield [distribution_label(dist), repr(xi), run, label, v + 1,
                       repr(float(r.positions[v])), int(reps[v]), int(agree[v])]


def run_experiment(cfg: SimConfig, workers: int = 1, raw_path: str | Path | None = None,
                   chunksize: int = 8) -> RunSummary:
    """
    Run every scenario of ``cfg``. Results are reduced in run-index order,
    so the summary is identical for any ``workers``. With ``raw_path``, a
    gzipped per-voter CSV is written as well.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    raw_file = raw_writer = None
    if raw_path is not None:
        raw_file = gzip.GzipFile(raw_path, "wb", mtime=0)
        raw_text = io.TextIOWrapper(raw_file, encoding="utf-8", newline="")
        raw_writer = csv.writer(raw_text, lineterminator="\n")
        raw_writer.writerow(["distribution", "xi", "run", "rule", "voter", "position",
                             "representatives", "decisions"])
    scenarios = []
    try:
        for index, dist, _, xi in cfg.scenarios():
            tasks = [(cfg, index, dist, xi, run) for run in range(cfg.runs)]
            if pool is None:
                results = [_run_task(t) for t in tasks]
            else:
                results = list(pool.map(_run_task, tasks, chunksize=chunksize))
            summary = _summarize(cfg, dist, xi, results)
            if summary.error:
                log.error(summary.error)
            scenarios.append(summary)
            if raw_writer is not None:
                raw_writer.writerows(_raw_rows(cfg, dist, xi, results))
            log.info("scenario %s xi=%s done", distribution_label(dist), xi)
    finally:
        if pool is not None:
            pool.shutdown()
        if raw_writer is not None:
            raw_text.close()
    return RunSummary(cfg, scenarios)


def write_outputs(summary: RunSummary, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "summary.csv", out_dir / "boxplot.csv"]
    paths[0].write_text(summary.summary_csv())
    paths[1].write_text(summary.boxplot_csv())
    return paths

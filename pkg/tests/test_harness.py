import csv
import gzip
import io
import json

import numpy as np
import pytest

from phragmen_lab.euclidean import EuclideanConfig, build_euclidean_election
from phragmen_lab.harness import (
    ConfigError,
    Interval,
    SimConfig,
    check_partition,
    config_from_mapping,
    five_number,
    group_boxplot_stats,
    load_config,
    pooled_stats,
    run_experiment,
    run_stream,
    simulate_run,
    write_outputs,
)

TINY = dict(n=30, m=20, k=5, runs=3, p=20, seed=7)


def tiny(**kw) -> SimConfig:
    return SimConfig(**{**TINY, **kw})


@pytest.mark.parametrize(
    "text, point, inside",
    [("[-1,-1/3)", -1 / 3, False), ("[-1/3,1/3]", -1 / 3, True), ("(1/3,1]", 1 / 3, False),
     ("(1/3, 1]", 1.0, True), ("[0.5,0.5]", 0.5, True)],
)
def test_interval_membership(text, point, inside):
    assert bool(Interval.parse(text).mask(np.array([point]))[0]) is inside


@pytest.mark.parametrize("text", ["-1,0", "[1,0]", "[a,1)", "[0,1"])
def test_interval_parse_errors(text):
    with pytest.raises(ConfigError):
        Interval.parse(text)


@pytest.mark.parametrize(
    "groups",
    [[], ["(-1,1]"], ["[-1,0)", "[0,1)"], ["[-1,0]", "[0,1]"], ["[-1,0)", "(0,1]"], ["[-1,0)", "[1/2,1]"]],
)
def test_bad_partitions(groups):
    with pytest.raises(ConfigError):
        check_partition([Interval.parse(g) for g in groups])


def test_partition_assigns_every_point_once(rng):
    groups = [Interval.parse(g) for g in ("[-1,-1/3)", "[-1/3,1/3]", "(1/3,1]")]
    check_partition(groups)
    x = np.concatenate([rng.uniform(-1, 1, 1000), [-1, -1 / 3, 1 / 3, 1]])
    assert (sum(g.mask(x).astype(int) for g in groups) == 1).all()


def test_five_number():
    box = five_number([1, 2, 3, 4, 5])
    assert (box.min, box.q1, box.median, box.q3, box.max) == (1, 2, 3, 4, 5)
    flat = five_number([0.7] * 4)
    assert flat.q1 == flat.q3 == flat.min == flat.max == 0.7
    assert five_number([]) is None


def test_group_boxplot_stats_empty_group():
    boxes = group_boxplot_stats([-0.9, -0.8, 0.9], [1, 2, 3], ["[-1,-1/3)", "[-1/3,1/3]", "(1/3,1]"])
    assert boxes[0].count == 2 and boxes[1] is None and boxes[2].median == 3


def test_pooled_stats_matches_numpy(rng):
    values = rng.integers(0, 100, 5000)
    mean, std = pooled_stats(values, 100)
    assert mean == pytest.approx(values.mean() / 100)
    assert std == pytest.approx(values.std() / 100)
    assert pooled_stats(np.full(10, 3)) == (3.0, 0.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        tiny(runs=0)
    with pytest.raises(ConfigError):
        tiny(xi=(0.7,))
    with pytest.raises(ConfigError):
        tiny(rules=(("a", "classic"), ("a", "classic")))
    with pytest.raises(ConfigError):
        config_from_mapping({"bogus": 1})


def test_load_toml_and_json(tmp_path):
    toml = tmp_path / "c.toml"
    toml.write_text('distributions = [["1/2", 2]]\nxi = 0.3\nruns = 5\n[rules]\nlin = "classic"\n')
    cfg = load_config(toml, runs=2)
    assert cfg.runs == 2 and cfg.xi == (0.3,) and cfg.rules == (("lin", "classic"),)
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"distributions": ["2,4"], "rules": ["classic"], "seed": 3}))
    cfg = load_config(js)
    assert cfg.rules == (("classic", "classic"),) and cfg.seed == 3
    js.write_text(json.dumps({"runz": 3}))
    with pytest.raises(ConfigError):
        load_config(js)


def test_streams_are_independent_of_order():
    a = run_stream(1, 2, 3).random(4)
    run_stream(1, 0, 0).random(100)
    assert np.array_equal(a, run_stream(1, 2, 3).random(4))
    assert not np.array_equal(a, run_stream(1, 3, 2).random(4))


def test_representatives_are_committee_coverage():
    cfg = tiny(distributions=((2, 2),))
    result = simulate_run(cfg, 0, (2, 2), 0.2, 1)
    # replay the stream to recover the election
    pe = build_euclidean_election(EuclideanConfig(2, 2, 30, 20, 5, 0.2), run_stream(7, 0, 1))
    assert np.array_equal(pe.voter_positions, result.positions)
    for label, rule in cfg.rule_specs:
        committee = rule.committee(pe.election, mode="float")
        assert len(committee) == 5
        per_voter = [len(pe.election.approvals[v] & set(committee)) for v in range(30)]
        assert result.representatives[label].tolist() == per_voter
        assert (0 <= result.agreements[label]).all() and (result.agreements[label] <= 20).all()


def test_run_experiment_outputs(tmp_path):
    cfg = tiny(distributions=((2, 2), ("1/2", "1/2")))
    summary = run_experiment(cfg, raw_path=tmp_path / "raw.csv.gz")
    assert not summary.errors
    rows = list(csv.DictReader(io.StringIO(summary.summary_csv())))
    assert len(rows) == 2 * 3
    for row in rows:
        assert 0 <= float(row["decisions_avg"]) <= 1
        assert float(row["representatives_avg"]) >= 0
    boxes = list(csv.DictReader(io.StringIO(summary.boxplot_csv())))
    assert len(boxes) == 2 * 3 * 2 * 3
    with gzip.open(tmp_path / "raw.csv.gz", "rt") as fh:
        raw = list(csv.DictReader(fh))
    assert len(raw) == 2 * 3 * 3 * 30
    reps = [int(r["representatives"]) for r in raw if r["distribution"] == "2,2" and r["rule"] == "lin"]
    assert np.mean(reps) == pytest.approx(summary.stat((2, 2), 0.2, "lin", "representatives")[0])
    paths = write_outputs(summary, tmp_path / "out")
    assert [p.name for p in paths] == ["summary.csv", "boxplot.csv"]


def test_workers_do_not_change_results():
    cfg = tiny(distributions=((2, 4),), runs=6)
    serial = run_experiment(cfg, workers=1)
    parallel = run_experiment(cfg, workers=2, chunksize=1)
    assert serial.summary_csv() == parallel.summary_csv()
    assert serial.boxplot_csv() == parallel.boxplot_csv()


def test_insufficient_candidates_reported():
    # a tiny radius leaves fewer than k approved candidates
    cfg = tiny(n=3, m=6, k=5, xi=(0.01,), rules=(("lin", "classic"),), distributions=((2, 2),))
    summary = run_experiment(cfg)
    assert summary.errors and "runs failed" in summary.errors[0]
    assert summary.summary_csv().count("\n") == 1

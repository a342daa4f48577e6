import csv
import json

import pytest

from phragmen_lab.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main

ELECTION = '{"candidates": ["a", "b", "c"], "k": 2, "approvals": [[0, 1], [1, 2], [0], [0, 1]]}'


@pytest.fixture
def election_file(tmp_path):
    path = tmp_path / "e.json"
    path.write_text(ELECTION)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(capsys, election_file, tmp_path):
    code, out, _ = run(capsys, "validate", election_file)
    assert code == EXIT_OK and out.strip() == "OK (n=4, m=3, k=2)"
    bad = tmp_path / "bad.json"
    bad.write_text('{"candidates": ["a"], "k": 2, "approvals": [[0]]}')
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == EXIT_RUNTIME and out.strip()


def test_usage_errors(capsys, election_file):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_USAGE
    assert run(capsys, "run", "--rule", "alpha:nope", "--election", election_file)[0] == EXIT_USAGE
    assert run(capsys, "run", "--rule", "classic", "--election", election_file,
               "--tie", "fixed:x")[0] == EXIT_USAGE
    assert run(capsys, "verify", "pjr", "--rule", "classic")[0] == EXIT_USAGE
    assert run(capsys, "bounds", "--family", "gamma-9", "--k", "5")[0] != EXIT_OK


def test_run_rules(capsys, election_file):
    code, out, _ = run(capsys, "run", "--rule", "classic", "--election", election_file, "--trace")
    report = json.loads(out)
    assert code == EXIT_OK and sorted(report["committee"]) == [1, 2]
    code, out, _ = run(capsys, "run", "--rule", "thiele:pav", "--election", election_file, "--mode", "exact")
    assert code == EXIT_OK and json.loads(out)["labels"] == ["a", "b"]


def test_run_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "run", "--rule", "classic", "--election", str(tmp_path / "none.json"))
    assert code == EXIT_RUNTIME and "phragmen-lab" in err


def test_verify_random_classic_has_no_violations(capsys):
    code, out, _ = run(capsys, "verify", "pjr", "--rule", "classic", "--random", "8,6,3,42,100")
    assert code == EXIT_OK
    assert out.strip().splitlines()[-1] == "0 violations"
    report = json.loads(out[: out.rindex("}") + 1])
    assert report["checked"] + report["skipped"] == 100


def test_verify_iuac_and_monotone(capsys):
    code, out, _ = run(capsys, "verify", "iuac", "--rule", "alpha:geom:1/2", "--random", "6,5,3,1,20")
    assert code == EXIT_OK and out.strip().endswith("0 violations")
    code, out, _ = run(capsys, "verify", "monotone", "--rule", "beta:const",
                       "--random", "6,5,2,1,10", "--k-max", "4")
    assert code == EXIT_OK and out.strip().endswith("0 violations")


def test_bounds_grid(capsys, tmp_path):
    out_file = tmp_path / "b.csv"
    code, _, _ = run(capsys, "bounds", "--family", "beta-exp:0.1", "--k", "50", "--out", str(out_file))
    assert code == EXIT_OK
    rows = list(csv.reader(out_file.open()))
    assert rows[0] == ["gamma", "value_over_k", "derivative"]
    assert len(rows) == 1 + 99  # gamma = 0.01 .. 0.99


def test_gen_then_validate(capsys, tmp_path):
    out = tmp_path / "g.json"
    pos = tmp_path / "p.csv"
    code, _, _ = run(capsys, "gen", "--beta", "1/2,2", "--n", "40", "--m", "30", "--k", "5",
                     "--xi", "0.1", "--seed", "3", "--out", str(out), "--positions", str(pos))
    assert code == EXIT_OK
    code, text, _ = run(capsys, "validate", str(out))
    assert code == EXIT_OK and text.startswith("OK (n=40, m=30, k=5)")
    assert len(pos.read_text().splitlines()) == 1 + 40 + 30


def test_simulate_tiny(capsys, tmp_path):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text(
        'distributions = [[2, 2], [2, 4], ["1/2", 2], ["1/2", "1/2"]]\n'
        "xi = 0.2\nn = 30\nm = 20\nk = 5\nruns = 2\np = 20\n"
    )
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "o"), "--raw")
    assert code == EXIT_OK
    rows = list(csv.DictReader((tmp_path / "o" / "summary.csv").open()))
    assert len(rows) == 12
    assert (tmp_path / "o" / "raw.csv.gz").exists()
    assert run(capsys, "simulate", "--config", str(tmp_path / "missing.toml"))[0] == EXIT_RUNTIME

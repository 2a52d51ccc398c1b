import json
import subprocess
import sys

import pytest

from assertevo.cli import main
from assertevo.expr import NUM, Signature
from assertevo.state import StateRepo, save

FAST = ["--internal-budget", "gens:15", "--population-size", "60",
        "--validation-size", "1000", "--deficiency-budget", "1000", "--threads", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_subjects(capsys):
    code, out, _ = run(capsys, "subjects")
    assert code == 0
    names = [s["name"] for s in json.loads(out)]
    assert "fast_floor" in names and len(names) >= 5
    floor = json.loads(out)[names.index("fast_floor")]
    assert floor["initial_assertion"] == "(y == result) && (x > result)"
    assert floor["mutants"]


def test_init_states_and_eval(capsys, tmp_path):
    repo = tmp_path / "repo.json"
    code, out, _ = run(capsys, "init-states", "--subject", "fast_floor", "--n", "50",
                       "--seed", "2", "--out", str(repo))
    assert code == 0 and out == ""
    data = json.loads(repo.read_text())
    assert data["subject"] == "fast_floor" and data["positives"]
    code, out, _ = run(capsys, "eval", "--repo", str(repo), "--assertion", "(0 != 0)")
    f = json.loads(out)
    assert code == 0 and f["fn"] == 0 and f["fp"] == 50


def test_init_states_unknown_mutant(capsys, tmp_path):
    code, _, err = run(capsys, "init-states", "--subject", "abs", "--mutants", "M99",
                       "--out", str(tmp_path / "r.json"))
    assert code == 2 and "M99" in err


def test_eval_empty_repo(capsys, tmp_path):
    path = tmp_path / "empty.json"
    save(StateRepo(Signature([("x", NUM)])), path)
    code, out, _ = run(capsys, "eval", "--repo", str(path), "--assertion", "(0 == 0)")
    assert code == 0
    assert json.loads(out) == {"fp": 0, "fn": 0, "size": 3}


def test_eval_parse_error_exit_3(capsys, tmp_path):
    path = tmp_path / "empty.json"
    save(StateRepo(Signature([("x", NUM)])), path)
    code, out, err = run(capsys, "eval", "--repo", str(path), "--assertion", "x >")
    assert code == 3 and out == "" and err
    code, _, _ = run(capsys, "eval", "--repo", str(path), "--assertion", "x + (0 == 0)")
    assert code == 3


def test_eval_schema_error_exit_4(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"signature": [], "positives": "no"}))
    code, _, err = run(capsys, "eval", "--repo", str(bad), "--assertion", "(0 == 0)")
    assert code == 4 and err
    code, _, _ = run(capsys, "eval", "--repo", str(tmp_path / "missing.json"),
                     "--assertion", "(0 == 0)")
    assert code == 4


def test_evolve(capsys, tmp_path):
    repo = tmp_path / "repo.json"
    run(capsys, "init-states", "--subject", "fast_floor", "--n", "100", "--seed", "1",
        "--out", str(repo))
    code, out, _ = run(capsys, "evolve", "--repo", str(repo), "--internal-budget", "gens:30",
                       "--seed", "1", "--threads", "1")
    assert code == 0
    result = json.loads(out)
    assert result["fitness"]["fp"] <= result["initial"]["fp"]
    assert result["assertion"]


def test_improve_writes_report(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "improve", "--subject", "abs", "--seed", "1", *FAST,
                       "--out", str(out_path))
    assert code == 0 and out == ""
    report = json.loads(out_path.read_text())
    assert report["validation"]["improved"]["fp"] == 0
    assert report["config"]["seed"] == 1


def test_improve_unknown_subject_exit_2(capsys):
    code, _, err = run(capsys, "improve", "--subject", "nosuch", *FAST)
    assert code == 2 and "nosuch" in err


def test_improve_bad_assertion_exit_3(capsys):
    code, _, _ = run(capsys, "improve", "--subject", "abs", "--assertion", "zz > 0", *FAST)
    assert code == 3


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--subject", "fast_floor", "--assertion",
                       "(y == result) && (x >= result) && (x < (result+1))")
    assert code == 0
    v = json.loads(out)
    assert v["fp"] == 0 and v["mutation_score"] == 1.0


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["improve", "--subject", "abs", "--bogus"],
    ["improve", "--subject", "abs", "--crossover-rate", "1.5"],
    ["improve", "--subject", "abs", "--internal-budget", "soon"],
    ["init-states", "--subject", "abs", "--n", "0", "--out", "x.json"],
    ["eval", "--repo", "x.json"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "assertevo", "subjects"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    json.loads(proc.stdout)

import io
import json
import subprocess
import sys

import pytest

from deddens import __version__
from deddens.cli import main

MINIMAL = {
    "weights": [1, 1],
    "blocks": [[1, 2]],
    "vectors": {"u": [[1, 0], [1, 0]], "w": [[1, 0], [1, 0]]},
    "tests": [{"kind": "quasi_isometry", "args": {}}],
    "seed": 0,
}


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_run_minimal_json(tmp_path, capsys):
    assert main(["run", write(tmp_path, MINIMAL)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["records"][0]["outcome"] is True
    assert report["consistency_failure_count"] == 0


def test_run_table_and_out(tmp_path, capsys):
    out = tmp_path / "r.txt"
    assert main(["run", write(tmp_path, MINIMAL), "--format", "table", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert "quasi_isometry" in out.read_text()


def test_run_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(MINIMAL)))
    assert main(["run", "-"]) == 0
    assert json.loads(capsys.readouterr().out)["records"]


@pytest.mark.parametrize(
    "change",
    [{"weights": [1, -1]}, {"blocks": [[1], [1, 2]]}, {"tests": [{"kind": "nope"}]}],
)
def test_validation_errors_exit_1(tmp_path, change):
    doc = dict(MINIMAL, **change)
    assert main(["run", write(tmp_path, doc)]) == 1


def test_missing_file_and_bad_json_exit_1(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == 1
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert main(["run", str(p)]) == 1


def test_consistency_failure_exit_2(tmp_path):
    doc = dict(MINIMAL, tests=[{"kind": "quasi_isometry", "args": {}, "expect": False}])
    assert main(["run", write(tmp_path, doc)]) == 2
    doc = dict(MINIMAL, vectors={"u": [1, 1], "w": [1, -1]})
    assert main(["run", write(tmp_path, doc)]) == 2


def test_tolerance_flags_reach_the_report(tmp_path, capsys):
    assert main(["run", write(tmp_path, MINIMAL), "--tol-residual", "1e-7", "--max-n", "12"]) == 0
    tol = json.loads(capsys.readouterr().out)["tolerances"]
    assert tol["residual_tol"] == 1e-7 and tol["max_power"] == 12


def test_gen_then_run(tmp_path, capsys):
    path = tmp_path / "g.json"
    assert main(["gen", "--kind", "quasinormal_wct", "--dim", "5", "--blocks", "2",
                 "--seed", "3", "--out", str(path)]) == 0
    assert main(["gen", "--kind", "quasinormal_wct", "--dim", "5", "--blocks", "2", "--seed", "3"]) == 0
    assert capsys.readouterr().out == path.read_text()
    assert main(["run", str(path)]) == 0


def test_gen_rejects_bad_spec():
    assert main(["gen", "--kind", "rank_one", "--dim", "40"]) == 1
    assert main(["gen", "--kind", "rank_one", "--dim", "4", "--blocks", "9"]) == 1


def test_suite_single_criterion(capsys):
    assert main(["suite", "--only", "2", "--count", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [c["id"] for c in report["criteria"]] == [2]


def test_console_script_version():
    out = subprocess.run(
        [sys.executable, "-m", "deddens.cli", "--version"], capture_output=True, text=True, check=True
    )
    assert __version__ in out.stdout

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from dptrack.cli import main
from dptrack.ising import load_ising, load_qubo

FIXTURE = Path(__file__).resolve().parent.parent / "configs" / "fixture_3track.ini"


def run(*argv):
    return main([str(a) for a in argv])


def read_tree(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_to_qubo_single_field(tmp_path):
    src = tmp_path / "one.ising"
    src.write_text("ising 1\nh 0 1\n")
    assert run("to-qubo", src, "--out", tmp_path / "o") == 0
    q = load_qubo(tmp_path / "o" / "network.qubo")
    assert q.Q.tolist() == [[2.0]] and q.offset == -1.0


def test_run_all_fixture_scores_perfect(tmp_path):
    assert run("run-all", "--config", FIXTURE, "--out", tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["segments"]["efficiency"] == 1.0
    assert report["segments"]["purity"] == 1.0
    assert report["tracks"]["efficiency"] == 1.0
    assert report["solves"][0]["method"] == "meanfield"
    for name in ("event.json", "segments.json", "network.ising", "network.qubo",
                 "result.json", "energy_trace.csv"):
        assert (tmp_path / name).is_file()


def test_run_all_equals_stages(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = ("--config", FIXTURE, "--seed", 4)
    assert run("run-all", *cfg, "--out", a) == 0
    assert run("generate", *cfg, "--out", b) == 0
    assert run("build-net", b / "event.json", *cfg, "--out", b) == 0
    assert run("to-qubo", b / "network.ising", "--out", b) == 0
    assert run("solve", b / "network.ising", *cfg, "--out", b) == 0
    assert run("evaluate", b / "result.json", b / "event.json", *cfg, "--out", b) == 0
    assert read_tree(a) == read_tree(b)


def test_rerun_reproduces_outputs(tmp_path):
    out = tmp_path / "o"
    assert run("run-all", "--seed", 2, "--solver", "sa", "--out", out) == 0
    first = read_tree(out)
    shutil.rmtree(out)
    assert run("run-all", "--seed", 2, "--solver", "sa", "--out", out) == 0
    assert read_tree(out) == first


def test_seed_changes_event(tmp_path):
    run("generate", "--seed", 1, "--out", tmp_path / "a")
    run("generate", "--seed", 2, "--out", tmp_path / "b")
    assert (tmp_path / "a" / "event.json").read_bytes() != (tmp_path / "b" / "event.json").read_bytes()


@pytest.mark.parametrize("method", ["exact", "sa", "sqa", "meanfield"])
def test_solve_each_method(tmp_path, method):
    src = tmp_path / "p.ising"
    src.write_text("ising 3\nh 0 0.5\nJ 0 1 -1\nJ 1 2 0.25\n")
    assert run("solve", src, "--solver", method, "--out", tmp_path) == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["method"] == method and result["n"] == 3


def test_solve_qubo_file(tmp_path):
    src = tmp_path / "p.qubo"
    src.write_text("qubo 1 -1\n0 0 2\n")
    assert run("solve", src, "--solver", "exact", "--out", tmp_path) == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["best_energy"] == -1.0 and result["best_state"] == [0.0]


def test_embed_writes_physical_problem(tmp_path):
    src = tmp_path / "p.ising"
    src.write_text("ising 3\nh 0 0.5\nJ 0 1 -1\nJ 1 2 0.25\n")
    assert run("embed", src, "--grid", 1, "--out", tmp_path) == 0
    assert load_ising(tmp_path / "physical.ising").n == 8
    assert json.loads((tmp_path / "embedding.json").read_text())["grid_n"] == 1


def test_unknown_solver_is_usage_error(tmp_path, capsys):
    src = tmp_path / "p.ising"
    src.write_text("ising 1\nh 0 1\n")
    assert run("solve", src, "--solver", "quantum", "--out", tmp_path) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and err.strip().splitlines()[-1].startswith("ERROR 1:")


def test_embed_without_grid_is_usage_error(tmp_path, capsys):
    src = tmp_path / "p.ising"
    src.write_text("ising 1\nh 0 1\n")
    assert run("embed", src, "--out", tmp_path) == 1
    assert capsys.readouterr().err.startswith("ERROR 1:")


def test_malformed_input_exit_2(tmp_path, capsys):
    bad = tmp_path / "e.json"
    bad.write_text('{"geometry": {}}')
    assert run("build-net", bad, "--out", tmp_path) == 2
    assert capsys.readouterr().err.startswith("ERROR 2:")
    assert run("to-qubo", tmp_path / "missing.ising", "--out", tmp_path) == 2
    src = tmp_path / "p.ising"
    src.write_text("ising 2\nJ 0 5 1\n")
    assert run("to-qubo", src, "--out", tmp_path) == 2


def test_bad_config_exit_2(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[generator]\nn_tracks = many\n")
    assert run("generate", "--config", cfg, "--out", tmp_path) == 2


def test_capacity_exit_3(tmp_path, capsys):
    src = tmp_path / "p.ising"
    src.write_text("ising 5\nJ 0 4 1\n")
    assert run("embed", src, "--grid", 1, "--out", tmp_path) == 3
    assert capsys.readouterr().err.startswith("ERROR 3:")
    cfg = tmp_path / "c.ini"
    cfg.write_text("[cuts]\nmax_neurons = 3\n")
    assert run("run-all", "--config", cfg, "--out", tmp_path / "o") == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dptrack", "generate", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "event.json").is_file()

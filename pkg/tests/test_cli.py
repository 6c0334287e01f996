"""The command-line front end: subcommands, exit codes, caching and determinism."""

import json

import pytest

from toricchow.cli import FanCache, digest, normalize_recipe, run
from toricchow.fan import Cone, fan_from_json, fan_to_json, projective_line_power
from toricchow.subdivide import build_theta, star_subdivision


@pytest.fixture(autouse=True)
def no_cache(monkeypatch):
    monkeypatch.delenv("TORIC_CACHE_DIR", raising=False)


def test_build_theta_writes_a_fan(tmp_path, capsys):
    out = tmp_path / "fan.json"
    assert run(["build", "theta", "--n", "2", "--r", "1", "--d", "1", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["rank"] == 2
    assert fan_from_json(data) == build_theta(2, 1, (1,)).fan
    assert data["recipe"] == {"op": "theta", "n": 2, "r": 1, "d": [1]}


def test_build_to_stdout_is_deterministic(capsys):
    assert run(["build", "gamma", "--n", "3", "--r", "1"]) == 0
    first = capsys.readouterr().out
    assert run(["build", "gamma", "--n", "3", "--r", "1"]) == 0
    assert capsys.readouterr().out == first
    assert len(json.loads(first)["max_cones"]) == 30


def test_cache_hits_are_byte_identical(tmp_path, monkeypatch, capsys):
    args = ["build", "theta", "--n", "2", "--r", "1", "--d", "1"]
    assert run(args) == 0
    fresh = capsys.readouterr().out
    monkeypatch.setenv("TORIC_CACHE_DIR", str(tmp_path / "cache"))
    assert run(args) == 0
    assert capsys.readouterr().out == fresh
    entries = list((tmp_path / "cache").iterdir())
    assert len(entries) == 1
    assert run(args) == 0
    captured = capsys.readouterr()
    assert captured.out == fresh and captured.err == ""


def test_tampered_cache_entry_is_rebuilt(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TORIC_CACHE_DIR", str(tmp_path))
    args = ["build", "p1n", "--n", "2"]
    assert run(args) == 0
    fresh = capsys.readouterr().out
    (entry,) = tmp_path.iterdir()
    data = json.loads(entry.read_text())
    data["fan"]["rays"][0] = [7, 7]
    entry.write_text(json.dumps(data))
    assert run(args) == 0
    captured = capsys.readouterr()
    assert captured.out == fresh
    assert "corrupt cache entry" in captured.err
    # the entry was repaired
    assert run(args) == 0
    assert capsys.readouterr().err == ""


def test_empty_cache_variable_disables_the_cache(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TORIC_CACHE_DIR", "")
    monkeypatch.chdir(tmp_path)
    assert run(["build", "p1n", "--n", "1"]) == 0
    assert list(tmp_path.iterdir()) == []
    assert FanCache.from_env().root is None


def test_recipes_are_normalized():
    assert normalize_recipe({"op": "theta", "n": "3", "r": 1, "d": 1}) == {"op": "theta", "n": 3, "r": 1, "d": [1]}
    assert digest({"a": 1, "b": 2}) == digest({"b": 2, "a": 1})


def test_check_reports_the_missing_cone(tmp_path, capsys):
    fan, _ = star_subdivision(projective_line_power(3), Cone([(1, 0, 0), (0, 1, 0), (0, 0, -1)]))
    path = tmp_path / "p13.json"
    path.write_text(json.dumps(fan_to_json(fan)))
    assert run(["check", "--fan", str(path), "--r", "0"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["very_r_standard"] is False
    assert report["r_standard"] is True


def test_order_writes_an_admissible_permutation(tmp_path):
    out = tmp_path / "order.json"
    assert run(["order", "--theta-recipe", '{"n": 2, "r": 1, "d": [1]}', "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["admissible"] and sorted(data["order"]) == list(range(len(data["fan"]["max_cones"])))


def test_order_accepts_a_fan_file_with_its_recipe(tmp_path):
    fan = tmp_path / "fan.json"
    assert run(["build", "theta", "--n", "2", "--r", "1", "--d", "1", "--out", str(fan)]) == 0
    assert run(["order", "--theta-recipe", str(fan), "--out", str(tmp_path / "o.json")]) == 0


def test_chow_presentations(tmp_path, capsys):
    fan = tmp_path / "fan.json"
    assert run(["build", "theta", "--n", "2", "--r", "1", "--d", "1", "--out", str(fan)]) == 0
    assert run(["chow", "--fan", str(fan), "--p", "1"]) == 0
    full = json.loads(capsys.readouterr().out)
    assert full["rank"] == 8 and full["torsion"] == []
    assert run(["chow", "--fan", str(fan), "--p", "1", "--flat", "--r", "1"]) == 0
    flat = json.loads(capsys.readouterr().out)
    assert flat["rank"] == 7 and flat["flat"]


def test_flat_chow_needs_a_recipe(tmp_path, capsys):
    path = tmp_path / "bare.json"
    path.write_text(json.dumps(fan_to_json(projective_line_power(2))))
    assert run(["chow", "--fan", str(path), "--p", "0", "--flat", "--r", "1"]) == 2
    assert "recipe" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["build", "theta", "--n", "5"],
        ["build", "circle", "--n", "2"],
        ["check", "--fan", "/nonexistent/fan.json", "--r", "0"],
        ["verify", "--suite", "nothing"],
        ["verify", "--suite", "chow", "--max-n", "6"],
        ["order", "--theta-recipe", "not json"],
        [],
    ],
)
def test_usage_errors_exit_with_two(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err.startswith("toricchow: error:")


def test_malformed_fan_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["chow", "--fan", str(path), "--p", "0"]) == 2
    path.write_text(json.dumps({"rank": 2, "rays": [[1, 0]], "max_cones": [[0, 5]]}))
    assert run(["chow", "--fan", str(path), "--p", "0"]) == 2


def test_unsafe_large_lifts_the_cap(capsys):
    assert run(["build", "p1n", "--n", "5", "--unsafe-large"]) == 0
    assert json.loads(capsys.readouterr().out)["rank"] == 5


@pytest.mark.parametrize("suite", ["subdivide", "ordering", "chow", "complexes"])
def test_small_suites_pass(suite, tmp_path, capsys):
    report = tmp_path / "report.json"
    assert run(["verify", "--suite", suite, "--max-n", "2", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["ok"] and data["results"]
    assert "passed" in capsys.readouterr().err


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run(["verify", "--suite", "complexes", "--max-n", "2", "--r", "1", "--report", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_theorem_suite_reports_the_cycle_level_gap(tmp_path):
    report = tmp_path / "theorem.json"
    code = run(["verify", "--suite", "theorem", "--r", "1", "--d", "1", "--p", "0", "--max-m", "2", "--report", str(report)])
    data = json.loads(report.read_text())
    results = {r["check"]: r for r in data["results"]}
    assert results["simplicial identities"]["ok"]
    acyc = results["acyclicity"]["report"]
    assert acyc["ch_exact"] and acyc["square_zero"]
    # the Chow-level complex is exact but the cycle-level one is not, so the suite fails
    assert not acyc["z_exact"]
    assert code == 1 and not data["ok"]

import json
import shutil

import numpy as np
import pytest

from conftest import config_path
from nashpde.cli import EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_VERIFICATION, main
from nashpde.io.csv_dump import read_field_csv, read_slab_csv


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    # keep the repository config.yaml out of the settings chain
    monkeypatch.chdir(tmp_path)


def _run(command, config, out, *flags):
    return main([command, str(config), "--out", str(out), "--quiet", *flags])


def _report(out):
    return json.loads((out / "report.json").read_text(encoding="utf-8"))


def test_solve_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    assert _run("solve", config_path("demo_small.json"), out) == EXIT_OK
    doc = _report(out)
    assert doc["mode"] == "symmetric"
    assert doc["solver"] == "cg"
    assert doc["converged"] is True
    assert doc["residual"] <= 1e-10
    assert read_slab_csv(str(out / "control_player1.csv")).shape == (6, 2)
    assert read_slab_csv(str(out / "control_player2.csv")).shape == (6, 2)
    assert read_field_csv(str(out / "state.csv")).shape == (7, 9)

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "solve"
    assert manifest["exit_code"] == EXIT_OK
    assert any(p.endswith("report.json") for p in manifest["outputs"])


def test_solve_zero_problem(tmp_path):
    out = tmp_path / "zero"
    assert _run("solve", config_path("zero.json"), out) == EXIT_OK
    doc = _report(out)
    assert doc["iterations"] == 0
    assert not np.any(read_slab_csv(str(out / "control_player1.csv")))


def test_solve_general_mode_uses_gmres(tmp_path):
    out = tmp_path / "general"
    assert _run("solve", config_path("general_small.json"), out) == EXIT_OK
    doc = _report(out)
    assert doc["mode"] == "general"
    assert doc["solver"] == "gmres"


def test_cg_on_general_config_is_a_config_error(tmp_path):
    assert _run("solve", config_path("general_small.json"), tmp_path / "o", "--solver", "cg") == EXIT_CONFIG


def _tiny_alpha_game(tmp_path, alpha=1e-9):
    doc = json.loads(open(config_path("general_small.json"), encoding="utf-8").read())
    for player in doc["players"]:
        player["alpha"] = alpha
    game = tmp_path / "tiny_alpha.json"
    game.write_text(json.dumps(doc), encoding="utf-8")
    return game


def test_tiny_alpha_exits_non_converged_on_default_settings(tmp_path):
    out = tmp_path / "stall"
    assert _run("solve", _tiny_alpha_game(tmp_path), out) == EXIT_NONCONVERGENCE
    report = _report(out)
    assert report["converged"] is False
    assert report["exit_code"] == EXIT_NONCONVERGENCE
    assert report["ellipticity_min"] < 0.0
    names = [n.split(":")[0] for n in report["notes"]]
    assert "small-alpha" in names
    assert "ellipticity-failure" in names
    assert "not-converged" in names
    assert (out / "control_player1.csv").exists()
    assert (out / "manifest.json").exists()


def test_missing_config_file(tmp_path):
    assert _run("solve", tmp_path / "nope.json", tmp_path / "o") == EXIT_CONFIG


def test_solve_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("solve", config_path("demo_small.json"), a, "--seed", "4") == EXIT_OK
    assert _run("solve", config_path("demo_small.json"), b, "--seed", "4") == EXIT_OK
    doc_a, doc_b = _report(a), _report(b)
    doc_a.pop("timings")
    doc_b.pop("timings")
    assert doc_a == doc_b
    assert (a / "state.csv").read_bytes() == (b / "state.csv").read_bytes()


def test_verify_passes_on_demo(tmp_path):
    out = tmp_path / "verify"
    assert _run("verify", config_path("demo_small.json"), out, "--max-pairs", "2") == EXIT_OK
    doc = _report(out)
    assert doc["passed"] is True
    names = [c["name"] for c in doc["checks"]]
    assert "constant-difference[J_coop]" in names
    assert "argmin[J_{1,2}]" in names
    assert len(doc["equivalence"]) == 3


def test_verify_general_mode_skips_equivalence(tmp_path):
    out = tmp_path / "verify"
    assert _run("verify", config_path("general_small.json"), out) == EXIT_OK
    doc = _report(out)
    assert doc["equivalence"] == []
    assert "self-adjointness" not in [c["name"] for c in doc["checks"]]


def test_verify_with_displayed_coefficients_fails(tmp_path):
    out = tmp_path / "literal"
    assert _run("verify", config_path("demo_small.json"), out, "--paper-literal") == EXIT_VERIFICATION
    doc = _report(out)
    assert doc["passed"] is False
    assert doc["first_failure"] == "constant-difference[J_coop]"


def test_oracle_agrees(tmp_path):
    out = tmp_path / "oracle"
    assert _run("oracle", config_path("demo_small.json"), out, "--rtol", "1e-12", "--dump-dense") == EXIT_OK
    doc = _report(out)
    assert doc["dimension"] == 24
    assert doc["symmetry_defect"] < 1e-12
    assert doc["min_eigenvalue"] >= 0.05 - 1e-10
    assert doc["direct_vs_iterative"] <= 1e-8
    assert (out / "dense_A.csv").exists()


def test_oracle_dimension_cap(tmp_path):
    settings = tmp_path / "capped.yaml"
    settings.write_text("solver:\n  dense_cap: 10\n", encoding="utf-8")
    assert _run("oracle", config_path("demo_small.json"), tmp_path / "o", "--settings", str(settings)) == EXIT_CONFIG


def test_check_manifest(tmp_path):
    game = tmp_path / "game.json"
    shutil.copy(config_path("demo_small.json"), game)
    out = tmp_path / "run"

    assert _run("solve", game, tmp_path / "fresh", "--check-manifest") == EXIT_CONFIG
    assert _run("solve", game, out) == EXIT_OK
    assert _run("solve", game, out, "--check-manifest") == EXIT_OK

    doc = json.loads(game.read_text(encoding="utf-8"))
    doc["players"][0]["alpha"] = 0.06
    game.write_text(json.dumps(doc), encoding="utf-8")
    assert _run("solve", game, out, "--check-manifest") == EXIT_CONFIG

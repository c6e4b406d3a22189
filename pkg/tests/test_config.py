import json

import numpy as np
import pytest

from conftest import config_path
from nashpde.config import GameConfig, Settings
from nashpde.errors import ConfigError
from nashpde.problem.loader import load_config, load_config_dict


def _game(**overrides):
    doc = json.loads(open(config_path("zero.json"), encoding="utf-8").read())
    doc.update(overrides)
    return doc


def _write(tmp_path, doc, name="game.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


# ---------------- settings ---------------- #

def test_settings_defaults(monkeypatch):
    monkeypatch.delenv("NASHPDE__SOLVER__RTOL", raising=False)
    s = Settings.defaults()
    assert s.solver.rtol == 1e-10
    assert s.solver.restart == 50
    assert s.solver.max_iterations is None
    assert s.solver.dense_cap == 2000
    assert s.verify.max_pairs == 4
    assert s.threads >= 1


def test_settings_yaml_with_env_overlay(tmp_path, monkeypatch):
    path = tmp_path / "config.yaml"
    path.write_text("solver:\n  rtol: 1.0e-8\nprobes:\n  seed: 7\n", encoding="utf-8")
    monkeypatch.setenv("NASHPDE__SOLVER__RESTART", "12")
    monkeypatch.setenv("NASHPDE__RUNTIME__PROGRESS", "true")
    s = Settings.from_yaml(str(path))
    assert s.solver.rtol == 1e-8
    assert s.solver.restart == 12
    assert s.probes.seed == 7
    assert s.runtime.progress is True


def test_settings_missing_file_shows_example(tmp_path):
    with pytest.raises(ConfigError, match="rtol"):
        Settings.from_yaml(str(tmp_path / "nope.yaml"))


def test_settings_validation_names_key(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("probes:\n  equivalence_probes: 3\n", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        Settings.from_yaml(str(path))
    assert exc.value.key == "probes.equivalence_probes"


def test_repository_settings_file_parses():
    s = Settings.from_yaml(config_path("../config.yaml"))
    assert s.solver.rtol == 1e-10


# ---------------- game files ---------------- #

def test_minimal_config_loads():
    spec = load_config(config_path("zero.json"))
    assert spec.n_players == 1
    assert (spec.grid.nx, spec.grid.nt) == (4, 2)
    assert spec.common_target_mode
    assert not np.any(spec.f.values)


def test_demo_config_is_common_target():
    spec = load_config(config_path("demo.json"))
    assert spec.n_players == 2
    assert spec.common_target_mode
    assert spec.grid.nx == 50 and spec.grid.nt == 50


def test_general_config_is_not_common_target():
    spec = load_config(config_path("general_small.json"))
    assert not spec.common_target_mode


def test_overlapping_regions_rejected(tmp_path):
    doc = json.loads(open(config_path("demo_small.json"), encoding="utf-8").read())
    doc["grid"]["nx"] = 10
    doc["players"][0]["omega"] = [0.2, 0.4]
    doc["players"][1]["omega"] = [0.3, 0.5]
    doc["players"][0]["rho"] = doc["players"][1]["rho"] = {"kind": "constant", "params": [1.0]}
    with pytest.raises(ConfigError, match="overlapping control regions") as exc:
        load_config(_write(tmp_path, doc))
    assert exc.value.key == "players"


def test_touching_regions_share_a_node(tmp_path):
    doc = json.loads(open(config_path("demo_small.json"), encoding="utf-8").read())
    doc["players"][1]["omega"] = [0.375, 0.5]
    with pytest.raises(ConfigError, match="share grid node 3"):
        load_config(_write(tmp_path, doc))


def test_misaligned_omega_names_key(tmp_path):
    doc = _game()
    doc["players"][0]["omega"] = [0.3, 0.5]
    with pytest.raises(ConfigError, match="not a grid node") as exc:
        load_config(_write(tmp_path, doc))
    assert exc.value.key == "players[0].omega"


def test_negative_alpha_names_key(tmp_path):
    doc = _game()
    doc["players"][0]["alpha"] = -1.0
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, doc))
    assert exc.value.key == "players[0].alpha"


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        load_config_dict(_game(solver="cg"))


def test_malformed_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"grid": {"L": 1.0,', encoding="utf-8")
    with pytest.raises(ConfigError, match="failed to parse"):
        load_config(str(path))


def test_wrong_preset_arity_names_key(tmp_path):
    doc = _game()
    doc["data"]["f"] = {"kind": "gaussian", "params": [0.5, 0.1]}
    with pytest.raises(ConfigError, match="takes 3 params") as exc:
        load_config(_write(tmp_path, doc))
    assert exc.value.key == "data.f"


def test_tabulated_preset_from_csv(tmp_path):
    np.savetxt(tmp_path / "y0.csv", np.linspace(0.0, 1.0, 5)[None, :], delimiter=",")
    doc = _game()
    doc["data"]["y0"] = {"kind": "tabulated", "path": "y0.csv"}
    spec = load_config(_write(tmp_path, doc))
    np.testing.assert_allclose(spec.y0, np.linspace(0.0, 1.0, 5))


def test_tabulated_missing_file_names_key(tmp_path):
    doc = _game()
    doc["data"]["y0"] = {"kind": "tabulated", "path": "missing.csv"}
    with pytest.raises(ConfigError, match="Missing tabulated data file") as exc:
        load_config(_write(tmp_path, doc))
    assert exc.value.key == "data.y0"


def test_tabulated_requires_path():
    with pytest.raises(Exception):
        GameConfig(**_game(data={
            "f": {"kind": "tabulated"},
            "y0": {"kind": "constant", "params": [0.0]},
            "g1": {"kind": "constant", "params": [0.0]},
            "g2": {"kind": "constant", "params": [0.0]},
        }))

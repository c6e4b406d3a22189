from __future__ import annotations

import os
from typing import Any, Mapping

import numpy as np
from pydantic import ValidationError

from nashpde.config import GameConfig, PresetModel, _first_error_key
from nashpde.errors import ConfigError
from nashpde.io.tabulated import load_table
from nashpde.problem.presets import sample_preset, sample_space_time
from nashpde.problem.spec import GridSpec, PlayerSpec, ProblemSpec, build_problem
from nashpde.utils.logging import log


def load_config(path: str) -> ProblemSpec:
    """Read a game file and return the validated, fully sampled ProblemSpec."""
    cfg = GameConfig.from_file(path)
    spec = problem_from_config(cfg, base_dir=os.path.dirname(os.path.abspath(path)))
    log(
        f"loaded {path}: nx={spec.grid.nx} nt={spec.grid.nt} players={spec.n_players} "
        f"common_target_mode={spec.common_target_mode}"
    )
    return spec


def load_config_dict(data: Mapping[str, Any], base_dir: str = ".") -> ProblemSpec:
    try:
        cfg = GameConfig(**data)
    except ValidationError as ve:
        raise ConfigError(f"game description failed schema validation:\n{ve}", key=_first_error_key(ve)) from ve
    return problem_from_config(cfg, base_dir)


def problem_from_config(cfg: GameConfig, base_dir: str = ".") -> ProblemSpec:
    grid = GridSpec(cfg.grid.L, cfg.grid.T, cfg.grid.nx, cfg.grid.nt)

    def spatial(preset: PresetModel, key: str) -> np.ndarray:
        return _keyed(key, lambda: sample_preset(preset.kind, preset.params or [], grid, "space", _table(preset, base_dir)))

    def temporal(preset: PresetModel, key: str) -> np.ndarray:
        return _keyed(key, lambda: sample_preset(preset.kind, preset.params or [], grid, "time", _table(preset, base_dir)))

    def space_time(preset: PresetModel, key: str):
        return _keyed(key, lambda: sample_space_time(preset.kind, preset.params or [], grid, _table(preset, base_dir)))

    players = []
    for i, pm in enumerate(cfg.players):
        key = f"players[{i}]"
        players.append(
            PlayerSpec(
                alpha=pm.alpha,
                omega=pm.omega,
                rho=spatial(pm.rho, f"{key}.rho"),
                eta=spatial(pm.eta, f"{key}.eta"),
                target_yd=space_time(pm.yd, f"{key}.yd"),
                target_yT=spatial(pm.yT, f"{key}.yT"),
            )
        )

    return build_problem(
        grid,
        players,
        f=space_time(cfg.data.f, "data.f"),
        y0=spatial(cfg.data.y0, "data.y0"),
        g1=temporal(cfg.data.g1, "data.g1"),
        g2=temporal(cfg.data.g2, "data.g2"),
    )


def _table(preset: PresetModel, base_dir: str):
    if preset.kind != "tabulated":
        return None
    return load_table(preset.path, base_dir)


def _keyed(key: str, thunk):
    try:
        return thunk()
    except (FileNotFoundError, ValueError) as e:
        raise ConfigError(str(e), key=key) from e

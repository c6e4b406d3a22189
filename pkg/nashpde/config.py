from __future__ import annotations
import os
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from nashpde.errors import ConfigError


# ---------------- run settings (config.yaml) ---------------- #

class SolverSettings(BaseModel):
    rtol: float = Field(1e-10, gt=0)
    restart: int = Field(50, ge=1)
    # None -> 10 * dim
    max_iterations: Optional[int] = Field(None, ge=1)
    dense_cap: int = Field(2000, ge=1)


class ProbeSettings(BaseModel):
    seed: int = 0
    ellipticity_samples: int = Field(8, ge=1)
    unilateral_trials: int = Field(40, ge=1)
    equivalence_probes: int = Field(20, ge=10)
    fd_directions: int = Field(10, ge=1)
    fd_eps: float = Field(1e-5, gt=0)


class VerifySettings(BaseModel):
    max_pairs: int = Field(4, ge=1)
    fd_tolerance: float = 1e-6
    identity_tolerance: float = 1e-10
    equivalence_tolerance: float = 1e-8


class RuntimeSettings(BaseModel):
    # None -> os.cpu_count()
    threads: Optional[int] = Field(None, ge=1)
    progress: bool = False


class OutputSettings(BaseModel):
    out_dir: str = "./runs"


class Settings(BaseModel):
    solver: SolverSettings = SolverSettings()
    probes: ProbeSettings = ProbeSettings()
    verify: VerifySettings = VerifySettings()
    runtime: RuntimeSettings = RuntimeSettings()
    output: OutputSettings = OutputSettings()

    @classmethod
    def from_yaml(cls, path: str) -> "Settings":
        data = _read_mapping(path, example=_example_settings_yaml())

        # env overrides, e.g. NASHPDE__SOLVER__RTOL=1e-12
        overlays = _env_overlay(prefix="NASHPDE__")
        if overlays:
            data = _deep_merge_dicts(data, overlays)

        try:
            return cls(**data)
        except ValidationError as ve:
            raise ConfigError(
                "settings failed schema validation. Details:\n"
                f"{ve}\n\nExample settings:\n{_example_settings_yaml()}",
                key=_first_error_key(ve),
            ) from ve

    @classmethod
    def defaults(cls) -> "Settings":
        overlays = _env_overlay(prefix="NASHPDE__")
        return cls(**overlays)

    @property
    def threads(self) -> int:
        return self.runtime.threads or (os.cpu_count() or 1)


# ---------------- game file (JSON) ---------------- #

PresetKind = Literal["constant", "gaussian", "sine", "indicator", "tabulated"]


class PresetModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: PresetKind
    params: Optional[list[float]] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _params_or_path(self) -> "PresetModel":
        if self.kind == "tabulated":
            if not self.path:
                raise ValueError("tabulated preset requires 'path'")
        elif self.params is None:
            raise ValueError(f"preset '{self.kind}' requires 'params'")
        return self


class GridModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    L: float = Field(gt=0)
    T: float = Field(gt=0)
    nx: int = Field(ge=4)
    nt: int = Field(ge=2)


class DataModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    f: PresetModel
    y0: PresetModel
    g1: PresetModel
    g2: PresetModel


class PlayerModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(gt=0)
    omega: tuple[float, float]
    rho: PresetModel
    eta: PresetModel
    yd: PresetModel
    yT: PresetModel


class GameConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: GridModel
    data: DataModel
    players: list[PlayerModel] = Field(min_length=1)

    @classmethod
    def from_file(cls, path: str) -> "GameConfig":
        data = _read_mapping(path, example=_example_game_json(), required=("grid", "data", "players"))
        try:
            return cls(**data)
        except ValidationError as ve:
            raise ConfigError(
                f"game file {path} failed schema validation. Details:\n{ve}",
                key=_first_error_key(ve),
            ) from ve


# ---------------- utilities ---------------- #

def _read_mapping(path: str, example: str, required: tuple[str, ...] = ()) -> dict:
    # 1) existence
    if not os.path.exists(path):
        raise ConfigError(
            f"file not found at: {os.path.abspath(path)}\n\n"
            "Create it with content like:\n"
            f"{example}"
        )

    # 2) non-empty + parse (JSON documents are valid YAML)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if not text.strip():
        raise ConfigError(f"{os.path.abspath(path)} is empty.\nSee example:\n{example}")

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"failed to parse {path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigError(
            f"{os.path.abspath(path)} didn't parse into a mapping.\nSee example:\n{example}"
        )

    # 3) presence checks for top-level keys
    missing = [k for k in required if k not in data or data[k] is None]
    if missing:
        raise ConfigError(
            "missing required sections: " + ", ".join(missing) + "\nSee example:\n" + example,
            key=missing[0],
        )
    return data


def _first_error_key(ve: ValidationError) -> str | None:
    errors = ve.errors()
    if not errors:
        return None
    out = ""
    for part in errors[0].get("loc", ()):
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += ("." if out else "") + str(part)
    return out or None


def _deep_merge_dicts(base: dict, overlay: dict) -> dict:
    """Recursively merge overlay into base (overlay wins)."""
    out = dict(base)
    for k, v in overlay.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge_dicts(out[k], v)
        else:
            out[k] = v
    return out


def _env_overlay(prefix: str = "NASHPDE__") -> dict:
    """
    Collect ENV variables like:
      NASHPDE__SOLVER__RTOL=1e-12
    → {'solver': {'rtol': 1e-12}}
    """
    tree: dict = {}
    for key, val in os.environ.items():
        if not key.startswith(prefix):
            continue
        path = [p.lower() for p in key[len(prefix):].split("__")]
        cur = tree
        for part in path[:-1]:
            cur = cur.setdefault(part, {})
        cur[path[-1]] = _coerce(val)
    return tree


def _coerce(s: str):
    sl = s.strip().lower()
    if sl in {"true", "false"}:
        return sl == "true"
    if sl in {"none", "null"}:
        return None
    try:
        return int(sl)
    except ValueError:
        pass
    try:
        return float(sl)
    except ValueError:
        return s


def _example_settings_yaml() -> str:
    return (
        "solver:\n"
        "  rtol: 1.0e-10\n"
        "  restart: 50\n"
        "  max_iterations: null\n"
        "  dense_cap: 2000\n"
        "probes:\n"
        "  seed: 0\n"
        "  ellipticity_samples: 8\n"
        "  unilateral_trials: 40\n"
        "  equivalence_probes: 20\n"
        "  fd_directions: 10\n"
        "  fd_eps: 1.0e-5\n"
        "verify:\n"
        "  max_pairs: 4\n"
        "runtime:\n"
        "  threads: null\n"
        "  progress: false\n"
        "output:\n"
        "  out_dir: ./runs\n"
    )


def _example_game_json() -> str:
    return (
        "{\n"
        '  "grid": {"L": 1.0, "T": 1.0, "nx": 4, "nt": 2},\n'
        '  "data": {\n'
        '    "f":  {"kind": "constant", "params": [0.0]},\n'
        '    "y0": {"kind": "constant", "params": [0.0]},\n'
        '    "g1": {"kind": "constant", "params": [0.0]},\n'
        '    "g2": {"kind": "constant", "params": [0.0]}\n'
        "  },\n"
        '  "players": [\n'
        '    {"alpha": 1.0, "omega": [0.25, 0.5],\n'
        '     "rho": {"kind": "constant", "params": [0.0]},\n'
        '     "eta": {"kind": "constant", "params": [0.0]},\n'
        '     "yd":  {"kind": "constant", "params": [0.0]},\n'
        '     "yT":  {"kind": "constant", "params": [0.0]}}\n'
        "  ]\n"
        "}\n"
    )

"""Run manifest: what was run, on which config, and which files came out."""
from __future__ import annotations

import hashlib
import json
import os
from typing import Optional

from pydantic import BaseModel, Field

from nashpde import __version__
from nashpde.errors import ConfigError

MANIFEST_NAME = "manifest.json"


def config_hash(path: str) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


class RunManifest(BaseModel):
    config_path: str
    config_sha256: str
    command: str
    seed: int
    version: str = __version__
    outputs: list[str] = Field(default_factory=list)
    timings: dict[str, float] = Field(default_factory=dict)
    exit_code: Optional[int] = None

    @classmethod
    def start(cls, config_path: str, command: str, seed: int) -> "RunManifest":
        return cls(
            config_path=os.path.abspath(config_path),
            config_sha256=config_hash(config_path),
            command=command,
            seed=seed,
        )

    def add(self, path: str) -> str:
        if path not in self.outputs:
            self.outputs.append(path)
        return path

    def write(self, out_dir: str) -> str:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, MANIFEST_NAME)
        self.add(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.model_dump(), f, indent=2)
        return path

    @classmethod
    def read(cls, out_dir: str) -> "RunManifest":
        path = os.path.join(out_dir, MANIFEST_NAME)
        if not os.path.exists(path):
            raise ConfigError(f"no manifest at {os.path.abspath(path)}", key="--check-manifest")
        with open(path, "r", encoding="utf-8") as f:
            return cls(**json.load(f))


def check_manifest(out_dir: str, config_path: str) -> tuple[bool, str]:
    """Compare the stored config hash with the config file as it is now."""
    manifest = RunManifest.read(out_dir)
    current = config_hash(config_path)
    if manifest.config_sha256 != current:
        return False, (
            f"config hash changed since the recorded run: {manifest.config_sha256[:12]} -> {current[:12]}"
        )
    missing = [p for p in manifest.outputs if not os.path.exists(p)]
    if missing:
        return False, "recorded outputs are missing: " + ", ".join(missing)
    return True, f"config hash {current[:12]} matches the recorded run"

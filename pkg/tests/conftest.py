import json
import os
from typing import Optional, Sequence

import numpy as np
import pytest

from nashpde.problem.loader import load_config, load_config_dict
from nashpde.problem.spec import GridSpec, PlayerSpec, ProblemSpec, SpaceTimeField, build_problem
from nashpde.utils.logging import set_quiet

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")


def config_path(name: str) -> str:
    return os.path.join(CONFIGS, name)


def make_player(
    grid: GridSpec,
    alpha: float,
    omega: tuple[float, float],
    rho=0.0,
    eta=0.0,
    yd=0.0,
    yT=0.0,
) -> PlayerSpec:
    """Scalars are broadcast onto the grid; arrays are taken as they are."""
    n = grid.nx + 1
    yd_values = np.broadcast_to(np.asarray(yd, dtype=float), grid.shape)
    return PlayerSpec(
        alpha=alpha,
        omega=omega,
        rho=np.broadcast_to(np.asarray(rho, dtype=float), (n,)),
        eta=np.broadcast_to(np.asarray(eta, dtype=float), (n,)),
        target_yd=SpaceTimeField(yd_values),
        target_yT=np.broadcast_to(np.asarray(yT, dtype=float), (n,)),
    )


def make_problem(
    grid: GridSpec,
    players: Sequence[PlayerSpec],
    f=None,
    y0=None,
    g1=None,
    g2=None,
    common_target_mode: Optional[bool] = None,
) -> ProblemSpec:
    return build_problem(
        grid,
        players,
        f=SpaceTimeField(np.broadcast_to(np.asarray(f, dtype=float), grid.shape)) if f is not None else None,
        y0=np.broadcast_to(np.asarray(y0, dtype=float), (grid.nx + 1,)) if y0 is not None else None,
        g1=np.broadcast_to(np.asarray(g1, dtype=float), (grid.nt + 1,)) if g1 is not None else None,
        g2=np.broadcast_to(np.asarray(g2, dtype=float), (grid.nt + 1,)) if g2 is not None else None,
        common_target_mode=common_target_mode,
    )


def tiny_symmetric(seed: int = 3) -> ProblemSpec:
    """nx=6, nt=4, two players with two nodes each (dimension 16), common rho/eta."""
    grid = GridSpec(1.0, 1.0, 6, 4)
    rng = np.random.default_rng(seed)
    rho = 0.5 + rng.random(grid.nx + 1)
    eta = 0.5 + rng.random(grid.nx + 1)
    players = [
        make_player(grid, 0.3, (1 / 6, 2 / 6), rho, eta, rng.standard_normal(grid.shape), rng.standard_normal(grid.nx + 1)),
        make_player(grid, 0.7, (4 / 6, 5 / 6), rho, eta, rng.standard_normal(grid.shape), rng.standard_normal(grid.nx + 1)),
    ]
    return make_problem(
        grid,
        players,
        f=rng.standard_normal(grid.shape),
        y0=rng.standard_normal(grid.nx + 1),
        g1=rng.standard_normal(grid.nt + 1),
        g2=rng.standard_normal(grid.nt + 1),
    )


def tiny_general(seed: int = 5, alpha: float = 0.3) -> ProblemSpec:
    """Same layout as tiny_symmetric with distinct rho masks per player."""
    grid = GridSpec(1.0, 1.0, 6, 4)
    rng = np.random.default_rng(seed)
    x = grid.nodes
    players = [
        make_player(grid, alpha, (1 / 6, 2 / 6), (x <= 0.5).astype(float), 1.0, rng.standard_normal(grid.shape), 0.3),
        make_player(grid, alpha, (4 / 6, 5 / 6), (x >= 0.5).astype(float) * 3.0, 0.2, rng.standard_normal(grid.shape), -0.1),
    ]
    return make_problem(grid, players, f=rng.standard_normal(grid.shape), y0=rng.standard_normal(grid.nx + 1))


def diagonal_problem() -> ProblemSpec:
    """rho = eta = 0: A is alpha_i times the identity on each block."""
    grid = GridSpec(1.0, 1.0, 8, 6)
    players = [
        make_player(grid, 0.5, (0.25, 0.375), yd=1.0),
        make_player(grid, 2.0, (0.625, 0.875), yd=-1.0, yT=2.0),
    ]
    return make_problem(grid, players, f=1.0, y0=0.5)


def general_small_with_alpha(alpha: float) -> ProblemSpec:
    """configs/general_small.json with every alpha_i replaced."""
    with open(config_path("general_small.json"), encoding="utf-8") as f:
        doc = json.load(f)
    for player in doc["players"]:
        player["alpha"] = alpha
    return load_config_dict(doc, CONFIGS)


def zero_problem(n_players: int = 2) -> ProblemSpec:
    grid = GridSpec(1.0, 1.0, 8, 6)
    rho = np.linspace(0.5, 1.5, grid.nx + 1)
    omegas = [(0.25, 0.375), (0.625, 0.75)][:n_players]
    players = [make_player(grid, 0.2 * (k + 1), om, rho, 1.0) for k, om in enumerate(omegas)]
    return make_problem(grid, players)


@pytest.fixture(autouse=True)
def _quiet_logs():
    set_quiet(True)
    yield
    set_quiet(False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def demo_small() -> ProblemSpec:
    return load_config(config_path("demo_small.json"))


@pytest.fixture(scope="session")
def general_small() -> ProblemSpec:
    return load_config(config_path("general_small.json"))


@pytest.fixture(scope="session")
def demo() -> ProblemSpec:
    return load_config(config_path("demo.json"))

import numpy as np
import pytest

from conftest import diagonal_problem, general_small_with_alpha, tiny_general, tiny_symmetric, zero_problem
from nashpde.errors import ModeError, NonConvergenceError
from nashpde.game.krylov import conjugate_gradient, restarted_gmres
from nashpde.game.operator import (
    GENERAL,
    SYMMETRIC,
    OperatorHandle,
    apply_A,
    best_response,
    compute_b,
    ellipticity_probe,
    nash_gap,
    nash_residual,
    optimality_defect,
    relative_nash_residual,
    symmetric_part_min_eigenvalue,
)
from nashpde.game.solvers import solve_cg, solve_general
from nashpde.objectives.functionals import eval_Ji
from nashpde.oracle.dense import solution_distance
from nashpde.pde.adjoint import riesz_gradient
from nashpde.rules.notes import run_notes


# ---------------- operator ---------------- #

def test_mode_detection():
    assert OperatorHandle(tiny_symmetric()).mode == SYMMETRIC
    assert OperatorHandle(tiny_general()).mode == GENERAL
    assert OperatorHandle(tiny_symmetric(), mode=GENERAL).mode == GENERAL
    with pytest.raises(ModeError):
        OperatorHandle(tiny_general(), mode=SYMMETRIC)


def test_apply_zero_is_zero():
    op = OperatorHandle(tiny_general())
    assert not np.any(apply_A(op, op.space.zeros()).flat())


def test_diagonal_operator(rng):
    spec = diagonal_problem()
    op = OperatorHandle(spec)
    v = op.space.random(rng)
    Av = op.apply(v)
    for i, player in enumerate(spec.players):
        np.testing.assert_array_equal(Av.blocks[i], player.alpha * v.blocks[i])
    assert compute_b(op).norm() == 0.0


@pytest.mark.parametrize("builder", [tiny_symmetric, tiny_general])
def test_gradient_equals_residual(builder, rng):
    spec = builder()
    op = OperatorHandle(spec)
    v = op.space.random(rng, unit=False)
    stacked = op.space.bundle([riesz_gradient(spec, i, v) for i in range(spec.n_players)])
    expected = op.apply(v) - op.rhs()
    assert (stacked - expected).norm() <= 1e-11 * max(1.0, expected.norm())


def test_counters_per_application(rng):
    sym = OperatorHandle(tiny_symmetric())
    sym.apply(sym.space.random(rng))
    assert sym.counters == {"applications": 1, "forward_solves": 1, "adjoint_solves": 1}

    gen = OperatorHandle(tiny_general())
    gen.apply(gen.space.random(rng))
    assert gen.counters == {"applications": 1, "forward_solves": 1, "adjoint_solves": 2}

    gen.reset_counters()
    gen.rhs()
    gen.rhs()
    assert gen.counters == {"applications": 0, "forward_solves": 1, "adjoint_solves": 2}


def test_threaded_application_matches_serial(rng):
    spec = tiny_general()
    v = OperatorHandle(spec).space.random(rng)
    serial = OperatorHandle(spec, threads=1).apply(v).flat()
    threaded = OperatorHandle(spec, threads=2).apply(v).flat()
    np.testing.assert_array_equal(serial, threaded)


def test_self_adjoint_in_symmetric_mode(rng):
    op = OperatorHandle(tiny_symmetric())
    space = op.space
    for _ in range(3):
        a, b = space.random(rng), space.random(rng)
        assert space.inner(op.apply(a), b) == pytest.approx(space.inner(a, op.apply(b)), rel=1e-10)


def test_symmetric_form_bounded_below_by_alpha(rng):
    op = OperatorHandle(tiny_symmetric())
    for _ in range(5):
        v = op.space.random(rng)
        assert op.space.inner(op.apply(v), v) >= 0.3 - 1e-12


def test_probe_equals_alpha_min_without_tracking():
    op = OperatorHandle(diagonal_problem())
    assert ellipticity_probe(op, samples=4, seed=1) == pytest.approx(0.5, rel=1e-12)


def test_apply_adjoint_is_the_U_transpose(rng):
    op = OperatorHandle(tiny_general())
    space = op.space
    for _ in range(3):
        v, w = space.random(rng), space.random(rng)
        assert space.inner(op.apply(v), w) == pytest.approx(space.inner(v, op.apply_adjoint(w)), rel=1e-10, abs=1e-13)


def test_apply_adjoint_equals_apply_in_symmetric_mode(rng):
    op = OperatorHandle(tiny_symmetric())
    v = op.space.random(rng)
    Av = op.apply(v)
    assert (op.apply_adjoint(v) - Av).norm() <= 1e-12 * Av.norm()


def test_symmetric_part_eigenvalue_dense_and_lanczos_agree(general_small):
    op = OperatorHandle(general_small)
    dense = symmetric_part_min_eigenvalue(op, cap=op.space.dim)
    lanczos = symmetric_part_min_eigenvalue(op, cap=0)
    assert dense > 0.0
    assert lanczos == pytest.approx(dense, rel=1e-6)


def test_symmetric_part_eigenvalue_is_alpha_without_tracking():
    op = OperatorHandle(diagonal_problem())
    assert symmetric_part_min_eigenvalue(op) == pytest.approx(0.5, rel=1e-12)


def test_probe_rejects_samples():
    with pytest.raises(ValueError):
        ellipticity_probe(OperatorHandle(tiny_symmetric()), samples=0)


# ---------------- Krylov ---------------- #

def test_cg_on_weighted_diagonal(rng):
    op = OperatorHandle(diagonal_problem())
    b = rng.standard_normal(op.space.dim)
    result = conjugate_gradient(op.matvec, b, op.space.weights, rtol=1e-12)
    assert result.converged
    assert result.iterations <= 2
    expected = op.space.from_flat(b)
    for i, player in enumerate(op.spec.players):
        np.testing.assert_allclose(op.space.from_flat(result.x).blocks[i], expected.blocks[i] / player.alpha, rtol=1e-10)


def test_cg_breakdown_on_negative_operator():
    w = np.ones(4)
    with pytest.raises(NonConvergenceError, match="breakdown"):
        conjugate_gradient(lambda x: -x, np.ones(4), w)


def test_gmres_on_nonsymmetric_matrix(rng):
    n = 12
    A = np.eye(n) * 4.0 + rng.standard_normal((n, n)) * 0.3
    b = rng.standard_normal(n)
    w = 0.5 + rng.random(n)
    result = restarted_gmres(lambda x: A @ x, b, w, rtol=1e-12, restart=5)
    assert result.converged
    np.testing.assert_allclose(result.x, np.linalg.solve(A, b), rtol=1e-9, atol=1e-10)
    assert result.history[-1] <= 1e-12


def test_krylov_zero_rhs():
    w = np.ones(5)
    for solve in (conjugate_gradient, restarted_gmres):
        result = solve(lambda x: 2.0 * x, np.zeros(5), w)
        assert result.iterations == 0
        assert result.converged
        assert not np.any(result.x)


# ---------------- solvers ---------------- #

def test_zero_problem_has_zero_equilibrium():
    op = OperatorHandle(zero_problem())
    report = solve_cg(op)
    assert report.iterations == 0
    assert not np.any(report.u.flat())
    assert report.residual == 0.0
    assert any(n.startswith("zero-rhs") for n in report.notes)

    report = solve_general(op)
    assert report.iterations == 0
    assert not np.any(report.u.flat())


def test_zero_problem_single_player():
    report = solve_cg(OperatorHandle(zero_problem(n_players=1)))
    assert not np.any(report.u.flat())


def test_cg_and_gmres_agree(demo_small):
    op = OperatorHandle(demo_small)
    cg = solve_cg(op, rtol=1e-12)
    gmres = solve_general(op, rtol=1e-12)
    assert cg.converged and gmres.converged
    assert cg.residual <= 1e-10
    assert solution_distance(gmres.u, cg.u) <= 1e-9


def test_equilibrium_independent_of_start(demo_small, rng):
    op = OperatorHandle(demo_small)
    a = solve_cg(op, rtol=1e-12, x0=op.space.random(rng, unit=False), probe_samples=0)
    b = solve_cg(op, rtol=1e-12, x0=op.space.random(rng, unit=False), probe_samples=0)
    assert solution_distance(a.u, b.u) <= 1e-9


def test_solve_cg_rejects_general_mode(general_small):
    with pytest.raises(ModeError):
        solve_cg(OperatorHandle(general_small))


def test_general_mode_solve(general_small):
    op = OperatorHandle(general_small)
    report = solve_general(op, rtol=1e-10)
    assert report.converged
    assert report.residual <= 1e-9
    assert report.ellipticity_probe > 0
    assert any(n.startswith("general-mode") for n in report.notes)


def test_general_mode_reports_positive_spectrum(general_small):
    report = solve_general(OperatorHandle(general_small))
    assert report.ellipticity_min > 0.0
    assert report.to_json()["ellipticity_min"] == report.ellipticity_min


def test_tiny_alpha_general_mode_is_not_an_equilibrium():
    op = OperatorHandle(general_small_with_alpha(1e-9))
    with pytest.raises(NonConvergenceError, match="not elliptic") as exc:
        solve_general(op)
    report = exc.value.report
    assert report.converged is False
    assert report.ellipticity_min < 0.0
    names = [n.split(":")[0] for n in report.notes]
    assert "ellipticity-failure" in names
    assert "not-converged" in names


def test_ellipticity_diagnostics_can_be_skipped():
    report = solve_general(OperatorHandle(general_small_with_alpha(1e-9)), probe_samples=0)
    assert report.ellipticity_min is None
    assert report.ellipticity_probe is None


def test_non_convergence_keeps_report(general_small):
    op = OperatorHandle(general_small)
    with pytest.raises(NonConvergenceError) as exc:
        solve_general(op, rtol=1e-14, restart=2, maxiter=2)
    report = exc.value.report
    assert report is not None
    assert report.converged is False
    assert report.iterations == 2
    assert any(n.startswith("not-converged") for n in report.notes)


def test_residual_grows_under_perturbation(demo_small, rng):
    op = OperatorHandle(demo_small)
    u = solve_cg(op, rtol=1e-12, probe_samples=0).u
    base = relative_nash_residual(op, u)
    assert base <= 1e-10
    assert nash_residual(op, u + op.space.random(rng) * 0.1) > 1e3 * nash_residual(op, u)


def test_report_json(demo_small):
    report = solve_cg(OperatorHandle(demo_small), probe_samples=2)
    doc = report.to_json()
    for key in ("mode", "solver", "iterations", "residual", "J_values", "ellipticity_probe", "seed", "counters"):
        assert key in doc
    assert doc["mode"] == "symmetric"
    assert len(doc["J_values"]) == 2
    assert "timings" not in report.to_json(timings=False)


# ---------------- unilateral structure ---------------- #

def test_nash_gap_at_and_away_from_equilibrium(demo_small):
    op = OperatorHandle(demo_small)
    u = solve_cg(op, rtol=1e-12, probe_samples=0).u
    assert abs(nash_gap(op, u)) <= 1e-9
    assert nash_gap(op, op.space.zeros()) > 1e-6


def test_best_response_improves_cost(general_small):
    op = OperatorHandle(general_small)
    v = op.space.zeros()
    for i in range(op.spec.n_players):
        reply = best_response(op, i, v)
        assert eval_Ji(op.spec, i, reply) <= eval_Ji(op.spec, i, v) + 1e-14
        for k in range(op.spec.n_players):
            if k != i:
                np.testing.assert_array_equal(reply.blocks[k], v.blocks[k])


def test_optimality_system_at_equilibrium(demo_small):
    op = OperatorHandle(demo_small)
    u = solve_cg(op, rtol=1e-12, probe_samples=0).u
    assert optimality_defect(op, u) <= 1e-7


# ---------------- notes ---------------- #

def test_notes():
    assert run_notes({"mode": "symmetric", "alpha_min": 1.0, "converged": True, "b_norm": 1.0}) == []
    notes = run_notes({"mode": "general", "alpha_min": 1e-9, "ellipticity_probe": -1.0, "converged": False})
    names = [n.split(":")[0] for n in notes]
    assert names == ["general-mode", "small-alpha", "negative-probe", "not-converged"]
    notes = run_notes({"mode": "general", "ellipticity_min": -1e-6, "converged": False})
    assert [n.split(":")[0] for n in notes] == ["general-mode", "ellipticity-failure", "not-converged"]
    assert run_notes({"residual": 1e-3, "residual_internal": 1e-12})[0].startswith("residual-mismatch")


@pytest.mark.slow
def test_demo_converges(demo):
    report = solve_cg(OperatorHandle(demo), probe_samples=2)
    assert report.converged
    assert report.residual <= 1e-10
    assert report.ellipticity_probe >= 0.05 - 1e-10

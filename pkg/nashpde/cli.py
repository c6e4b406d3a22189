"""Command-line entry point: nashpde solve|verify|oracle <config> [flags]."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Any, Optional

import numpy as np
from dotenv import load_dotenv

from nashpde.config import Settings
from nashpde.errors import (
    ConfigError,
    DimensionCapError,
    ModeError,
    NashPDEError,
    NonConvergenceError,
    SingularOperatorError,
    VerificationError,
)
from nashpde.formatting import checks_table, equivalence_table, solve_summary, table
from nashpde.game.operator import OperatorHandle, nash_gap, optimality_defect
from nashpde.game.solvers import NashReport, solve_cg, solve_general
from nashpde.io.csv_dump import write_field_csv, write_slab_csv
from nashpde.manifest import RunManifest, check_manifest
from nashpde.objectives.checks import fd_gradient_check, unilateral_check
from nashpde.objectives.equivalence import certify_equivalence
from nashpde.oracle.dense import (
    assemble_dense,
    dense_agreement,
    direct_solve,
    dump_dense,
    min_eigen_sym,
    solution_distance,
    symmetry_defect,
)
from nashpde.pde.adjoint import adjoint_identity_defect
from nashpde.pde.heat import solve_state
from nashpde.problem.loader import load_config
from nashpde.problem.spec import ProblemSpec
from nashpde.utils.logging import log, set_quiet

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONCONVERGENCE = 2
EXIT_VERIFICATION = 3

DEFAULT_SETTINGS = "config.yaml"
UNILATERAL_FLOOR = -1e-12
SELF_ADJOINT_TOL = 1e-10
CONSTANT_TOL = 1e-10
VARIANCE_TOL = 1e-20
MATVEC_TOL = 1e-12
SYMMETRY_TOL = 1e-12
OPTIMALITY_TOL = 1e-7


# ---------------- settings ---------------- #

def resolve_settings(args: argparse.Namespace) -> Settings:
    """Built-in defaults < settings file (+ env overlay) < command-line flags."""
    if args.settings:
        settings = Settings.from_yaml(args.settings)
    elif os.path.exists(DEFAULT_SETTINGS):
        settings = Settings.from_yaml(DEFAULT_SETTINGS)
    else:
        settings = Settings.defaults()

    overrides: dict[str, dict[str, Any]] = {
        "solver": {"rtol": args.rtol, "restart": args.restart, "max_iterations": args.maxiter},
        "probes": {"seed": args.seed},
        "verify": {"max_pairs": args.max_pairs},
        "runtime": {"threads": args.threads, "progress": True if args.progress else None},
        "output": {"out_dir": args.out},
    }
    data = settings.model_dump()
    for section, values in overrides.items():
        for key, value in values.items():
            if value is not None:
                data[section][key] = value
    return Settings(**data)


def _out_dir(settings: Settings) -> str:
    os.makedirs(settings.output.out_dir, exist_ok=True)
    return settings.output.out_dir


def _write_json(path: str, doc: dict) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
    return path


def _operator(spec: ProblemSpec, settings: Settings) -> OperatorHandle:
    return OperatorHandle(spec, threads=settings.threads)


def _solve(op: OperatorHandle, settings: Settings, solver: Optional[str]) -> NashReport:
    s, p = settings.solver, settings.probes
    solver = solver or ("cg" if op.symmetric else "gmres")
    if solver == "cg":
        return solve_cg(op, rtol=s.rtol, maxiter=s.max_iterations, seed=p.seed, probe_samples=p.ellipticity_samples)
    return solve_general(
        op,
        rtol=s.rtol,
        restart=s.restart,
        maxiter=s.max_iterations,
        seed=p.seed,
        probe_samples=p.ellipticity_samples,
        ellipticity_cap=s.dense_cap,
    )


def _check(name: str, value: Optional[float], limit: Optional[float], passed: bool, **extra) -> dict:
    return {"name": name, "value": value, "limit": limit, "passed": bool(passed), **extra}


# ---------------- commands ---------------- #

def cmd_solve(args: argparse.Namespace, settings: Settings, manifest: RunManifest) -> int:
    spec = load_config(args.config)
    out_dir = _out_dir(settings)
    op = _operator(spec, settings)

    code = EXIT_OK
    try:
        report = _solve(op, settings, args.solver)
    except NonConvergenceError as e:
        log(f"solve: {e}")
        code = EXIT_NONCONVERGENCE
        report = e.report
        if report is None:
            doc = {"mode": op.mode, "converged": False, "error": str(e), "residual_history": e.history}
            manifest.add(_write_json(os.path.join(out_dir, "report.json"), doc))
            return code

    doc = report.to_json()
    doc["exit_code"] = code
    manifest.add(_write_json(os.path.join(out_dir, "report.json"), doc))
    for i, nodes in enumerate(op.space.nodes):
        path = os.path.join(out_dir, f"control_player{i + 1}.csv")
        manifest.add(write_slab_csv(path, report.u.blocks[i], spec.grid, nodes))
    state = solve_state(spec, report.u).y
    manifest.add(write_field_csv(os.path.join(out_dir, "state.csv"), state, spec.grid))

    print(solve_summary(report))
    return code


def _verify_checks(args, settings: Settings, spec: ProblemSpec, op: OperatorHandle) -> tuple[list[dict], list, NashReport]:
    p, v_set = settings.probes, settings.verify
    space = op.space
    rng = np.random.default_rng(p.seed)
    checks: list[dict] = []

    # gradients and the adjoint identity, at a random point
    v = space.random(rng)
    for i in range(spec.n_players):
        err = fd_gradient_check(spec, i, v, p.fd_directions, p.fd_eps, seed=p.seed + i)
        checks.append(_check(f"fd-gradient[{i + 1}]", err, v_set.fd_tolerance, err < v_set.fd_tolerance))
    for i in range(spec.n_players):
        w = rng.standard_normal(spec.grid.shape)
        defect = adjoint_identity_defect(spec, i, space.random(rng), w, w[-1].copy())
        checks.append(
            _check(f"adjoint-identity[{i + 1}]", defect, v_set.identity_tolerance, defect < v_set.identity_tolerance)
        )

    if op.symmetric:
        worst = 0.0
        for _ in range(3):
            a, b = space.random(rng), space.random(rng)
            gap = abs(space.inner(op.apply(a), b) - space.inner(a, op.apply(b)))
            worst = max(worst, gap / (a.norm() * b.norm()))
        checks.append(_check("self-adjointness", worst, SELF_ADJOINT_TOL, worst <= SELF_ADJOINT_TOL))

    report = _solve(op, settings, args.solver)
    rtol = settings.solver.rtol
    checks.append(_check("nash-residual", report.residual, rtol, report.residual <= rtol))

    worst = unilateral_check(op, report.u, p.unilateral_trials, p.seed)
    checks.append(_check("unilateral", worst, UNILATERAL_FLOOR, worst >= UNILATERAL_FLOOR))

    gap = nash_gap(op, report.u)
    gap_limit = 1e-10 * (1.0 + max(abs(J) for J in report.J_values))
    checks.append(_check("nash-gap", gap, gap_limit, abs(gap) <= gap_limit))

    defect = optimality_defect(op, report.u)
    checks.append(_check("optimality-system", defect, OPTIMALITY_TOL, defect <= OPTIMALITY_TOL))

    equivalences = []
    if op.symmetric:
        n = spec.n_players
        pairs = [(j, q) for j in range(n) for q in range(n)][: v_set.max_pairs]
        families = [("coop", 0, 0)] + [("jp", j, q) for j, q in pairs]
        nash_u = None if args.literal else _refined(op, report, rtol)
        for family, j, q in families:
            eq = certify_equivalence(
                op,
                family,
                j,
                q,
                probes=p.equivalence_probes,
                seed=p.seed,
                literal=args.literal,
                rtol=min(rtol, 1e-11),
                nash=nash_u,
            )
            equivalences.append(eq)
            checks.append(
                _check(
                    f"constant-difference[{eq.label}]",
                    eq.relative_deviation,
                    CONSTANT_TOL,
                    eq.relative_deviation < CONSTANT_TOL and eq.variance < VARIANCE_TOL * (1.0 + eq.mean ** 2),
                    variance=eq.variance,
                )
            )
            if eq.argmin_distance is not None:
                checks.append(
                    _check(
                        f"argmin[{eq.label}]",
                        eq.argmin_distance,
                        v_set.equivalence_tolerance,
                        eq.argmin_distance < v_set.equivalence_tolerance,
                    )
                )
    return checks, equivalences, report


def _refined(op: OperatorHandle, report: NashReport, rtol: float):
    """Nash equilibrium solved at least as tightly as the argmin comparison needs."""
    if report.rtol <= 1e-11:
        return report.u
    return solve_cg(op, rtol=min(rtol, 1e-11), x0=report.u, probe_samples=0).u


def cmd_verify(args: argparse.Namespace, settings: Settings, manifest: RunManifest) -> int:
    spec = load_config(args.config)
    out_dir = _out_dir(settings)
    op = _operator(spec, settings)

    try:
        checks, equivalences, report = _verify_checks(args, settings, spec, op)
    except VerificationError as e:
        checks, equivalences, report = [_check(e.check, None, None, False, detail=str(e))], [], None

    failed = [c for c in checks if not c["passed"]]
    code = EXIT_OK if not failed else EXIT_VERIFICATION
    doc = {
        "mode": op.mode,
        "literal": bool(args.literal),
        "seed": settings.probes.seed,
        "passed": not failed,
        "first_failure": failed[0]["name"] if failed else None,
        "checks": checks,
        "equivalence": [eq.to_json() for eq in equivalences],
        "solve": report.to_json() if report is not None else None,
        "exit_code": code,
    }
    manifest.add(_write_json(os.path.join(out_dir, "report.json"), doc))

    print(checks_table(checks))
    if equivalences:
        print()
        print(equivalence_table(equivalences))
    if failed:
        log(f"verification failed: first failing check is '{failed[0]['name']}'")
    return code


def cmd_oracle(args: argparse.Namespace, settings: Settings, manifest: RunManifest) -> int:
    spec = load_config(args.config)
    out_dir = _out_dir(settings)
    op = _operator(spec, settings)
    s = settings.solver

    t0 = time.perf_counter()
    d = assemble_dense(op, cap=s.dense_cap, progress=settings.runtime.progress)
    t_assemble = time.perf_counter() - t0
    defect = symmetry_defect(d)
    lam = min_eigen_sym(d)
    matvec_gap = dense_agreement(d, op, samples=20, seed=settings.probes.seed)
    alpha_min = min(p.alpha for p in spec.players)

    checks = [_check("matvec-agreement", matvec_gap, MATVEC_TOL, matvec_gap <= MATVEC_TOL)]
    if op.symmetric:
        checks.append(_check("weighted-symmetry", defect, SYMMETRY_TOL, defect < SYMMETRY_TOL))
        checks.append(_check("coercivity", lam, alpha_min - 1e-10, lam >= alpha_min - 1e-10))

    direct = iterative = None
    try:
        direct = direct_solve(d)
    except SingularOperatorError as e:
        checks.append(_check("direct-solve", None, None, False, detail=str(e)))
    try:
        iterative = _solve(op, settings, args.solver).u
    except NonConvergenceError as e:
        checks.append(_check("iterative-solve", None, None, False, detail=str(e)))
    agreement = None
    if direct is not None and iterative is not None:
        agreement = solution_distance(iterative, direct)
        tol = settings.verify.equivalence_tolerance
        checks.append(_check("direct-vs-iterative", agreement, tol, agreement <= tol))

    if args.dump_dense:
        for path in dump_dense(d, out_dir):
            manifest.add(path)

    failed = [c for c in checks if not c["passed"]]
    code = EXIT_OK if not failed else EXIT_VERIFICATION
    doc = {
        "mode": op.mode,
        "dimension": d.dim,
        "symmetry_defect": defect,
        "min_eigenvalue": lam,
        "alpha_min": alpha_min,
        "matvec_agreement": matvec_gap,
        "direct_vs_iterative": agreement,
        "checks": checks,
        "passed": not failed,
        "first_failure": failed[0]["name"] if failed else None,
        "counters": op.counters,
        "timings": {"assemble": t_assemble},
        "exit_code": code,
    }
    manifest.add(_write_json(os.path.join(out_dir, "report.json"), doc))
    print(
        table(
            ("quantity", "value"),
            [("dimension", d.dim), ("symmetry defect", defect), ("min eigenvalue", lam), ("direct vs iterative", agreement)],
        )
    )
    print()
    print(checks_table(checks))
    return code


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "oracle": cmd_oracle}


# ---------------- argument parsing ---------------- #

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nashpde",
        description="Nash equilibria of distributed-control games for the 1-D heat equation",
    )
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="game description (JSON)")
    common.add_argument("--solver", choices=["cg", "gmres"], default=None, help="default: cg in common-target mode")
    common.add_argument("--rtol", type=float, default=None, help="relative residual tolerance")
    common.add_argument("--restart", type=int, default=None, help="GMRES restart length")
    common.add_argument("--maxiter", type=int, default=None, help="iteration cap (default 10 * dim)")
    common.add_argument("--seed", type=int, default=None, help="seed for every random probe")
    common.add_argument("--threads", type=int, default=None, help="worker threads for per-player solves")
    common.add_argument("--paper-literal", dest="literal", action="store_true", help="use the displayed coefficient set in verify")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--max-pairs", type=int, default=None, help="number of (j, p) pairs to certify")
    common.add_argument("--check-manifest", action="store_true", help="verify the config hash of the previous run")
    common.add_argument("--dump-dense", action="store_true", help="oracle: write A, b and weights as CSV")
    common.add_argument("--settings", default=None, help=f"settings file (default ./{DEFAULT_SETTINGS} if present)")
    common.add_argument("--quiet", action="store_true", help="silence log lines on stderr")
    common.add_argument("--progress", action="store_true", help="show progress bars")

    sub.add_parser("solve", parents=[common], help="compute the Nash equilibrium")
    sub.add_parser("verify", parents=[common], help="run the certification suite")
    sub.add_parser("oracle", parents=[common], help="dense ground-truth comparison")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)

    try:
        settings = resolve_settings(args)
        out_dir = _out_dir(settings)
        if args.check_manifest:
            ok, msg = check_manifest(out_dir, args.config)
            log(f"manifest: {msg}")
            if not ok:
                return EXIT_CONFIG
        manifest = RunManifest.start(args.config, args.command, settings.probes.seed)
    except ConfigError as e:
        log(f"config error: {e}")
        return EXIT_CONFIG
    except FileNotFoundError as e:
        log(f"config error: {e}")
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args, settings, manifest)
    except (ConfigError, DimensionCapError, ModeError) as e:
        log(f"error: {e}")
        code = EXIT_CONFIG
    except NonConvergenceError as e:
        log(f"non-convergence: {e}")
        code = EXIT_NONCONVERGENCE
    except VerificationError as e:
        log(f"verification failed: {e}")
        code = EXIT_VERIFICATION
    except (NashPDEError, ValueError) as e:
        log(f"error: {e}")
        code = EXIT_CONFIG

    manifest.timings["total"] = time.perf_counter() - t0
    manifest.exit_code = code
    manifest.write(out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())

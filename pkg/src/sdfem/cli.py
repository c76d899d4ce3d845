"""Command line interface.

Subcommands:
  run     sweep (N, eps, variant) and write convergence tables
  grid    solve one case and dump a pointwise error grid (JSON)
  verify  run the built-in property suites (oracles, coercivity, regressions)
  mesh    dump the 1D breakpoint sets of a Shishkin mesh

Exit codes: 0 success, 1 failed row or failed check, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .analysis import RegionSel, interpolant, layer_integral_oracle, rate, sd_norm_discrete
from .discretization import assemble_system
from .harness import (
    ConfigError,
    ExperimentConfig,
    build_case,
    emit_error_grid,
    emit_table,
    run_experiment,
    run_single,
)
from .mesh import InvalidSpec, dump_mesh
from .problem import PROBLEMS
from .solver import Preconditioner, SolveMethod, SolverConfig
from .stabilization import DeltaField, DeltaVariant


def _parse_variants(value: str) -> tuple[DeltaVariant, ...]:
    if value == "both":
        return (DeltaVariant.STANDARD, DeltaVariant.MODIFIED)
    return (DeltaVariant(value),)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        method=SolveMethod(args.solver),
        restart=args.restart,
        rel_residual_tol=args.tol,
        preconditioner=Preconditioner(args.precond),
    )


def _add_solver_flags(p):
    p.add_argument("--solver", choices=[m.value for m in SolveMethod], default="gmres")
    p.add_argument("--restart", type=int, default=60)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--precond", choices=[m.value for m in Preconditioner], default="ilu0")


def cmd_run(args) -> int:
    config = ExperimentConfig(
        problem=args.problem,
        N_list=tuple(int(v) for v in args.N.split(",")),
        eps_list=tuple(float(v) for v in args.eps.split(",")),
        variants=_parse_variants(args.delta),
        c_star=args.cstar,
        solver=_solver_config(args),
    )
    artifacts = run_experiment(config)
    multi = len(artifacts) > 1
    for art in artifacts:
        path = args.out
        if multi:
            stem, dot, ext = args.out.rpartition(".")
            base = stem if dot else args.out
            suffix = f"_eps{art.eps:.0e}_{art.variant.value}"
            path = f"{base}{suffix}.{ext}" if dot else f"{base}{suffix}"
        emit_table(art, args.format, path)
        print(f"wrote {path}")
    if args.dump_matrix:
        problem, mesh = build_case(args.problem, config.N_list[0], config.eps_list[0])
        delta = DeltaField.from_mesh(mesh, config.variants[0], config.c_star)
        system = assemble_system(mesh, problem, delta)
        coo = system.matrix.tocoo()
        with open(args.dump_matrix, "w") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v:.17g}\n")
        print(f"wrote {args.dump_matrix}")
    failed = any(r.failed for a in artifacts for r in a.records)
    return 1 if failed else 0


def cmd_grid(args) -> int:
    emit_error_grid(
        args.problem,
        args.N,
        args.eps,
        DeltaVariant(args.delta),
        args.cstar,
        args.samples,
        args.out,
        _solver_config(args),
    )
    print(f"wrote {args.out}")
    return 0


def cmd_mesh(args) -> int:
    problem, mesh = build_case(args.problem, args.N, args.eps)
    text = dump_mesh(mesh)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    """Quick property suites; the full set lives in the pytest suite."""
    ok = True

    def check(name: str, passed: bool, detail: str = ""):
        nonlocal ok
        ok = ok and passed
        status = "PASS" if passed else "FAIL"
        print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))

    # closed-form layer integrals vs composite quadrature
    for eps in (1e-2, 1e-4):
        for N in (8, 16):
            problem, mesh = build_case("paper-benchmark", N, eps)
            o = layer_integral_oracle(eps, problem.beta1, mesh.x_s, mesh.x_t, mesh.x_axis.H)
            def relerr(a, b):
                m = max(abs(a), abs(b))
                return abs(a - b) / m if m > 0 else 0.0
            err = max(relerr(o.tail_closed, o.tail_quad),
                      relerr(o.strip_closed, o.strip_quad))
            check(f"layer integrals eps={eps:g} N={N}", err <= 1e-12, f"rel err {err:.2e}")

    # discrete coercivity with the default c_star
    rng = np.random.default_rng(0)
    for variant in (DeltaVariant.STANDARD, DeltaVariant.MODIFIED):
        problem, mesh = build_case("paper-benchmark", 8, 1e-8)
        delta = DeltaField.from_mesh(mesh, variant, 0.5)
        system = assemble_system(mesh, problem, delta)
        worst = np.inf
        from .analysis import DiscreteFunction

        for _ in range(100):
            v = rng.standard_normal(system.dimension)
            quad = float(v @ (system.matrix @ v))
            nrm = sd_norm_discrete(
                DiscreteFunction.from_dof_vector(mesh, v), problem, delta
            )
            worst = min(worst, quad / nrm**2)
        check(f"coercivity {variant.value}", worst >= 0.5, f"min ratio {worst:.3f}")

    # interpolation regressions (bounded ratios against the expected orders)
    import math

    ratios_g, ratios_s = [], []
    for N in (8, 16, 32, 64):
        problem, mesh = build_case("paper-benchmark", N, 1e-8)
        delta = DeltaField.from_mesh(mesh, DeltaVariant.MODIFIED, 0.5)
        ui = interpolant(problem, mesh)
        from .analysis import ErrorComputation

        comp = ErrorComputation(ui, delta, problem)
        ratios_g.append(comp.report(RegionSel.GLOBAL).sd_norm / (math.log(N) / N))
        ratios_s.append(comp.report(RegionSel.OMEGA_S).sd_norm / N**-1.5)
    for name, ratios in (("global", ratios_g), ("omega_s", ratios_s)):
        spread = max(ratios) / min(ratios)
        check(f"interpolation regression {name}", spread <= 3.0, f"spread {spread:.2f}")

    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdfem",
        description="SDFEM on Shishkin meshes: solver and experiment harness",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a convergence sweep")
    p.add_argument("--problem", choices=sorted(PROBLEMS), default="paper-benchmark")
    p.add_argument("--N", default="8,16,32,64,128,256")
    p.add_argument("--eps", default="1e-8")
    p.add_argument("--delta", choices=["standard", "modified", "both"], default="standard")
    p.add_argument("--cstar", type=float, default=0.5)
    _add_solver_flags(p)
    p.add_argument("--out", default="table.csv")
    p.add_argument("--format", choices=["csv", "markdown", "json"], default="csv")
    p.add_argument("--dump-matrix", default=None,
                   help="also dump the first case's matrix in coordinate text format")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("grid", help="dump a pointwise error grid")
    p.add_argument("--problem", choices=sorted(PROBLEMS), default="paper-benchmark")
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--delta", choices=["standard", "modified"], default="standard")
    p.add_argument("--cstar", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=3)
    _add_solver_flags(p)
    p.add_argument("--out", default="grid.json")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("mesh", help="dump the Shishkin breakpoints")
    p.add_argument("--problem", choices=sorted(PROBLEMS), default="paper-benchmark")
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("verify", help="run the built-in property suites")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidSpec, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

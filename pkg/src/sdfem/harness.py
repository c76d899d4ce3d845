"""Experiment driver: sweep (N, eps, delta-variant), run
assemble -> solve -> analyze, and emit convergence tables and pointwise
error grids."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    DiscreteFunction,
    ErrorComputation,
    RegionSel,
    pointwise_error_grid,
    rate,
)
from .discretization import assemble_system
from .mesh import AxisSpec, ShishkinMesh2D, build_mesh
from .problem import PROBLEMS, ProblemSpec
from .solver import SolveStats, SolverConfig, solve
from .stabilization import DeltaField, DeltaVariant


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "paper-benchmark"
    N_list: tuple[int, ...] = (8, 16, 32, 64, 128, 256, 512)
    eps_list: tuple[float, ...] = (1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14, 1e-16)
    variants: tuple[DeltaVariant, ...] = (DeltaVariant.STANDARD,)
    c_star: float = 0.5
    solver: SolverConfig = field(default_factory=SolverConfig)
    quad_order: int = 3
    rhs_quad_order: int = 5
    error_quad_order: int = 5

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if not self.N_list:
            raise ConfigError("N list must not be empty")
        if any(n % 2 or n < 4 for n in self.N_list):
            raise ConfigError("every N must be even and >= 4")
        if list(self.N_list) != sorted(set(self.N_list)):
            raise ConfigError("N list must be strictly increasing")
        nmax = max(self.N_list)
        for eps in self.eps_list:
            if not 0.0 < eps <= 1.0 / nmax:
                raise ConfigError(f"eps={eps} must satisfy 0 < eps <= 1/max(N)")
        if self.c_star <= 0.0:
            raise ConfigError("c_star must be positive")


@dataclass
class CaseResult:
    N: int
    eps: float
    variant: DeltaVariant
    c_star: float
    comp: ErrorComputation
    u_h: DiscreteFunction
    stats: SolveStats

    def report(self, region: RegionSel):
        return self.comp.report(region)


def build_case(problem_name: str, N: int, eps: float) -> tuple[ProblemSpec, ShishkinMesh2D]:
    problem = PROBLEMS[problem_name](eps)
    mesh = build_mesh(
        AxisSpec(N=N, epsilon=eps, beta=problem.beta1),
        AxisSpec(N=N, epsilon=eps, beta=problem.beta2),
    )
    return problem, mesh


def run_single(
    problem_name: str,
    N: int,
    eps: float,
    variant: DeltaVariant,
    c_star: float,
    solver_config: SolverConfig | None = None,
    quad_order: int = 3,
    rhs_quad_order: int = 5,
    error_quad_order: int = 5,
) -> CaseResult:
    """Assemble, solve and analyze one (N, eps, variant) case."""
    problem, mesh = build_case(problem_name, N, eps)
    delta = DeltaField.from_mesh(mesh, variant, c_star)
    system = assemble_system(mesh, problem, delta, quad_order, rhs_quad_order)
    u, stats = solve(system, solver_config or SolverConfig())
    u_h = DiscreteFunction.from_dof_vector(mesh, u)
    comp = ErrorComputation(u_h, delta, problem, use_exact=True, quad_order=error_quad_order)
    return CaseResult(N=N, eps=eps, variant=variant, c_star=c_star,
                      comp=comp, u_h=u_h, stats=stats)


@dataclass
class ConvergenceRecord:
    N: int
    e_eps_global: float | None = None
    e_sd_global: float | None = None
    e_eps_omegas: float | None = None
    e_sd_omegas: float | None = None
    rate_eps_global: float | None = None
    rate_sd_global: float | None = None
    rate_eps_omegas: float | None = None
    rate_sd_omegas: float | None = None
    solver_iters: int = 0
    residual: float | None = None
    failed: bool = False


@dataclass
class TableArtifact:
    eps: float
    variant: DeltaVariant
    c_star: float
    records: list[ConvergenceRecord]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "variant": self.variant.value,
            "cstar": self.c_star,
            "metadata": self.metadata,
            "records": [vars(r).copy() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TableArtifact":
        return cls(
            eps=d["eps"],
            variant=DeltaVariant(d["variant"]),
            c_star=d["cstar"],
            metadata=d.get("metadata", {}),
            records=[ConvergenceRecord(**r) for r in d["records"]],
        )


def _fill_rates(records: list[ConvergenceRecord]) -> None:
    """Rate on row N is computed from rows N and 2N only; the last row (and
    rows without a 2N partner) keep empty rate cells."""
    by_n = {r.N: r for r in records}
    for r in records:
        nxt = by_n.get(2 * r.N)
        if nxt is None or r.failed or nxt.failed:
            continue
        for name in ("eps_global", "sd_global", "eps_omegas", "sd_omegas"):
            e0 = getattr(r, f"e_{name}")
            e1 = getattr(nxt, f"e_{name}")
            if e0 and e1 and e0 > 0 and e1 > 0:
                setattr(r, f"rate_{name}", rate(e0, e1))


def run_experiment(config: ExperimentConfig) -> list[TableArtifact]:
    """One table per (eps, variant) over the configured N list.

    Solver failures mark the row failed instead of aborting the sweep.
    """
    artifacts = []
    for eps in config.eps_list:
        for variant in config.variants:
            records = []
            stats_summary = []
            for N in config.N_list:
                rec = ConvergenceRecord(N=N)
                try:
                    case = run_single(
                        config.problem, N, eps, variant, config.c_star,
                        config.solver, config.quad_order,
                        config.rhs_quad_order, config.error_quad_order,
                    )
                except Exception:
                    rec.failed = True
                    records.append(rec)
                    continue
                if not case.stats.converged:
                    rec.failed = True
                    rec.solver_iters = case.stats.iterations
                    rec.residual = case.stats.residual
                    records.append(rec)
                    continue
                g = case.report(RegionSel.GLOBAL)
                s = case.report(RegionSel.OMEGA_S)
                rec.e_eps_global = g.eps_norm
                rec.e_sd_global = g.sd_norm
                rec.e_eps_omegas = s.eps_norm
                rec.e_sd_omegas = s.sd_norm
                rec.solver_iters = case.stats.iterations
                rec.residual = case.stats.residual
                records.append(rec)
                stats_summary.append(
                    {"N": N, "iters": case.stats.iterations, "method": case.stats.method}
                )
            _fill_rates(records)
            artifacts.append(TableArtifact(
                eps=eps,
                variant=variant,
                c_star=config.c_star,
                records=records,
                metadata={"problem": config.problem, "solver": stats_summary},
            ))
    return artifacts


CSV_HEADER = ("N,eps,variant,cstar,e_eps_global,rate_eps_global,"
              "e_sd_global,rate_sd_global,e_eps_omegas,rate_eps_omegas,"
              "e_sd_omegas,rate_sd_omegas,solver_iters,residual")

_ERROR_FIELDS = ("e_eps_global", "rate_eps_global", "e_sd_global", "rate_sd_global",
                 "e_eps_omegas", "rate_eps_omegas", "e_sd_omegas", "rate_sd_omegas")


def _sci(v: float | None) -> str:
    return "" if v is None else f"{v:.5e}"


def render_table(artifact: TableArtifact, fmt: str) -> str:
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in artifact.records:
            cells = [str(r.N), f"{artifact.eps:.5e}", artifact.variant.value,
                     f"{artifact.c_star:.5e}"]
            cells += [_sci(getattr(r, f)) for f in _ERROR_FIELDS]
            cells += [str(r.solver_iters), _sci(r.residual)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        head = ("| N | e_eps_global | Rate | e_sd_global | Rate "
                "| e_eps_omega_s | Rate | e_sd_omega_s | Rate |")
        sep = "|" + "---|" * 9
        lines = [f"eps = {artifact.eps:.0e}, delta = {artifact.variant.value}, "
                 f"C* = {artifact.c_star:g}", "", head, sep]
        for r in artifact.records:
            def err(v):
                return "---" if v is None else f"{v:.2e}"

            def rt(v):
                return "---" if v is None else f"{v:.2f}"

            lines.append(
                f"| {r.N} | {err(r.e_eps_global)} | {rt(r.rate_eps_global)} "
                f"| {err(r.e_sd_global)} | {rt(r.rate_sd_global)} "
                f"| {err(r.e_eps_omegas)} | {rt(r.rate_eps_omegas)} "
                f"| {err(r.e_sd_omegas)} | {rt(r.rate_sd_omegas)} |"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps(artifact.to_dict(), indent=2) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def emit_table(artifact: TableArtifact, fmt: str, path: str) -> None:
    text = render_table(artifact, fmt)
    with open(path, "w") as fh:
        fh.write(text)


def emit_error_grid(
    problem_name: str,
    N: int,
    eps: float,
    variant: DeltaVariant,
    c_star: float,
    samples_per_cell: int,
    path: str,
    solver_config: SolverConfig | None = None,
) -> dict:
    """Solve one case and dump the pointwise error grid as JSON. Layer
    points carry the exact offsets alongside the lossy absolute coords."""
    case = run_single(problem_name, N, eps, variant, c_star, solver_config)
    problem, _ = build_case(problem_name, N, eps)
    grid = pointwise_error_grid(problem, case.u_h, samples_per_cell)
    payload = {
        "N": N,
        "eps": eps,
        "variant": variant.value,
        "cstar": c_star,
        "samples_per_cell": samples_per_cell,
        "point_fields": ["x", "y", "sigma_x", "sigma_y", "abs_error"],
        "points": np.column_stack(
            [grid.x, grid.y, grid.sigma_x, grid.sigma_y, grid.abs_error]
        ).tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
    return payload

"""Streamline diffusion FEM with bilinear elements on Shishkin meshes for
singularly perturbed convection-diffusion problems."""

__version__ = "0.1.0"

from .analysis import (
    DiscreteFunction,
    ErrorReport,
    RegionSel,
    error_norm,
    interpolant,
    layer_integral_oracle,
    pointwise_error_grid,
    rate,
    sd_norm_discrete,
)
from .discretization import DofMap, QuadratureRule, SparseSystem, assemble_system
from .harness import ExperimentConfig, TableArtifact, emit_table, run_experiment, run_single
from .mesh import (
    Axis1D,
    AxisSpec,
    InvalidSpec,
    OutOfDomain,
    Region,
    ShishkinMesh2D,
    SubRegion,
    build_axis,
    build_mesh,
    classify_point,
)
from .problem import (
    ExactSolution,
    NoExactSolution,
    PROBLEMS,
    ProblemSpec,
    eval_exact,
    eval_source,
    make_benchmark,
    validate_problem,
)
from .solver import Preconditioner, SolveMethod, SolveStats, SolverConfig, solve
from .stabilization import DeltaField, DeltaVariant, admissible_cstar

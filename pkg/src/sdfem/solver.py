"""Sparse linear solvers: restarted GMRES with simple preconditioning and a
direct sparse LU fallback used for small systems and cross-validation.

The reported residual is always recomputed from a fresh matrix-vector
product, never taken from the Krylov estimate.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import SparseSystem


class Breakdown(RuntimeError):
    pass


class SingularFactor(RuntimeError):
    pass


class SolveMethod(enum.Enum):
    GMRES_RESTARTED = "gmres"
    DIRECT_LU = "direct"


class Preconditioner(enum.Enum):
    NONE = "none"
    JACOBI = "jacobi"
    ILU0 = "ilu0"


@dataclass(frozen=True)
class SolverConfig:
    method: SolveMethod = SolveMethod.GMRES_RESTARTED
    restart: int = 60
    max_iterations: int = 10000  # total Krylov steps across restarts
    rel_residual_tol: float = 1e-10
    preconditioner: Preconditioner = Preconditioner.ILU0

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if not 0.0 < self.rel_residual_tol < 1e-2:
            raise ValueError("rel_residual_tol must lie in (0, 1e-2)")


@dataclass
class SolveStats:
    iterations: int
    residual: float  # recomputed ||F - A u|| / ||F||
    wall_time: float
    method: str
    converged: bool
    residual_history: list[float] = field(default_factory=list, repr=False)


def _make_preconditioner(A: sp.csr_matrix, kind: Preconditioner):
    if kind is Preconditioner.NONE:
        return None, "none"
    if kind is Preconditioner.ILU0:
        try:
            ilu = spla.spilu(A.tocsc(), drop_tol=1e-4, fill_factor=10)
            return spla.LinearOperator(A.shape, ilu.solve), "ilu0"
        except RuntimeError:
            pass  # zero pivot: fall back to Jacobi
    d = A.diagonal()
    if np.any(d == 0.0):
        return None, "none"
    inv = 1.0 / d
    return spla.LinearOperator(A.shape, lambda v: inv * v), "jacobi"


def solve(system: SparseSystem, config: SolverConfig = SolverConfig()):
    """Solve the assembled system; returns (solution, SolveStats).

    GMRES starts from the zero vector for determinism. On stagnation the
    best iterate is returned with stats.converged = False.
    """
    A, F = system.matrix, system.rhs
    if A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError("system must be square with dimension >= 1")
    norm_f = np.linalg.norm(F)
    t0 = time.perf_counter()

    if config.method is SolveMethod.DIRECT_LU:
        try:
            lu = spla.splu(A.tocsc())
        except RuntimeError as exc:
            raise SingularFactor(str(exc)) from exc
        u = lu.solve(F)
        res = np.linalg.norm(F - A @ u) / norm_f if norm_f > 0 else 0.0
        return u, SolveStats(
            iterations=1,
            residual=res,
            wall_time=time.perf_counter() - t0,
            method="direct",
            converged=bool(np.isfinite(u).all()),
        )

    M, prec_name = _make_preconditioner(A, config.preconditioner)
    history: list[float] = []
    cycles = max(1, math.ceil(config.max_iterations / config.restart))
    u, info = spla.gmres(
        A,
        F,
        x0=np.zeros_like(F),
        rtol=config.rel_residual_tol,
        atol=0.0,
        restart=config.restart,
        maxiter=cycles,
        M=M,
        callback=lambda r: history.append(float(r)),
        callback_type="pr_norm",
    )
    if info < 0:
        raise Breakdown(f"GMRES illegal input or breakdown (info={info})")
    res = np.linalg.norm(F - A @ u) / norm_f if norm_f > 0 else 0.0
    return u, SolveStats(
        iterations=len(history),
        residual=res,
        wall_time=time.perf_counter() - t0,
        method=f"gmres({config.restart})+{prec_name}",
        converged=(res <= config.rel_residual_tol),
        residual_history=history,
    )

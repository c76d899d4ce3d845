"""Continuous problem data: coefficients, source, exact solutions.

Scalar fields are vectorized callables. The exact solution and the source
take the boundary offsets (sx, sy) = (1-x, 1-y) as first-class arguments so
layer-cell quadrature never forms 1-x by subtracting near-1 doubles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class NoExactSolution(ValueError):
    """The problem carries no exact solution."""


@dataclass(frozen=True)
class ExactSolution:
    value: Callable  # (x, y, sx, sy) -> u
    gradient: Callable  # (x, y, sx, sy) -> (u_x, u_y)


@dataclass(frozen=True)
class ProblemSpec:
    """-eps*Lap(u) + b.grad(u) + c*u = f on (0,1)^2, u = 0 on the boundary."""

    epsilon: float
    b1: Callable  # (x, y) -> field
    b2: Callable
    c: Callable
    f: Callable  # (x, y, sx, sy) -> field
    beta1: float
    beta2: float
    mu0: float
    exact: ExactSolution | None = None
    name: str = "custom"

    def require_exact(self) -> ExactSolution:
        if self.exact is None:
            raise NoExactSolution(f"problem {self.name!r} has no exact solution")
        return self.exact


def eval_exact(problem: ProblemSpec, x, y, sx=None, sy=None):
    """Exact solution value; offsets default to 1-x, 1-y (lossy near 1)."""
    exact = problem.require_exact()
    if sx is None:
        sx = 1.0 - np.asarray(x, dtype=float)
    if sy is None:
        sy = 1.0 - np.asarray(y, dtype=float)
    return exact.value(x, y, sx, sy)


def eval_source(problem: ProblemSpec, x, y, sx=None, sy=None):
    if sx is None:
        sx = 1.0 - np.asarray(x, dtype=float)
    if sy is None:
        sy = 1.0 - np.asarray(y, dtype=float)
    return problem.f(x, y, sx, sy)


def make_benchmark(epsilon: float) -> ProblemSpec:
    """-eps*Lap(u) + 2 u_x + u_y + u = f with the manufactured solution

        u(x,y) = 2 sin(x) (1 - exp(-2(1-x)/eps)) * y^2 (1 - exp(-(1-y)/eps)).

    f is hand-derived in closed form; a finite-difference oracle in the test
    suite guards the derivation.
    """
    eps = float(epsilon)

    def _parts(x, y, sx, sy):
        # layer exponentials from exact offsets; underflow to 0 is correct
        ex = np.exp(-2.0 * np.asarray(sx, dtype=float) / eps)
        ey = np.exp(-np.asarray(sy, dtype=float) / eps)
        return ex, ey

    def value(x, y, sx, sy):
        ex, ey = _parts(x, y, sx, sy)
        return 2.0 * np.sin(x) * (1.0 - ex) * y * y * (1.0 - ey)

    def gradient(x, y, sx, sy):
        ex, ey = _parts(x, y, sx, sy)
        g = 2.0 * np.sin(x) * (1.0 - ex)
        gp = 2.0 * np.cos(x) * (1.0 - ex) - (4.0 / eps) * np.sin(x) * ex
        w = y * y * (1.0 - ey)
        wp = 2.0 * y * (1.0 - ey) - (y * y / eps) * ey
        return gp * w, g * wp

    def source(x, y, sx, sy):
        ex, ey = _parts(x, y, sx, sy)
        sinx, cosx = np.sin(x), np.cos(x)
        g = 2.0 * sinx * (1.0 - ex)
        gp = 2.0 * cosx * (1.0 - ex) - (4.0 / eps) * sinx * ex
        gpp = (-2.0 * sinx * (1.0 - ex)
               - (8.0 / eps) * cosx * ex
               - (8.0 / (eps * eps)) * sinx * ex)
        w = y * y * (1.0 - ey)
        wp = 2.0 * y * (1.0 - ey) - (y * y / eps) * ey
        wpp = 2.0 * (1.0 - ey) - (4.0 * y / eps) * ey - (y * y / (eps * eps)) * ey
        return (-eps * (gpp * w + g * wpp)
                + 2.0 * gp * w + g * wp + g * w)

    def const(v):
        return lambda x, y: v + 0.0 * np.asarray(x, dtype=float) + 0.0 * np.asarray(y, dtype=float)

    return ProblemSpec(
        epsilon=eps,
        b1=const(2.0),
        b2=const(1.0),
        c=const(1.0),
        f=source,
        beta1=2.0,
        beta2=1.0,
        mu0=1.0,
        exact=ExactSolution(value=value, gradient=gradient),
        name="paper-benchmark",
    )


PROBLEMS: dict[str, Callable[[float], ProblemSpec]] = {
    "paper-benchmark": make_benchmark,
}


@dataclass(frozen=True)
class ValidationReport:
    min_b1: float
    min_b2: float
    min_mu: float
    beta1_ok: bool
    beta2_ok: bool
    mu0_ok: bool

    @property
    def passed(self) -> bool:
        return self.beta1_ok and self.beta2_ok and self.mu0_ok


def validate_problem(problem: ProblemSpec, sample_density: int = 16) -> ValidationReport:
    """Check the coefficient assumptions by dense sampling.

    b1 >= beta1, b2 >= beta2 on a full grid; c - 0.5*div(b) >= mu0 on an
    interior grid (div(b) by central differences, step 1e-6).
    """
    if sample_density < 2:
        raise ValueError("sample_density must be >= 2")
    t = np.linspace(0.0, 1.0, sample_density)
    X, Y = np.meshgrid(t, t)
    min_b1 = float(np.min(problem.b1(X, Y)))
    min_b2 = float(np.min(problem.b2(X, Y)))

    d = 1e-6
    ti = np.linspace(d, 1.0 - d, sample_density)
    Xi, Yi = np.meshgrid(ti, ti)
    div_b = ((problem.b1(Xi + d, Yi) - problem.b1(Xi - d, Yi)) / (2 * d)
             + (problem.b2(Xi, Yi + d) - problem.b2(Xi, Yi - d)) / (2 * d))
    min_mu = float(np.min(problem.c(Xi, Yi) - 0.5 * div_b))

    return ValidationReport(
        min_b1=min_b1,
        min_b2=min_b2,
        min_mu=min_mu,
        beta1_ok=min_b1 >= problem.beta1 - 1e-12,
        beta2_ok=min_b2 >= problem.beta2 - 1e-12,
        mu0_ok=min_mu >= problem.mu0 - 1e-9,
    )

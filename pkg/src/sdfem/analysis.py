"""Error analysis: energy and streamline-diffusion norms (global and
region-restricted), bilinear interpolation, closed-form layer integrals and
convergence rates.

All region boundaries are mesh lines, so region restriction is cell-aligned
and cells are never split.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .discretization import QuadratureRule, _cell_geometry
from .mesh import Region, ShishkinMesh2D, SubRegion
from .problem import ProblemSpec
from .stabilization import DeltaField


class UnknownRegion(ValueError):
    pass


class NonpositiveError(ValueError):
    pass


class RegionSel(enum.Enum):
    GLOBAL = "global"
    OMEGA_S = "omega_s"
    OMEGA_S_EPS = "omega_s_eps"
    OMEGA_S_EPS_COMPLEMENT = "omega_s_eps_complement"
    OMEGA_X = "omega_x"
    OMEGA_Y = "omega_y"
    OMEGA_XY = "omega_xy"


def _region_mask(mesh: ShishkinMesh2D, region: RegionSel) -> np.ndarray:
    if region is RegionSel.GLOBAL:
        return mesh.region_mask(None)
    if region is RegionSel.OMEGA_S:
        return mesh.region_mask(Region.OMEGA_S)
    if region is RegionSel.OMEGA_S_EPS:
        return mesh.region_mask(Region.OMEGA_S, SubRegion.INNER)
    if region is RegionSel.OMEGA_S_EPS_COMPLEMENT:
        return mesh.region_mask(Region.OMEGA_S, SubRegion.STRIP)
    if region is RegionSel.OMEGA_X:
        return mesh.region_mask(Region.OMEGA_X)
    if region is RegionSel.OMEGA_Y:
        return mesh.region_mask(Region.OMEGA_Y)
    if region is RegionSel.OMEGA_XY:
        return mesh.region_mask(Region.OMEGA_XY)
    raise UnknownRegion(str(region))


@dataclass(frozen=True)
class DiscreteFunction:
    """Piecewise bilinear function given by nodal values on the mesh.

    values[i, j] is the value at node (x_i, y_j), boundary included.
    """

    mesh: ShishkinMesh2D
    values: np.ndarray

    def __post_init__(self):
        n = self.mesh.N + 1
        if self.values.shape != (n, n):
            raise ValueError(f"nodal values must have shape {(n, n)}")

    @classmethod
    def from_dof_vector(cls, mesh: ShishkinMesh2D, u: np.ndarray) -> "DiscreteFunction":
        N = mesh.N
        vals = np.zeros((N + 1, N + 1))
        vals[1:N, 1:N] = u.reshape(N - 1, N - 1).T
        return cls(mesh=mesh, values=vals)

    def corner_values(self):
        """Per-cell corner arrays (v00, v10, v11, v01), flat cell order."""
        N = self.mesh.N
        I = np.tile(np.arange(N), N)
        J = np.repeat(np.arange(N), N)
        v = self.values
        return v[I, J], v[I + 1, J], v[I + 1, J + 1], v[I, J + 1]


def interpolant(problem: ProblemSpec, mesh: ShishkinMesh2D) -> DiscreteFunction:
    """Nodal interpolant of the exact solution (layer nodes via offsets)."""
    exact = problem.require_exact()
    xs = mesh.x_axis.nodes
    ys = mesh.y_axis.nodes
    sx = mesh.x_axis.node_sigma
    sy = mesh.y_axis.node_sigma
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    SX, SY = np.meshgrid(sx, sy, indexing="ij")
    return DiscreteFunction(mesh=mesh, values=np.asarray(exact.value(X, Y, SX, SY)))


@dataclass(frozen=True)
class ErrorReport:
    region: RegionSel
    eps_norm: float
    sd_norm: float
    components: tuple[float, float, float]  # (eps*|.|_1^2, mu0*||.||^2, stab^2)
    max_nodal_error: float


class ErrorComputation:
    """Per-cell norm contributions of u - u_h, computed once and aggregated
    over any region afterwards. With exact=None the norms of u_h itself are
    computed (used for coercivity checks on discrete functions)."""

    def __init__(
        self,
        u_h: DiscreteFunction,
        delta_field: DeltaField,
        problem: ProblemSpec,
        use_exact: bool = True,
        quad_order: int = 5,
    ):
        if quad_order < 2:
            raise ValueError("quad_order must be >= 2")
        mesh = u_h.mesh
        self.mesh = mesh
        self.problem = problem
        exact = problem.require_exact() if use_exact else None

        WX, WY, LX, LY, SLX, SLY, I, J = _cell_geometry(mesh)
        jac = WX * WY / 4.0
        in_omega_s = (I < mesh.N // 2) & (J < mesh.N // 2)
        v00, v10, v11, v01 = u_h.corner_values()
        rule = QuadratureRule.gauss(quad_order)
        mu0 = problem.mu0

        grad2 = np.zeros_like(WX)
        l2 = np.zeros_like(WX)
        stab = np.zeros_like(WX)
        for a, pa in enumerate(rule.points_1d):
            for b, pb in enumerate(rule.points_1d):
                w2 = rule.weights_1d[a] * rule.weights_1d[b] * jac
                ax_ = 0.5 * (1.0 + pa)
                ay_ = 0.5 * (1.0 + pb)
                X = LX + ax_ * WX
                Y = LY + ay_ * WY
                SX = SLX - ax_ * WX
                SY = SLY - ay_ * WY
                nx0, nx1 = 1.0 - ax_, ax_
                ny0, ny1 = 1.0 - ay_, ay_
                uh = (v00 * nx0 * ny0 + v10 * nx1 * ny0
                      + v11 * nx1 * ny1 + v01 * nx0 * ny1)
                uh_x = ((v10 - v00) * ny0 + (v11 - v01) * ny1) / WX
                uh_y = ((v01 - v00) * nx0 + (v11 - v10) * nx1) / WY
                if exact is not None:
                    e = np.asarray(exact.value(X, Y, SX, SY)) - uh
                    gx_ex, gy_ex = exact.gradient(X, Y, SX, SY)
                    ex = np.asarray(gx_ex) - uh_x
                    ey = np.asarray(gy_ex) - uh_y
                else:
                    e, ex, ey = uh, uh_x, uh_y
                grad2 += w2 * (ex * ex + ey * ey)
                l2 += w2 * e * e
                conv = problem.b1(X, Y) * ex + problem.b2(X, Y) * ey
                stab += w2 * delta_field.evaluate_cells(in_omega_s, X, Y) * conv * conv

        self.cell_eps_grad2 = problem.epsilon * grad2
        self.cell_mu_l2 = mu0 * l2
        self.cell_stab2 = stab

        # nodal errors for the max-norm column of the report
        if exact is not None:
            xs, ys = mesh.x_axis.nodes, mesh.y_axis.nodes
            sxn, syn = mesh.x_axis.node_sigma, mesh.y_axis.node_sigma
            Xn, Yn = np.meshgrid(xs, ys, indexing="ij")
            SXn, SYn = np.meshgrid(sxn, syn, indexing="ij")
            self.nodal_abs_err = np.abs(
                np.asarray(exact.value(Xn, Yn, SXn, SYn)) - u_h.values
            )
        else:
            self.nodal_abs_err = np.abs(u_h.values)

    def report(self, region: RegionSel = RegionSel.GLOBAL) -> ErrorReport:
        mask = _region_mask(self.mesh, region)
        eg = float(np.sum(self.cell_eps_grad2[mask]))
        ml = float(np.sum(self.cell_mu_l2[mask]))
        st = float(np.sum(self.cell_stab2[mask]))
        eps_norm = math.sqrt(eg + ml)
        sd_norm = math.sqrt(eg + ml + st)

        # nodes touching a cell of the region
        N = self.mesh.N
        node_mask = np.zeros((N + 1, N + 1), dtype=bool)
        cells = np.nonzero(mask)[0]
        ci = cells % N
        cj = cells // N
        for di in (0, 1):
            for dj in (0, 1):
                node_mask[ci + di, cj + dj] = True
        max_nodal = float(np.max(self.nodal_abs_err[node_mask])) if cells.size else 0.0

        return ErrorReport(
            region=region,
            eps_norm=eps_norm,
            sd_norm=sd_norm,
            components=(eg, ml, st),
            max_nodal_error=max_nodal,
        )


def error_norm(
    problem: ProblemSpec,
    u_h: DiscreteFunction,
    delta_field: DeltaField,
    region: RegionSel = RegionSel.GLOBAL,
    quad_order: int = 5,
) -> ErrorReport:
    """Error norms of u - u_h over one region (see ErrorComputation for the
    amortized multi-region path)."""
    if quad_order < 4:
        raise ValueError("error quadrature must use order >= 4")
    comp = ErrorComputation(u_h, delta_field, problem, use_exact=True, quad_order=quad_order)
    return comp.report(region)


def sd_norm_discrete(
    u_h: DiscreteFunction,
    problem: ProblemSpec,
    delta_field: DeltaField,
    quad_order: int = 4,
) -> float:
    """SD norm of a discrete function itself (no exact solution involved)."""
    comp = ErrorComputation(u_h, delta_field, problem, use_exact=False, quad_order=quad_order)
    r = comp.report(RegionSel.GLOBAL)
    return r.sd_norm


def rate(e_coarse: float, e_fine: float) -> float:
    """Convergence rate log2(e_coarse / e_fine) between N and 2N."""
    if e_coarse <= 0.0 or e_fine <= 0.0:
        raise NonpositiveError("rates require strictly positive errors")
    return (math.log(e_coarse) - math.log(e_fine)) / math.log(2.0)


@dataclass(frozen=True)
class LayerIntegrals:
    """Closed-form vs composite-quadrature values of the layer integrals

        tail  = int_0^{x_s} exp(-2*beta*(1-x)/eps) dx
        strip = int_{x_s}^{x_t} exp(-2*beta*(1-x)/eps) * (x_t-x)/H dx
    """

    tail_closed: float
    tail_quad: float
    strip_closed: float
    strip_quad: float


def _composite_gauss(fn, lo: float, hi: float, panels: int = 50, order: int = 10) -> float:
    p, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    total = 0.0
    for k in range(panels):
        a, b = edges[k], edges[k + 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        total += half * float(np.sum(w * fn(mid + half * p)))
    return total


def layer_integral_oracle(
    epsilon: float, beta: float, x_s: float, x_t: float, H: float
) -> LayerIntegrals:
    """Exact antiderivative values and composite quadrature, both in offset
    coordinates. The quadrature truncates the exponential tail at 60/a
    (relative truncation error below 1e-26)."""
    if not 0.0 < x_s < x_t <= 1.0:
        raise ValueError("need 0 < x_s < x_t <= 1")
    a = 2.0 * beta / epsilon
    lam = 1.0 - x_t
    sigma_s = 1.0 - x_s

    tail_closed = (math.exp(-a * sigma_s) - math.exp(-a)) / a
    cut = min(1.0 - sigma_s, 60.0 / a)
    tail_quad = _composite_gauss(
        lambda s: np.exp(-a * (sigma_s + s)), 0.0, cut
    ) if cut > 0 else 0.0

    aH = a * H
    scale = math.exp(-a * lam)
    strip_closed = scale / (H * a * a) * (1.0 - math.exp(-aH) * (1.0 + aH))
    cut = min(H, 60.0 / a)
    strip_quad = scale / H * _composite_gauss(lambda t: np.exp(-a * t) * t, 0.0, cut)

    return LayerIntegrals(
        tail_closed=tail_closed,
        tail_quad=tail_quad,
        strip_closed=strip_closed,
        strip_quad=strip_quad,
    )


@dataclass(frozen=True)
class ErrorGrid:
    """Row-major pointwise |u - u_h| samples, layer points in offset form."""

    x: np.ndarray
    y: np.ndarray
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    abs_error: np.ndarray


def pointwise_error_grid(
    problem: ProblemSpec, u_h: DiscreteFunction, samples_per_cell: int = 1
) -> ErrorGrid:
    """Sample |u - u_h| on an s x s subgrid of every cell (cell midpoints
    for s = 1); layer cells are sampled in offset coordinates."""
    if samples_per_cell < 1:
        raise ValueError("samples_per_cell must be >= 1")
    exact = problem.require_exact()
    mesh = u_h.mesh
    N = mesh.N
    s = samples_per_cell
    WX, WY, LX, LY, SLX, SLY, I, J = _cell_geometry(mesh)
    v00, v10, v11, v01 = u_h.corner_values()

    alphas = (np.arange(s) + 0.5) / s
    xs, ys, sxs, sys, errs = [], [], [], [], []
    for ab in alphas:
        for aa in alphas:
            X = LX + aa * WX
            Y = LY + ab * WY
            SX = SLX - aa * WX
            SY = SLY - ab * WY
            uh = (v00 * (1 - aa) * (1 - ab) + v10 * aa * (1 - ab)
                  + v11 * aa * ab + v01 * (1 - aa) * ab)
            err = np.abs(np.asarray(exact.value(X, Y, SX, SY)) - uh)
            xs.append(X)
            ys.append(Y)
            sxs.append(SX)
            sys.append(SY)
            errs.append(err)
    return ErrorGrid(
        x=np.concatenate(xs),
        y=np.concatenate(ys),
        sigma_x=np.concatenate(sxs),
        sigma_y=np.concatenate(sys),
        abs_error=np.concatenate(errs),
    )

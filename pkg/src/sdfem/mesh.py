"""Tensor-product Shishkin meshes on the unit square.

The mesh is piecewise uniform per axis: N/2 coarse cells on [0, 1-lambda]
and N/2 fine cells on [1-lambda, 1], with lambda = rho*(eps/beta)*ln(N).
Fine breakpoints are stored as offsets sigma = 1 - x so that layer geometry
stays exact down to eps = 1e-16, where the absolute coordinates collide in
double precision.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class InvalidSpec(ValueError):
    """Axis parameters violate the mesh construction assumptions."""


class OutOfDomain(ValueError):
    """Point lies outside the closed unit square."""


class Region(enum.Enum):
    OMEGA_S = "omega_s"
    OMEGA_X = "omega_x"
    OMEGA_Y = "omega_y"
    OMEGA_XY = "omega_xy"


class SubRegion(enum.Enum):
    """Refinement of OMEGA_S: the eps-safe interior vs the last coarse strip."""

    INNER = "inner"
    STRIP = "strip"


# integer codes used in the per-cell tag array
_CODE_S_INNER = 0
_CODE_S_STRIP = 1
_CODE_X = 2
_CODE_Y = 3
_CODE_XY = 4

_CODE_TO_REGION = {
    _CODE_S_INNER: (Region.OMEGA_S, SubRegion.INNER),
    _CODE_S_STRIP: (Region.OMEGA_S, SubRegion.STRIP),
    _CODE_X: (Region.OMEGA_X, None),
    _CODE_Y: (Region.OMEGA_Y, None),
    _CODE_XY: (Region.OMEGA_XY, None),
}


@dataclass(frozen=True)
class AxisSpec:
    """Parameters of one axis of the Shishkin mesh."""

    N: int
    epsilon: float
    beta: float
    rho: float = 2.5

    def __post_init__(self):
        if self.N < 4 or self.N % 2 != 0:
            raise InvalidSpec(f"N must be even and >= 4, got {self.N}")
        if not self.epsilon > 0.0:
            raise InvalidSpec(f"epsilon must be positive, got {self.epsilon}")
        if not self.beta > 0.0:
            raise InvalidSpec(f"beta must be positive, got {self.beta}")
        if not self.rho > 0.0:
            raise InvalidSpec(f"rho must be positive, got {self.rho}")
        if self.epsilon > 1.0 / self.N:
            raise InvalidSpec(
                f"epsilon={self.epsilon} violates epsilon <= 1/N with N={self.N}"
            )
        lam = self.transition_width
        if not 0.0 < lam < 0.5:
            raise InvalidSpec(f"transition width lambda={lam} not in (0, 1/2)")

    @property
    def transition_width(self) -> float:
        """lambda = rho*(eps/beta)*ln(N)."""
        return self.rho * (self.epsilon / self.beta) * math.log(self.N)


@dataclass(frozen=True)
class Axis1D:
    """Breakpoints of one axis, coarse part absolute, fine part as offsets."""

    spec: AxisSpec
    lam: float
    H: float  # coarse step (1-lam)/(N/2)
    h: float  # fine step lam/(N/2)
    coarse_points: np.ndarray  # N/2+1 absolute coords in [0, 1-lam]
    fine_offsets: np.ndarray  # N/2+1 offsets sigma_i = 1-x_i, i = N/2..N

    # derived per-cell arrays (length N), filled in build_axis
    cell_width: np.ndarray = field(repr=False, default=None)
    cell_left: np.ndarray = field(repr=False, default=None)  # absolute, lossy in layer
    cell_sigma_left: np.ndarray = field(repr=False, default=None)  # exact offsets
    node_sigma: np.ndarray = field(repr=False, default=None)  # N+1 exact offsets

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def transition_point(self) -> float:
        """x_t = 1 - lambda."""
        return self.coarse_points[-1]

    @property
    def strip_point(self) -> float:
        """x_s = x_t - H, the left edge of the last coarse cell."""
        return self.coarse_points[-2]

    @property
    def nodes(self) -> np.ndarray:
        """All N+1 breakpoints as absolute coordinates (lossy in the layer)."""
        return np.concatenate([self.coarse_points[:-1], 1.0 - self.fine_offsets])


def build_axis(spec: AxisSpec) -> Axis1D:
    """Construct the 1D Shishkin breakpoint sets for one axis."""
    N = spec.N
    half = N // 2
    lam = spec.transition_width
    H = (1.0 - lam) / half
    h = lam / half

    i = np.arange(half + 1)
    coarse = 2.0 * i * (1.0 - lam) / N
    coarse[-1] = 1.0 - lam  # exact transition point in the generating arithmetic

    # sigma_i = 2*(N-i)*lam/N for i = N/2..N, strictly decreasing to 0
    k = np.arange(half, -1, -1)  # N-i
    fine_offsets = 2.0 * k * lam / N
    fine_offsets[0] = lam

    cell_width = np.concatenate([np.full(half, H), np.full(half, h)])
    cell_left = np.concatenate([coarse[:-1], 1.0 - fine_offsets[:-1]])
    # exact offsets of every node: coarse ones via x_t - x (no near-1 subtraction)
    coarse_sigma = (coarse[-1] - coarse) + lam
    node_sigma = np.concatenate([coarse_sigma[:-1], fine_offsets])
    cell_sigma_left = node_sigma[:-1].copy()

    return Axis1D(
        spec=spec,
        lam=lam,
        H=H,
        h=h,
        coarse_points=coarse,
        fine_offsets=fine_offsets,
        cell_width=cell_width,
        cell_left=cell_left,
        cell_sigma_left=cell_sigma_left,
        node_sigma=node_sigma,
    )


@dataclass(frozen=True)
class ShishkinMesh2D:
    """Tensor-product Shishkin mesh with per-cell region tags.

    Cells are indexed (i, j) for [x_i, x_{i+1}] x [y_j, y_{j+1}]; the flat
    cell id is j*N + i. Immutable after construction.
    """

    x_axis: Axis1D
    y_axis: Axis1D
    cell_codes: np.ndarray = field(repr=False, default=None)  # (N*N,) uint8

    @property
    def N(self) -> int:
        return self.x_axis.N

    @property
    def x_t(self) -> float:
        return self.x_axis.transition_point

    @property
    def x_s(self) -> float:
        return self.x_axis.strip_point

    @property
    def y_t(self) -> float:
        return self.y_axis.transition_point

    @property
    def y_s(self) -> float:
        return self.y_axis.strip_point

    def cell_region(self, i: int, j: int) -> tuple[Region, SubRegion | None]:
        return _CODE_TO_REGION[int(self.cell_codes[j * self.N + i])]

    def region_mask(self, region: Region | None, sub: SubRegion | None = None) -> np.ndarray:
        """Boolean mask over flat cell ids; region=None selects every cell."""
        codes = self.cell_codes
        if region is None:
            return np.ones_like(codes, dtype=bool)
        if region is Region.OMEGA_S:
            if sub is SubRegion.INNER:
                return codes == _CODE_S_INNER
            if sub is SubRegion.STRIP:
                return codes == _CODE_S_STRIP
            return codes <= _CODE_S_STRIP
        return codes == {Region.OMEGA_X: _CODE_X, Region.OMEGA_Y: _CODE_Y,
                         Region.OMEGA_XY: _CODE_XY}[region]


def build_mesh(x_spec: AxisSpec, y_spec: AxisSpec) -> ShishkinMesh2D:
    """Construct the 2D tensor-product mesh with region classification."""
    if x_spec.N != y_spec.N:
        raise InvalidSpec("both axes must use the same N")
    ax = build_axis(x_spec)
    ay = build_axis(y_spec)
    N = x_spec.N
    half = N // 2

    i = np.arange(N)
    j = np.arange(N)
    I, J = np.meshgrid(i, j)  # shape (N, N), J row-major -> flat id j*N+i
    codes = np.empty((N, N), dtype=np.uint8)
    coarse_i = I < half
    coarse_j = J < half
    codes[coarse_i & coarse_j] = _CODE_S_INNER
    strip = coarse_i & coarse_j & ((I == half - 1) | (J == half - 1))
    codes[strip] = _CODE_S_STRIP
    codes[~coarse_i & coarse_j] = _CODE_X
    codes[coarse_i & ~coarse_j] = _CODE_Y
    codes[~coarse_i & ~coarse_j] = _CODE_XY

    return ShishkinMesh2D(x_axis=ax, y_axis=ay, cell_codes=codes.ravel())


def classify_point(
    mesh: ShishkinMesh2D, x: float, y: float, as_offsets: bool = False
) -> tuple[Region, SubRegion | None]:
    """Region containing (x, y); ties on interfaces resolve toward Omega_s.

    With as_offsets=True the inputs are (1-x, 1-y), which is the exact
    representation for layer-region points.
    """
    if as_offsets:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise OutOfDomain(f"offsets outside [0,1]: ({x}, {y})")
        # exact offset comparisons against the exact layer widths
        in_sx = x >= mesh.x_axis.lam
        in_sy = y >= mesh.y_axis.lam
        inner = (x >= mesh.x_axis.lam + mesh.x_axis.H
                 and y >= mesh.y_axis.lam + mesh.y_axis.H)
    else:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise OutOfDomain(f"point outside the unit square: ({x}, {y})")
        # compare against the stored breakpoints so x = x_t ties exactly
        in_sx = x <= mesh.x_t
        in_sy = y <= mesh.y_t
        inner = x <= mesh.x_s and y <= mesh.y_s
    if in_sx and in_sy:
        return Region.OMEGA_S, (SubRegion.INNER if inner else SubRegion.STRIP)
    if in_sy:
        return Region.OMEGA_X, None
    if in_sx:
        return Region.OMEGA_Y, None
    return Region.OMEGA_XY, None


def dump_mesh(mesh: ShishkinMesh2D) -> str:
    """Line-oriented text dump: axis, index, kind (abs|offset), value."""
    lines = []
    for name, axis in (("x", mesh.x_axis), ("y", mesh.y_axis)):
        half = axis.N // 2
        for idx in range(half):
            lines.append(f"{name} {idx} abs {axis.coarse_points[idx]:.17g}")
        for idx in range(half, axis.N + 1):
            lines.append(f"{name} {idx} offset {axis.fine_offsets[idx - half]:.17g}")
    return "\n".join(lines) + "\n"

"""Uniform grids on boxes, nodal fields, discrete gradients and norms.

Conventions used throughout the package:

* nodal values live on the tensor lattice of the box, spacing h on every axis;
* gradients and integrands are evaluated on the cell lattice (one cell per
  h-cube); component i of the discrete gradient is the average of the forward
  differences along axis i over the 2^(n-1) edges of the cell, so affine
  fields are differentiated exactly;
* level sets are counted on nodes (measure = h^n * node count), integrals are
  cell quadratures with nodal values averaged to cell centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "Ball",
    "make_grid",
    "gradient",
    "cell_average",
    "lp_norm",
    "superlevel_measure",
    "truncate",
    "write_gridfn",
    "read_gridfn",
]


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid: box = prod_i [lo_i, hi_i], spacing h on all axes."""

    n: int
    lo: tuple
    hi: tuple
    h: float
    shape: tuple  # node counts per axis

    @property
    def cell_shape(self) -> tuple:
        return tuple(m - 1 for m in self.shape)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.shape))

    def node_axes(self):
        return [self.lo[i] + self.h * np.arange(self.shape[i]) for i in range(self.n)]

    def cell_axes(self):
        return [
            self.lo[i] + self.h * (np.arange(self.shape[i] - 1) + 0.5)
            for i in range(self.n)
        ]

    def node_points(self) -> np.ndarray:
        """All node coordinates, shape (num_nodes, n), row-major order."""
        mesh = np.meshgrid(*self.node_axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def cell_centers(self) -> np.ndarray:
        """All cell-center coordinates, shape (num_cells, n), row-major order."""
        mesh = np.meshgrid(*self.cell_axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def contains_ball(self, ball: "Ball") -> bool:
        return all(
            self.lo[i] <= ball.x0[i] - ball.R and ball.x0[i] + ball.R <= self.hi[i]
            for i in range(self.n)
        )


@dataclass(frozen=True)
class GridFunction:
    """Real nodal field on a grid; values has shape grid.shape, all finite."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def scaled(self, t: float) -> "GridFunction":
        return GridFunction(self.grid, t * self.values)

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)


@dataclass(frozen=True)
class Ball:
    """Open Euclidean ball B_R(x0)."""

    x0: tuple
    R: float

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if self.R <= 0:
            raise ValueError(f"ball radius must be positive, got {self.R}")

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict membership |x - x0| < R for an (N, n) array of points."""
        diff = points - np.asarray(self.x0)
        return np.einsum("ij,ij->i", diff, diff) < self.R * self.R


def make_grid(box, h: float) -> Grid:
    """Build a grid over box = [(lo_1, hi_1), ...]; h must divide every side."""
    box = [(float(lo), float(hi)) for lo, hi in box]
    if not box:
        raise ValueError("empty box")
    if h <= 0:
        raise ValueError(f"spacing must be positive, got {h}")
    shape = []
    for lo, hi in box:
        if hi <= lo:
            raise ValueError(f"degenerate box side [{lo}, {hi}]")
        side = hi - lo
        m = round(side / h)
        if m < 1 or abs(m * h - side) > 1e-9 * max(side, 1.0):
            raise ValueError(f"spacing {h} does not divide side [{lo}, {hi}]")
        shape.append(m + 1)
    lo = tuple(b[0] for b in box)
    hi = tuple(b[1] for b in box)
    return Grid(n=len(box), lo=lo, hi=hi, h=float(h), shape=tuple(shape))


def _pair_average(a: np.ndarray, axis: int) -> np.ndarray:
    lead = (slice(None),) * axis
    return 0.5 * (a[lead + (slice(1, None),)] + a[lead + (slice(None, -1),)])


def gradient(u: GridFunction) -> np.ndarray:
    """Discrete gradient on the cell lattice, shape (n, *cell_shape)."""
    g = u.grid
    if any(m < 2 for m in g.shape):
        raise ValueError("gradient needs at least 2 nodes per axis")
    comps = []
    for i in range(g.n):
        d = np.diff(u.values, axis=i) / g.h
        for j in range(g.n):
            if j != i:
                d = _pair_average(d, axis=j)
        comps.append(d)
    return np.stack(comps, axis=0)


def cell_average(u: GridFunction) -> np.ndarray:
    """Nodal values averaged to cell centers, shape cell_shape."""
    a = u.values
    for axis in range(u.grid.n):
        a = _pair_average(a, axis=axis)
    return a


def _region_mask(grid: Grid, region, points: np.ndarray, shape: tuple) -> np.ndarray:
    if region is None:
        return np.ones(shape, dtype=bool)
    if isinstance(region, Ball):
        return region.contains(points).reshape(shape)
    if isinstance(region, np.ndarray):
        return region.reshape(shape)
    return np.asarray(region(points), dtype=bool).reshape(shape)


def cell_mask(grid: Grid, region) -> np.ndarray:
    """Boolean mask over cells; region is None, a Ball, a mask, or a predicate on centers."""
    return _region_mask(grid, region, grid.cell_centers(), grid.cell_shape)


def lp_norm(f: np.ndarray, beta: float, grid: Grid, region=None) -> float:
    """L^beta norm of a cell field by midpoint quadrature; max over cells at beta = inf."""
    if beta < 1:
        raise ValueError(f"need beta >= 1, got {beta}")
    mask = cell_mask(grid, region)
    vals = np.abs(np.asarray(f))[mask]
    if vals.size == 0:
        return 0.0
    if math.isinf(beta):
        return float(vals.max())
    return float((np.sum(vals ** beta) * grid.h ** grid.n) ** (1.0 / beta))


def superlevel_measure(u: GridFunction, k: float, ball: Ball) -> float:
    """h^n times the number of nodes with |x - x0| < R and u(x) > k."""
    g = u.grid
    inside = ball.contains(g.node_points()).reshape(g.shape)
    count = int(np.count_nonzero(inside & (u.values > k)))
    return count * g.h ** g.n


def truncate(u: GridFunction, k: float) -> GridFunction:
    """Nodewise (u - k)_+ = max(u - k, 0)."""
    return GridFunction(u.grid, np.maximum(u.values - k, 0.0))


# ---------------------------------------------------------------------------
# GRIDFN v1 file format
# ---------------------------------------------------------------------------

_MAGIC = "GRIDFN v1"


def write_gridfn(path, u: GridFunction) -> None:
    """Write a grid function in the GRIDFN v1 ASCII format (17 significant digits)."""
    g = u.grid
    lines = [_MAGIC, f"dim={g.n}"]
    lines.append("box=" + ",".join(f"{lo:.17g}:{hi:.17g}" for lo, hi in zip(g.lo, g.hi)))
    lines.append(f"h={g.h:.17g}")
    lines.extend(f"{v:.17g}" for v in u.values.ravel(order="C"))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_gridfn(path) -> GridFunction:
    """Read a GRIDFN v1 file written by write_gridfn."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"{path}: not a GRIDFN v1 file")
    try:
        dim = int(lines[1].split("=", 1)[1])
        box = [
            tuple(float(v) for v in part.split(":"))
            for part in lines[2].split("=", 1)[1].split(",")
        ]
        h = float(lines[3].split("=", 1)[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed GRIDFN header") from exc
    if len(box) != dim:
        raise ValueError(f"{path}: box has {len(box)} axes, expected {dim}")
    grid = make_grid(box, h)
    values = np.array([float(v) for v in lines[4:]])
    if values.size != grid.num_nodes:
        raise ValueError(
            f"{path}: expected {grid.num_nodes} values, found {values.size}"
        )
    return GridFunction(grid, values.reshape(grid.shape))

"""Cell-centered uniform grids with midpoint quadrature and difference operators.

The grid is the discrete body: cell-center coordinates, per-cell quadrature
weights, boundary faces with outward normals, and a Dirichlet tag for cells
sitting on clamped faces. All other modules consume grids and fields built
here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FACE_LABELS = ("x-min", "x-max", "y-min", "y-max", "z-min", "z-max")


@dataclass(frozen=True, eq=False)
class DomainGrid:
    """Uniform cell-centered grid over a box domain.

    Cell centers sit at (i + 1/2) * spacing per axis, so every point is
    strictly interior. Quadrature is the midpoint rule: every cell carries
    weight prod(spacing). Boundary faces are the outer faces of boundary
    cells; each records its owner cell, the inward neighbor (for traces),
    the outward unit normal, the face area, and the face midpoint.
    """

    dim: int
    counts: tuple[int, ...]
    lengths: tuple[float, ...]
    spacing: tuple[float, ...]
    points: np.ndarray           # (npts, dim)
    weights: np.ndarray          # (npts,)
    boundary_cells: np.ndarray   # (nfaces,) owner cell index
    boundary_neighbors: np.ndarray  # (nfaces,) first inward cell index
    boundary_normals: np.ndarray    # (nfaces, dim) signed unit axis vectors
    boundary_areas: np.ndarray      # (nfaces,)
    boundary_centers: np.ndarray    # (nfaces, dim) face midpoints
    boundary_axis: np.ndarray       # (nfaces,) axis the face is normal to
    dirichlet_faces: frozenset = field(default_factory=frozenset)
    dirichlet_mask: np.ndarray = None  # (npts,) bool

    @property
    def npts(self) -> int:
        return self.points.shape[0]

    def mesh_shape(self, ncomp: int) -> tuple[int, ...]:
        return self.counts + (ncomp,)


@dataclass(eq=False)
class Field:
    """Values of a vector quantity sampled at the grid points.

    values has shape (npts, ncomp). Arithmetic is only defined between
    fields on the identical grid object with matching component count.
    """

    values: np.ndarray
    grid: DomainGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape[0] != self.grid.npts:
            raise ValueError(
                f"field has {self.values.shape[0]} rows for a grid of {self.grid.npts} points"
            )

    @property
    def ncomp(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, grid: DomainGrid, ncomp: int) -> "Field":
        return cls(np.zeros((grid.npts, ncomp)), grid)

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid)

    def _check_compatible(self, other: "Field"):
        if other.grid is not self.grid:
            raise ValueError("fields live on different grids")
        if other.ncomp != self.ncomp:
            raise ValueError("fields have different component counts")

    def __add__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.values + other.values, self.grid)

    def __sub__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.values - other.values, self.grid)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.values * float(scalar), self.grid)

    __rmul__ = __mul__

    def inner(self, other: "Field") -> float:
        """Quadrature-weighted inner product sum_p w_p f(p).g(p)."""
        self._check_compatible(other)
        return float(np.sum(self.grid.weights[:, None] * self.values * other.values))


def build_grid(dim, counts, lengths, dirichlet_faces=()) -> DomainGrid:
    """Build a cell-centered uniform grid over [0, L1] x ... with boundary tags.

    dirichlet_faces is a set of face labels from
    {"x-min", "x-max", "y-min", "y-max", "z-min", "z-max"}; cells owning a
    face with one of these labels get dirichlet_mask set.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    counts = tuple(int(c) for c in np.atleast_1d(counts))
    lengths = tuple(float(L) for L in np.atleast_1d(lengths))
    if len(counts) != dim or len(lengths) != dim:
        raise ValueError(f"counts and lengths must have {dim} entries")
    if any(c < 2 for c in counts):
        raise ValueError(f"counts must be >= 2 per axis, got {counts}")
    if any(L <= 0 for L in lengths):
        raise ValueError(f"lengths must be positive, got {lengths}")
    dirichlet_faces = frozenset(dirichlet_faces)
    valid = set(FACE_LABELS[: 2 * dim])
    bad = dirichlet_faces - valid
    if bad:
        raise ValueError(f"unknown face labels {sorted(bad)}; valid: {sorted(valid)}")

    spacing = tuple(L / c for L, c in zip(lengths, counts))
    axes_1d = [(np.arange(c) + 0.5) * h for c, h in zip(counts, spacing)]
    mesh = np.meshgrid(*axes_1d, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    npts = points.shape[0]
    weights = np.full(npts, float(np.prod(spacing)))

    cells, neighbors, normals, areas, centers, axes = [], [], [], [], [], []
    dirichlet_mask = np.zeros(npts, dtype=bool)
    idx = np.arange(npts).reshape(counts)
    for axis in range(dim):
        face_area = float(np.prod([h for j, h in enumerate(spacing) if j != axis])) if dim > 1 else 1.0
        for side, label in ((0, FACE_LABELS[2 * axis]), (1, FACE_LABELS[2 * axis + 1])):
            sl = [slice(None)] * dim
            sl[axis] = 0 if side == 0 else counts[axis] - 1
            owner = idx[tuple(sl)].ravel()
            sl[axis] = 1 if side == 0 else counts[axis] - 2
            inward = idx[tuple(sl)].ravel()
            n_vec = np.zeros(dim)
            n_vec[axis] = -1.0 if side == 0 else 1.0
            ctr = points[owner] + 0.5 * spacing[axis] * n_vec
            cells.append(owner)
            neighbors.append(inward)
            normals.append(np.tile(n_vec, (owner.size, 1)))
            areas.append(np.full(owner.size, face_area))
            centers.append(ctr)
            axes.append(np.full(owner.size, axis))
            if label in dirichlet_faces:
                dirichlet_mask[owner] = True

    return DomainGrid(
        dim=dim,
        counts=counts,
        lengths=lengths,
        spacing=spacing,
        points=points,
        weights=weights,
        boundary_cells=np.concatenate(cells),
        boundary_neighbors=np.concatenate(neighbors),
        boundary_normals=np.concatenate(normals),
        boundary_areas=np.concatenate(areas),
        boundary_centers=np.concatenate(centers),
        boundary_axis=np.concatenate(axes),
        dirichlet_faces=dirichlet_faces,
        dirichlet_mask=dirichlet_mask,
    )


def _require_same_grid(f: Field, grid: DomainGrid):
    if f.grid is not grid:
        raise ValueError("field does not live on the given grid")


def integrate(f: Field, grid: DomainGrid) -> np.ndarray:
    """Midpoint-rule volume integral, one value per component."""
    _require_same_grid(f, grid)
    return grid.weights @ f.values


def boundary_integrate(grid: DomainGrid, g) -> np.ndarray | float:
    """Sum of area * g(point, normal) over boundary faces.

    g is either a callback taking (face midpoint, outward normal) and
    returning a scalar or vector, or an array of per-face values of shape
    (nfaces,) or (nfaces, m).
    """
    if callable(g):
        vals = np.array([
            np.asarray(g(p, n), dtype=float)
            for p, n in zip(grid.boundary_centers, grid.boundary_normals)
        ])
    else:
        vals = np.asarray(g, dtype=float)
        if vals.shape[0] != grid.boundary_cells.size:
            raise ValueError("per-face value array has wrong length")
    if vals.ndim == 1:
        return float(grid.boundary_areas @ vals)
    return grid.boundary_areas @ vals


def gradient(f: Field, grid: DomainGrid) -> Field:
    """Per-axis derivative of every component: central differences at interior
    points, second-order one-sided stencils at boundary-adjacent points.

    Returns a field of d * dim components laid out as (i, j) -> i * dim + j.
    """
    _require_same_grid(f, grid)
    if any(c < 3 for c in grid.counts):
        raise ValueError("gradient needs at least 3 points along every axis")
    d = f.ncomp
    arr = f.values.reshape(grid.mesh_shape(d))
    out = np.empty(grid.counts + (d, grid.dim))
    for j in range(grid.dim):
        out[..., :, j] = np.gradient(arr, grid.spacing[j], axis=j, edge_order=2)
    return Field(out.reshape(grid.npts, d * grid.dim), grid)


def divergence(T: Field, grid: DomainGrid) -> Field:
    """Row-wise divergence of a (d x dim)-component field: out_i = sum_j d_j T_ij."""
    _require_same_grid(T, grid)
    if any(c < 3 for c in grid.counts):
        raise ValueError("divergence needs at least 3 points along every axis")
    if T.ncomp % grid.dim != 0:
        raise ValueError(f"component count {T.ncomp} is not a multiple of dim={grid.dim}")
    d = T.ncomp // grid.dim
    arr = T.values.reshape(grid.counts + (d, grid.dim))
    out = np.zeros(grid.counts + (d,))
    for j in range(grid.dim):
        out += np.gradient(arr[..., j], grid.spacing[j], axis=j, edge_order=2)
    return Field(out.reshape(grid.npts, d), grid)


def face_trace(f: Field, grid: DomainGrid, extrapolate: bool = False) -> np.ndarray:
    """Per-boundary-face trace of a cell field, shape (nfaces, ncomp).

    Default is the owner-cell value (first order). With extrapolate=True a
    two-cell linear extrapolation to the face midpoint is used (second
    order); fluxes whose convergence rate matters use this.
    """
    _require_same_grid(f, grid)
    own = f.values[grid.boundary_cells]
    if not extrapolate:
        return own
    return 1.5 * own - 0.5 * f.values[grid.boundary_neighbors]

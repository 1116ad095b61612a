"""Axis-aligned boxes, uniform tensor grids, and boundary partitions.

The computational domains are open cubes

    Q_r(x0) = { x : |x_i - x0_i| < r for each i },

discretized by uniform (m+1) x (m+1) node lattices (n = 2 throughout;
the coordinate code is written against arrays of shape (..., 2) so a third
axis could be added, but only the planar case is exercised).

Dirichlet sets D are stored as closed node sets on the grid boundary; the
Neumann part N is always the complement of D inside the boundary.  Fractal
Dirichlet data comes from the generalized middle-(1-2*lam) Cantor
construction on a box edge.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidLambda, InvalidResolution, OutOfDomain

EDGES = ("bottom", "right", "top", "left")


@dataclass(frozen=True)
class Box:
    """Open cube Q_r(center).

    Halfwidth r >= 0; degenerate boxes (r = 0, zero volume) are legal only as
    measure-query regions, never as grid domains.
    """

    center: tuple
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("box halfwidth must be nonnegative")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def n(self):
        return len(self.center)

    @property
    def side(self):
        return 2.0 * self.r

    @property
    def volume(self):
        return self.side ** self.n

    @property
    def low(self):
        return np.asarray(self.center) - self.r

    @property
    def high(self):
        return np.asarray(self.center) + self.r

    def contains(self, pts, tol=0.0):
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= self.low - tol) & (pts <= self.high + tol), axis=-1)

    def scaled(self, factor):
        """Box with the same center and halfwidth r * factor."""
        return Box(self.center, self.r * factor)


def unit_square():
    """The square (0,1)^2 as Q_{1/2}((1/2, 1/2))."""
    return Box((0.5, 0.5), 0.5)


class Grid:
    """Uniform tensor grid on a Box: m cells per axis, spacing h = 2r/m.

    Node ids run row-major with x fastest: id = iy*(m+1) + ix.
    """

    def __init__(self, box, m):
        if m < 2:
            raise InvalidResolution(f"need at least 2 cells per axis, got m={m}")
        if box.n != 2:
            raise InvalidResolution("grids are built in the plane only")
        if not box.r > 0:
            raise InvalidResolution("grid box must have positive volume")
        self.box = box
        self.m = int(m)
        self.h = box.side / self.m
        self.nodes_per_axis = self.m + 1
        self.nnodes = self.nodes_per_axis ** 2
        self.ncells = self.m ** 2
        x = box.low[0] + self.h * np.arange(self.nodes_per_axis)
        y = box.low[1] + self.h * np.arange(self.nodes_per_axis)
        self.axis_x = x
        self.axis_y = y

    def node_xy(self):
        """(nnodes, 2) array of node coordinates."""
        X, Y = np.meshgrid(self.axis_x, self.axis_y, indexing="xy")
        return np.column_stack([X.ravel(), Y.ravel()])

    def node_id(self, ix, iy):
        return np.asarray(iy) * self.nodes_per_axis + np.asarray(ix)

    def boundary_mask(self):
        mp = self.nodes_per_axis
        mask = np.zeros(self.nnodes, dtype=bool)
        idx = np.arange(mp)
        mask[self.node_id(idx, 0)] = True
        mask[self.node_id(idx, self.m)] = True
        mask[self.node_id(0, idx)] = True
        mask[self.node_id(self.m, idx)] = True
        return mask

    def boundary_nodes(self):
        return np.flatnonzero(self.boundary_mask())

    def edge_nodes(self, edge):
        """Node ids along one edge, ordered by the running coordinate."""
        idx = np.arange(self.nodes_per_axis)
        if edge == "bottom":
            return self.node_id(idx, 0)
        if edge == "top":
            return self.node_id(idx, self.m)
        if edge == "left":
            return self.node_id(0, idx)
        if edge == "right":
            return self.node_id(self.m, idx)
        raise ValueError(f"unknown edge {edge!r}")

    def refine(self):
        """Nested refinement: same box, twice the cells per axis."""
        return Grid(self.box, 2 * self.m)

    def __repr__(self):
        c = self.box.center
        return f"Grid(Q_{self.box.r:g}(({c[0]:g},{c[1]:g})), m={self.m})"


def build_grid(box, m):
    """Uniform grid on ``box`` with ``m`` cells per axis (m >= 2)."""
    return Grid(box, m)


@dataclass
class NodeSet:
    """Sorted, duplicate-free node indices of a grid."""

    grid: Grid
    indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.intp))

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.intp))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.grid.nnodes):
            raise OutOfDomain("node index outside the grid")
        self.indices = idx

    def __len__(self):
        return self.indices.size

    def coords(self):
        return self.grid.node_xy()[self.indices]

    def mask(self):
        m = np.zeros(self.grid.nnodes, dtype=bool)
        m[self.indices] = True
        return m

    def to_csv_rows(self):
        """Rows (index, x1, x2) for export."""
        xy = self.coords()
        return [(int(i), xy[k, 0], xy[k, 1]) for k, i in enumerate(self.indices)]


@dataclass
class BoundaryPartition:
    """Closed Dirichlet node set D on the grid boundary; N is the complement."""

    grid: Grid
    dirichlet: NodeSet

    def __post_init__(self):
        bmask = self.grid.boundary_mask()
        if not bmask[self.dirichlet.indices].all():
            raise OutOfDomain("Dirichlet nodes must lie on the grid boundary")
        self.is_empty = len(self.dirichlet) == 0

    def neumann(self):
        mask = self.grid.boundary_mask()
        mask[self.dirichlet.indices] = False
        return NodeSet(self.grid, np.flatnonzero(mask))


def cantor_intervals(lam, k):
    """Level-k prefigure of the generalized Cantor set in [-1/2, 1/2].

    Level 0 is the full interval; each level keeps the two outer lam-fractions
    of every interval (removing the middle 1-2*lam part), so level k consists
    of 2^k closed intervals of length lam^k, symmetric about 0.  The limit set
    has Hausdorff dimension log 2 / log(1/lam).
    """
    if not (0.0 < lam < 0.5):
        raise InvalidLambda(f"cantor ratio must be in (0, 1/2), got {lam}")
    if k < 0:
        raise ValueError("level must be nonnegative")
    intervals = [(-0.5, 0.5)]
    for _ in range(int(k)):
        nxt = []
        for a, b in intervals:
            length = b - a
            nxt.append((a, a + lam * length))
            nxt.append((b - lam * length, b))
        intervals = nxt
    return intervals


def cantor_dimension(lam):
    """Hausdorff dimension log 2 / log(1/lam) of the limit set."""
    if not (0.0 < lam < 0.5):
        raise InvalidLambda(f"cantor ratio must be in (0, 1/2), got {lam}")
    return np.log(2.0) / np.log(1.0 / lam)


@dataclass(frozen=True)
class CantorSet:
    """Level-k Cantor prefigure on an ambient segment (default [-1/2, 1/2]).

    ``ambient`` maps the canonical construction affinely onto (a, b); the
    prefigure is 2^k closed intervals of length lam^k * (b - a).
    """

    lam: float
    level: int
    ambient: tuple = (-0.5, 0.5)

    def __post_init__(self):
        cantor_intervals(self.lam, 0)  # validates lam
        if self.level < 0:
            raise ValueError("level must be nonnegative")

    @property
    def hausdorff_dim(self):
        return cantor_dimension(self.lam)

    def intervals(self):
        a, b = self.ambient
        span = b - a
        return [(a + (lo + 0.5) * span, a + (hi + 0.5) * span)
                for lo, hi in cantor_intervals(self.lam, self.level)]

    def total_length(self):
        a, b = self.ambient
        return (2.0 * self.lam) ** self.level * (b - a)


# --- boundary specs ---------------------------------------------------------
#
# A spec is a plain dict with a "kind" tag; this is also the form they take in
# experiment config files.
#   {"kind": "full_boundary"}
#   {"kind": "edge_list", "edges": ["left", "top"]}
#   {"kind": "checkerboard", "period": 0.25, "edges": [...optional...]}
#   {"kind": "cantor", "lam": 0.47, "level": 6, "edge": "bottom"}
#   {"kind": "explicit", "nodes": [0, 5, 17]}


def _edge_arclength(grid, edge):
    """Running coordinate of the edge nodes, from the edge's start corner."""
    return grid.h * np.arange(grid.nodes_per_axis)


def mark_dirichlet(grid, spec):
    """Mark the closed Dirichlet node set D described by ``spec``.

    Checkerboard marking puts a node at arclength s on an edge into D iff
    s mod period < period/2; with period = 2h this alternates single nodes.
    Cantor marking is inclusive at interval endpoints so D is closed; the
    level-k intervals in [-1/2, 1/2] are scaled affinely onto the edge.
    """
    kind = spec["kind"]
    mask = np.zeros(grid.nnodes, dtype=bool)
    if kind == "full_boundary":
        mask = grid.boundary_mask()
    elif kind == "edge_list":
        for edge in spec["edges"]:
            mask[grid.edge_nodes(edge)] = True
    elif kind == "checkerboard":
        period = float(spec["period"])
        if period <= 0:
            raise ValueError("checkerboard period must be positive")
        edges = spec.get("edges", EDGES)
        for edge in edges:
            s = _edge_arclength(grid, edge)
            # nudge off exact fp boundaries so h-multiples classify stably
            on = np.mod(s + 1e-12, period) < period / 2.0
            mask[grid.edge_nodes(edge)[on]] = True
    elif kind == "cantor":
        intervals = cantor_intervals(float(spec["lam"]), int(spec["level"]))
        edge = spec["edge"]
        nodes = grid.edge_nodes(edge)
        # running coordinate mapped to [-1/2, 1/2] along the edge
        t = _edge_arclength(grid, edge) / grid.box.side - 0.5
        on = np.zeros(t.size, dtype=bool)
        tol = 1e-12
        for a, b in intervals:
            on |= (t >= a - tol) & (t <= b + tol)
        mask[nodes[on]] = True
    elif kind == "explicit":
        mask[np.asarray(spec["nodes"], dtype=np.intp)] = True
    else:
        raise ValueError(f"unknown boundary spec kind {kind!r}")
    return BoundaryPartition(grid, NodeSet(grid, np.flatnonzero(mask)))


def interior_set(grid, shape):
    """Nodes covering ``shape``: every node within h/2 of the shape.

    ``shape`` is a Box (closed sub-box), a point array of shape (k, 2),
    or a segment given as ((x0, y0), (x1, y1)).  The shape must be contained
    in the grid's closed box.
    """
    xy = grid.node_xy()
    tol = grid.h / 2.0 + 1e-12
    if isinstance(shape, Box):
        if not (np.all(shape.low >= grid.box.low - 1e-12)
                and np.all(shape.high <= grid.box.high + 1e-12)):
            raise OutOfDomain("sub-box leaves the grid box")
        d = np.maximum(np.abs(xy - np.asarray(shape.center)) - shape.r, 0.0)
        dist = np.max(d, axis=1)  # sup-norm distance to the closed box
        return NodeSet(grid, np.flatnonzero(dist <= tol))
    shape = np.asarray(shape, dtype=float)
    if shape.ndim == 2 and shape.shape == (2, 2) and not _looks_like_points(shape):
        a, b = shape
        if not (grid.box.contains(a, 1e-12) and grid.box.contains(b, 1e-12)):
            raise OutOfDomain("segment leaves the grid box")
        dist = _segment_distance(xy, a, b)
        return NodeSet(grid, np.flatnonzero(dist <= tol))
    pts = np.atleast_2d(shape)
    if not np.all(grid.box.contains(pts, 1e-12)):
        raise OutOfDomain("point leaves the grid box")
    d2 = np.min(np.sum((xy[:, None, :] - pts[None, :, :]) ** 2, axis=2), axis=1)
    return NodeSet(grid, np.flatnonzero(np.sqrt(d2) <= tol))


def _looks_like_points(arr):
    # ((x0,y0),(x1,y1)) is ambiguous with two points; treat 2x2 arrays as a
    # segment (the documented calling convention) unless endpoints coincide.
    return bool(np.allclose(arr[0], arr[1]))


def _segment_distance(pts, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(pts - proj, axis=1)


def segment_set(grid, a, b):
    """Nodes within h/2 of the segment from a to b."""
    return interior_set(grid, (tuple(a), tuple(b)))

"""Bilinear elements on uniform grids: quadrature, weighted norms, operators.

Everything downstream (capacity, Poincare constants, the mixed-boundary
solver, the higher-integrability scans) is built from four primitives on a
Grid:

  * values and gradients of nodal fields at the 2x2 Gauss points of each cell,
  * weighted integrals  sum_cells sum_g qw * |f(x_g)|^s * mu(x_g),
  * the weighted stiffness form  int <A(x) grad u, grad v>,
  * the weighted mass form       int mu(x) u v.

The 2x2 tensor Gauss rule integrates products of two bilinears times a
constant exactly, and its nodes are strictly interior to every cell, so
weights with a singular center sitting on a grid node are never evaluated
at the singularity.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .weights import MatrixWeight

_G1 = 1.0 / np.sqrt(3.0)

# reference element [-1,1]^2, node order (-,-), (+,-), (-,+), (+,+)
_REF_NODES = np.array([(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)])
_REF_GAUSS = _G1 * _REF_NODES  # 4 Gauss points in the same corner order


def _ref_basis(xi, eta):
    return np.array([
        (1 - xi) * (1 - eta) / 4.0,
        (1 + xi) * (1 - eta) / 4.0,
        (1 - xi) * (1 + eta) / 4.0,
        (1 + xi) * (1 + eta) / 4.0,
    ])


def _ref_basis_grad(xi, eta):
    return np.array([
        [-(1 - eta) / 4.0, -(1 - xi) / 4.0],
        [(1 - eta) / 4.0, -(1 + xi) / 4.0],
        [-(1 + eta) / 4.0, (1 - xi) / 4.0],
        [(1 + eta) / 4.0, (1 + xi) / 4.0],
    ])


class Quadrature:
    """Cached per-grid Gauss data: points, basis tables, cell connectivity."""

    def __init__(self, grid):
        m = grid.m
        self.grid = grid
        self.qw = grid.h * grid.h / 4.0  # one Gauss weight, all points equal
        self.N = np.array([_ref_basis(x, y) for x, y in _REF_GAUSS])  # (g, a)
        self.dN = np.array([_ref_basis_grad(x, y) for x, y in _REF_GAUSS]) \
            * (2.0 / grid.h)  # (g, a, dim), physical gradients
        cx, cy = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
        base = (cy * (m + 1) + cx).ravel()
        self.cell_nodes = np.column_stack(
            [base, base + 1, base + m + 1, base + m + 2])  # (ncells, 4)
        centers_x = grid.box.low[0] + grid.h * (cx.ravel() + 0.5)
        centers_y = grid.box.low[1] + grid.h * (cy.ravel() + 0.5)
        offs = _REF_GAUSS * (grid.h / 2.0)  # (4, 2)
        self.xy = np.empty((m * m, 4, 2))
        self.xy[:, :, 0] = centers_x[:, None] + offs[None, :, 0]
        self.xy[:, :, 1] = centers_y[:, None] + offs[None, :, 1]

    def points(self):
        """All Gauss points as a flat (ncells*4, 2) array."""
        return self.xy.reshape(-1, 2)


def quadrature(grid):
    q = getattr(grid, "_quad", None)
    if q is None:
        q = Quadrature(grid)
        grid._quad = q
    return q


@dataclass
class DiscreteField:
    """One nodal value per grid node (piecewise-bilinear interpolant)."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nnodes,):
            raise ValueError("value count must equal node count")

    @staticmethod
    def from_callable(grid, fn):
        return DiscreteField(grid, fn(grid.node_xy()))

    @staticmethod
    def zeros(grid):
        return DiscreteField(grid, np.zeros(grid.nnodes))

    def at_quad(self):
        q = quadrature(self.grid)
        return np.einsum("ga,ca->cg", q.N, self.values[q.cell_nodes])

    def copy(self):
        return DiscreteField(self.grid, self.values.copy())


@dataclass
class VectorField:
    """Plane vector values at every Gauss point: shape (ncells, 4, 2)."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        q = quadrature(self.grid)
        if self.values.shape != q.xy.shape:
            raise ValueError("vector field must carry one 2-vector per Gauss point")

    @staticmethod
    def from_callable(grid, fn):
        """fn maps (k, 2) points to (k, 2) vectors."""
        q = quadrature(grid)
        vals = np.asarray(fn(q.points()), dtype=float).reshape(q.xy.shape)
        return VectorField(grid, vals)

    def magnitudes(self):
        return np.linalg.norm(self.values, axis=-1)


def gradient_at_quadpoints(u):
    """Exact gradient of the bilinear interpolant at every Gauss point."""
    q = quadrature(u.grid)
    grads = np.einsum("gad,ca->cgd", q.dN, u.values[q.cell_nodes])
    return VectorField(u.grid, grads)


def _magnitudes_at_quad(f):
    if isinstance(f, DiscreteField):
        return np.abs(f.at_quad()), f.grid
    if isinstance(f, VectorField):
        return f.magnitudes(), f.grid
    raise TypeError("expected a DiscreteField or VectorField")


def weight_at_quad(grid, w):
    q = quadrature(grid)
    return w.evaluate(q.points()).reshape(q.xy.shape[:2])


def weighted_integral(f, w, s, scale=1.0):
    """Plain weighted integral  int |f/scale|^s w dx  by cell quadrature."""
    mags, grid = _magnitudes_at_quad(f)
    q = quadrature(grid)
    mu = weight_at_quad(grid, w)
    return float(q.qw * np.sum(mu * (mags / scale) ** s))


def weighted_norm(f, w, s, normalized=False, scale=1.0):
    """Weighted s-norm of a field; s >= 1.

    With ``normalized=True`` returns the cube-normalized form
    ((1/mu(Q)) int |f/scale|^s mu)^(1/s) used by the Poincare-type ratios;
    otherwise the plain norm (int |f/scale|^s mu)^(1/s).
    """
    if s < 1:
        raise ValueError("exponent s must be >= 1")
    total = weighted_integral(f, w, s, scale=scale)
    if normalized:
        grid = f.grid
        mu_Q = weighted_integral(DiscreteField(grid, np.ones(grid.nnodes)), w, 1.0)
        total /= mu_Q
    return total ** (1.0 / s)


def grid_weighted_measure(grid, w):
    """mu(box) with the grid's own quadrature (consistent with the norms)."""
    q = quadrature(grid)
    return float(q.qw * weight_at_quad(grid, w).sum())


def _assemble_blocks(grid, blocks):
    """Scatter per-cell 4x4 blocks into a CSR matrix."""
    q = quadrature(grid)
    rows = np.repeat(q.cell_nodes, 4, axis=1).ravel()
    cols = np.tile(q.cell_nodes, (1, 4)).ravel()
    A = sp.coo_matrix((blocks.ravel(), (rows, cols)),
                      shape=(grid.nnodes, grid.nnodes))
    return A.tocsr()


def _matrix_weight_at_quad(grid, W):
    q = quadrature(grid)
    if not isinstance(W, MatrixWeight):
        W = MatrixWeight(W)  # promote any scalar weight to isotropic
    return W.evaluate(q.points()).reshape(q.xy.shape[:2] + (2, 2))


def assemble_weighted_stiffness(grid, W):
    """Stiffness of the form  int <A(x) grad u, grad v> dx.

    ``W`` is a MatrixWeight (or a ScalarWeight, promoted to an isotropic
    matrix).  Symmetric positive-semidefinite; constants span the kernel
    until Dirichlet constraints are applied.
    """
    q = quadrature(grid)
    A = _matrix_weight_at_quad(grid, W)
    blocks = q.qw * np.einsum("gai,cgij,gbj->cab", q.dN, A, q.dN, optimize=True)
    return _assemble_blocks(grid, blocks)


def assemble_tensor_stiffness(grid, D):
    """Stiffness from arbitrary per-Gauss 2x2 tensors D of shape (ncells,4,2,2)."""
    q = quadrature(grid)
    blocks = q.qw * np.einsum("gai,cgij,gbj->cab", q.dN, D, q.dN, optimize=True)
    return _assemble_blocks(grid, blocks)


def assemble_weighted_mass(grid, w):
    """Mass of the form  int mu(x) u v dx;  symmetric positive definite."""
    q = quadrature(grid)
    mu = weight_at_quad(grid, w)
    blocks = q.qw * np.einsum("ga,cg,gb->cab", q.N, mu, q.N, optimize=True)
    return _assemble_blocks(grid, blocks)


def scatter_gradient_form(grid, coef):
    """Nodal vector b with b[a] = sum_cells sum_g qw <coef[c,g], grad N_a(x_g)>.

    This is the transpose of the gradient evaluation; ``coef`` has shape
    (ncells, 4, 2).  Used for residuals and right-hand sides of weak forms.
    """
    q = quadrature(grid)
    per_node = q.qw * np.einsum("cgd,gad->ca", coef, q.dN)
    b = np.zeros(grid.nnodes)
    np.add.at(b, q.cell_nodes, per_node)
    return b


def scatter_value_form(grid, coef):
    """Nodal vector b with b[a] = sum qw coef[c,g] N_a(x_g); coef (ncells, 4)."""
    q = quadrature(grid)
    per_node = q.qw * np.einsum("cg,ga->ca", coef, q.N)
    b = np.zeros(grid.nnodes)
    np.add.at(b, q.cell_nodes, per_node)
    return b


def prolongate(field, fine_grid):
    """Bilinear transfer of a nodal field to the nested 2x refinement."""
    coarse = field.grid
    if fine_grid.m != 2 * coarse.m:
        raise ValueError("prolongation expects the nested 2x refinement")
    mc = coarse.m
    vc = field.values.reshape(mc + 1, mc + 1)  # (iy, ix)
    mf = fine_grid.m
    vf = np.empty((mf + 1, mf + 1))
    vf[0::2, 0::2] = vc
    vf[0::2, 1::2] = 0.5 * (vc[:, :-1] + vc[:, 1:])
    vf[1::2, 0::2] = 0.5 * (vc[:-1, :] + vc[1:, :])
    vf[1::2, 1::2] = 0.25 * (vc[:-1, :-1] + vc[:-1, 1:] + vc[1:, :-1] + vc[1:, 1:])
    return DiscreteField(fine_grid, vf.ravel())

"""The mixed-boundary weighted p-Laplace solve, measure and multiplier forms.

Measure form (the weight rides along as a measure omega = |A|):

    -div( |grad u|^(p-2) A(x) grad u ) = -div( |G|^(p-2) A(x) G )   in Q,
    u = 0 on D,   conormal flux = 0 on N = boundary \\ D,

for a symmetric positive-definite matrix weight A with bounded condition
number.  Multiplier form (the matrix M multiplies the gradient inside the
nonlinearity, M^2 = A in the linear case):

    -div( M^2(x) |M(x) grad u|^(p-2) grad u )
        = -div( M^2(x) |M(x) G|^(p-2) G ).

The right-hand side is always supplied as a vector field G (every bounded
functional on the solution space can be written this way), the Dirichlet
constraint is eliminated exactly, and the Neumann condition is the natural
one encoded by the weak form.

Isotropic-measure and multiplier problems are strictly convex minimizations
handled by the damped-Newton energy engine; the anisotropic measure form
with p != 2 is not a gradient flow of any of the printed functionals, so it
is solved directly as a Galerkin root-finding problem on the weak residual
(nonsymmetric Jacobian, residual-decrease damping).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from ._newton import EPS_SCHEDULE, PEnergy, minimize_energy
from .assembly import (DiscreteField, VectorField, assemble_tensor_stiffness,
                       quadrature, scatter_gradient_form, weight_at_quad,
                       weighted_integral)
from .errors import EmptyDirichletSet, ZeroData
from .geometry import BoundaryPartition, Grid
from .weights import MatrixWeight, weight_power


@dataclass
class ZarembaProblem:
    """Exponent, matrix weight, grid, boundary partition, and data field."""

    form: str                    # "measure" or "multiplier"
    p: float
    W: MatrixWeight
    grid: Grid
    boundary: BoundaryPartition
    G: VectorField

    def __post_init__(self):
        if self.form not in ("measure", "multiplier"):
            raise ValueError(f"unknown problem form {self.form!r}")
        if not self.p > 1:
            raise ValueError("exponent p must exceed 1")
        if self.boundary.grid is not self.grid or self.G.grid is not self.grid:
            raise ValueError("boundary partition and data must live on the grid")
        if not np.all(np.isfinite(self.G.values)):
            raise ValueError("data field G must be finite at quadrature points")

    def scalar_weight(self):
        """omega = |A| (measure) or omega~ = |M| (multiplier)."""
        return self.W.scalar_part

    def free_mask(self):
        free = np.ones(self.grid.nnodes, dtype=bool)
        free[self.boundary.dirichlet.indices] = False
        return free


@dataclass
class SolveResult:
    u: DiscreteField
    energy: float
    weighted_grad_norm: float
    residual_norm: float
    newton_iterations: int
    final_eps: float = 0.0
    converged: bool = True


def _energy_form(prob):
    """PEnergy for the convex routes (isotropic measure, any multiplier)."""
    grid = prob.grid
    if prob.form == "measure":
        w_g = weight_at_quad(grid, prob.scalar_weight())
        return PEnergy(grid, prob.p, w_g, T_g=None, data_G=prob.G.values)
    q = quadrature(grid)
    M_g = prob.W.evaluate(q.points()).reshape(q.xy.shape[:2] + (2, 2))
    ones = np.ones(q.xy.shape[:2])
    return PEnergy(grid, prob.p, ones, T_g=M_g, data_G=prob.G.values)


def _weak_data(prob, eps):
    """(A_g, coefG) for the anisotropic measure weak form at one eps."""
    q = quadrature(prob.grid)
    A_g = prob.W.evaluate(q.points()).reshape(q.xy.shape[:2] + (2, 2))
    s2G = np.sum(prob.G.values ** 2, axis=-1) + eps * eps
    AG = np.einsum("cgij,cgj->cgi", A_g, prob.G.values)
    coefG = s2G[..., None] ** ((prob.p - 2.0) / 2.0) * AG
    return A_g, coefG


def _solve_weakform(prob, free, tol, max_newton, eps_schedule, x0):
    """Damped Newton on the Galerkin residual of the anisotropic measure form."""
    grid = prob.grid
    quad = quadrature(grid)
    x = x0.copy()
    iters = 0
    res_norm = np.inf
    eps = eps_schedule[0]
    scale = None
    for eps in eps_schedule if prob.p != 2.0 else (0.0,):
        A_g, coefG = _weak_data(prob, eps)
        b = scatter_gradient_form(grid, coefG)
        if scale is None:
            scale = 1.0 + np.linalg.norm(b[free])

        def residual(xv):
            g = np.einsum("gad,ca->cgd", quad.dN, xv[quad.cell_nodes])
            s2 = np.sum(g * g, axis=-1) + eps * eps
            Ag = np.einsum("cgij,cgj->cgi", A_g, g)
            coef = s2[..., None] ** ((prob.p - 2.0) / 2.0) * Ag
            return scatter_gradient_form(grid, coef) - b, g, s2, Ag

        for _ in range(max_newton):
            R, g, s2, Ag = residual(x)
            res_norm = float(np.linalg.norm(R[free]))
            if res_norm <= tol * scale:
                break
            a = s2 ** ((prob.p - 2.0) / 2.0)
            D = a[..., None, None] * A_g
            if prob.p != 2.0:
                bb = (prob.p - 2.0) * s2 ** ((prob.p - 4.0) / 2.0)
                D = D + bb[..., None, None] * np.einsum("cgi,cgj->cgij", Ag, g)
            J = assemble_tensor_stiffness(grid, D)[free][:, free]
            d = spla.splu(J.tocsc()).solve(-R[free])
            t = 1.0
            xt = x.copy()
            accepted = False
            while t > 1e-14:
                xt[free] = x[free] + t * d
                Rt = residual(xt)[0]
                if np.linalg.norm(Rt[free]) <= (1.0 - 1e-4 * t) * res_norm:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                break
            x = xt
            iters += 1
            if prob.p == 2.0:
                break
    R = residual(x)[0]
    res_norm = float(np.linalg.norm(R[free]))
    converged = bool(res_norm <= tol * scale or prob.p == 2.0)
    return x, iters, res_norm / scale, eps, converged


def solve_zaremba(prob, tol=1e-11, max_newton=60, eps_schedule=EPS_SCHEDULE,
                  x0=None):
    """Solve the discrete problem; u vanishes exactly on the Dirichlet nodes.

    Returns a SolveResult; failure to reach tolerance is reported through
    ``converged=False`` on the result (the last iterate), never raised.
    """
    if prob.boundary.is_empty:
        raise EmptyDirichletSet("no Dirichlet nodes: the solve is not unique")
    grid = prob.grid
    free = prob.free_mask()
    start = np.zeros(grid.nnodes) if x0 is None else np.asarray(x0, float).copy()
    start[~free] = 0.0

    if prob.form == "measure" and not prob.W.is_isotropic():
        x, iters, res, eps, ok = _solve_weakform(
            prob, free, tol, max_newton, eps_schedule, start)
        u = DiscreteField(grid, x)
        energy = _reported_energy(prob, u)
    else:
        form = _energy_form(prob)
        sched = eps_schedule if prob.p != 2.0 else (0.0,)
        x, info = minimize_energy(form, start, free, sched, tol=tol,
                                  max_newton=max_newton)
        u = DiscreteField(grid, x)
        scale = form.data_scale(info.final_eps) or 1.0
        iters, res, eps, ok = (info.iterations, info.grad_norm / scale,
                               info.final_eps, info.converged)
        energy = form.energy(x, eps)
    return SolveResult(
        u=u,
        energy=float(energy),
        weighted_grad_norm=_weighted_grad_norm(prob, u),
        residual_norm=float(res),
        newton_iterations=iters,
        final_eps=float(eps),
        converged=ok,
    )


def _masked_power_sum(s, p_minus_2, inner):
    out = np.zeros_like(s)
    mask = s > 0
    out[mask] = s[mask] ** p_minus_2 * inner[mask]
    return float(out.sum())


def _reported_energy(prob, u):
    """(1/p) int |grad u|^(p-2) <A grad u, grad u> - int |G|^(p-2) <A G, grad u>."""
    quad = quadrature(prob.grid)
    A_g = prob.W.evaluate(quad.points()).reshape(quad.xy.shape[:2] + (2, 2))
    g = np.einsum("gad,ca->cgd", quad.dN, u.values[quad.cell_nodes])
    s = np.sqrt(np.sum(g * g, axis=-1))
    Ag = np.einsum("cgij,cgj->cgi", A_g, g)
    term1 = _masked_power_sum(s, prob.p - 2.0,
                              np.einsum("cgi,cgi->cg", Ag, g)) / prob.p
    G = prob.G.values
    sG = np.sqrt(np.sum(G * G, axis=-1))
    AG = np.einsum("cgij,cgj->cgi", A_g, G)
    term2 = _masked_power_sum(sG, prob.p - 2.0,
                              np.einsum("cgi,cgi->cg", AG, g))
    return quad.qw * (term1 - term2)


def _weighted_grad_norm(prob, u):
    """int |grad u|^p omega dx (measure) or int |M grad u|^p dx (multiplier)."""
    quad = quadrature(prob.grid)
    g = np.einsum("gad,ca->cgd", quad.dN, u.values[quad.cell_nodes])
    if prob.form == "measure":
        w_g = weight_at_quad(prob.grid, prob.scalar_weight())
        mags = np.sqrt(np.sum(g * g, axis=-1))
        return float(quad.qw * np.sum(w_g * mags ** prob.p))
    M_g = prob.W.evaluate(quad.points()).reshape(quad.xy.shape[:2] + (2, 2))
    Mg = np.einsum("cgij,cgj->cgi", M_g, g)
    mags = np.sqrt(np.sum(Mg * Mg, axis=-1))
    return float(quad.qw * np.sum(mags ** prob.p))


def energy_ratio(prob, result):
    """Ratio of the solution's weighted gradient p-norm to the data's.

    Measure form:    int |grad u|^p omega / int |G|^p omega.
    Multiplier form: int |grad u|^p omega~^p / int |G|^p omega~^p, matching
    the estimate satisfied by the multiplier solution (so the delta = 0
    column of a higher-integrability table reproduces this ratio exactly).
    """
    if prob.form == "measure":
        w = prob.scalar_weight()
    else:
        w = weight_power(prob.scalar_weight(), prob.p)
    quad = quadrature(prob.grid)
    g = np.einsum("gad,ca->cgd", quad.dN, result.u.values[quad.cell_nodes])
    grad = VectorField(prob.grid, g)
    denom = weighted_integral(prob.G, w, prob.p)
    if denom == 0.0:
        raise ZeroData("energy ratio undefined for identically zero data")
    return weighted_integral(grad, w, prob.p) / denom


def galerkin_residual(prob, u, eps=0.0):
    """Assembled weak-form residual vector of ``u`` and its normalization.

    The residual of the solved (eps-regularized) problem: pairing it with any
    test field supported off D measures Galerkin orthogonality.
    """
    free = prob.free_mask()
    if prob.form == "measure" and not prob.W.is_isotropic():
        grid = prob.grid
        quad = quadrature(grid)
        A_g, coefG = _weak_data(prob, eps)
        g = np.einsum("gad,ca->cgd", quad.dN, u.values[quad.cell_nodes])
        s2 = np.sum(g * g, axis=-1) + eps * eps
        Ag = np.einsum("cgij,cgj->cgi", A_g, g)
        coef = s2[..., None] ** ((prob.p - 2.0) / 2.0) * Ag - coefG
        R = scatter_gradient_form(grid, coef)
        scale = 1.0 + np.linalg.norm(scatter_gradient_form(grid, coefG)[free])
    else:
        form = _energy_form(prob)
        R = form.gradient(u.values, eps)
        scale = form.data_scale(eps) or 1.0
    return R, scale


def residual_check(prob, result, n_tests=20, seed=0):
    """Max normalized |R(u) . phi| over random unit test fields with phi=0 on D."""
    R, scale = galerkin_residual(prob, result.u, eps=result.final_eps)
    free = prob.free_mask()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(n_tests)):
        phi = np.zeros(prob.grid.nnodes)
        v = rng.standard_normal(int(free.sum()))
        phi[free] = v / np.linalg.norm(v)
        worst = max(worst, abs(float(R @ phi)) / scale)
    return worst

"""Weighted variational capacity via discrete capacitary potentials.

The capacity of a compact K inside an open cube Q with respect to a weight
mu and an exponent q > 1 is

    Cap_{q,mu}(K, Q) = inf { int_Q |grad phi|^q mu dx :
                             phi smooth, compactly supported in Q,
                             phi >= 1 on K }.

On the grid the inequality constraint is replaced by the equality phi = 1 at
the K nodes (the continuous minimizer saturates the obstacle) and compact
support by phi = 0 at the outer-boundary nodes.  For q = 2 the minimizer is
one symmetric linear solve; otherwise a damped Newton iteration with
eps-regularized gradient norm (continuation eps -> 0) minimizes the convex
energy.  The reported value is always the unregularized q-energy of the
computed potential, hence an upper bound of the discrete minimum.

Whole-space capacities (denominators of density ratios) are approximated by
truncating R^n to a concentric cube a fixed factor larger than K's window;
by domain monotonicity this over-estimates the whole-space value.
"""

from dataclasses import dataclass, field

import numpy as np

from ._newton import EPS_SCHEDULE, PEnergy, minimize_energy
from .assembly import (DiscreteField, grid_weighted_measure, quadrature,
                       weight_at_quad)
from .errors import NoConvergence, OutOfDomain
from .geometry import Box, Grid, NodeSet, interior_set
from .weights import ScalarWeight


@dataclass
class CapacityProblem:
    """Condenser (K, Q): constrained node set K inside the grid on Q."""

    q: float
    mu: ScalarWeight
    K: NodeSet
    grid: Grid

    def __post_init__(self):
        if not self.q > 1:
            raise ValueError("capacity exponent q must exceed 1")
        if self.K.grid is not self.grid:
            raise ValueError("K must be a node set of the capacity grid")
        if np.intersect1d(self.K.indices, self.grid.boundary_nodes()).size:
            raise OutOfDomain("K touches the outer boundary of Q")


@dataclass
class CapacityResult:
    value: float
    potential: DiscreteField
    iterations: int
    grad_norm: float
    final_eps: float = 0.0
    converged: bool = True


def q_energy(potential, mu, q):
    """Unregularized energy  int |grad phi|^q mu dx  of a nodal field."""
    grid = potential.grid
    quad = quadrature(grid)
    g = np.einsum("gad,ca->cgd", quad.dN, potential.values[quad.cell_nodes])
    mags2 = np.sum(g * g, axis=-1)
    return float(quad.qw * np.sum(weight_at_quad(grid, mu) * mags2 ** (q / 2.0)))


def compute_capacity(prob, tol=1e-11, max_newton=60, eps_schedule=EPS_SCHEDULE,
                     raise_on_failure=True):
    """Capacity value and capacitary potential for a CapacityProblem.

    Empty K gives value 0 with the zero potential.  Nonlinear solves that
    exhaust the iteration budget raise NoConvergence carrying the last
    iterate (set ``raise_on_failure=False`` to get the flagged result).
    """
    grid = prob.grid
    if len(prob.K) == 0:
        return CapacityResult(0.0, DiscreteField.zeros(grid), 0, 0.0)
    fixed = np.zeros(grid.nnodes, dtype=bool)
    x0 = np.zeros(grid.nnodes)
    fixed[grid.boundary_nodes()] = True
    fixed[prob.K.indices] = True
    x0[prob.K.indices] = 1.0
    free = ~fixed

    mu_g = weight_at_quad(grid, prob.mu)
    # warm start from the 2-capacity potential, then continue in q
    form2 = PEnergy(grid, 2.0, mu_g)
    x, info = minimize_energy(form2, x0, free, (0.0,), tol=tol)
    if prob.q != 2.0:
        form = PEnergy(grid, prob.q, mu_g)
        x, info = minimize_energy(form, x, free, eps_schedule, tol=tol,
                                  max_newton=max_newton)
    potential = DiscreteField(grid, x)
    result = CapacityResult(
        value=q_energy(potential, prob.mu, prob.q),
        potential=potential,
        iterations=info.iterations,
        grad_norm=info.grad_norm,
        final_eps=info.final_eps,
        converged=info.converged,
    )
    if raise_on_failure and not info.converged:
        raise NoConvergence("capacity solve did not reach tolerance",
                            result=result)
    return result


@dataclass
class ScalingEntry:
    r: float
    m: int
    q: float
    s: float
    capacity: float
    mu_Q: float
    ratio: float
    iterations: int


@dataclass
class ScalingReport:
    slope: float
    theory_slope: float
    entries: list = field(default_factory=list)


def capacity_scaling_check(shape, mu, q, scales, cells_per_axis=64,
                           outer_factor=2.0, s_exponent=None, **solve_opts):
    """Log-log slope of r -> Cap_{q,mu}(rK, Q_{2r}) at matched cells per axis.

    ``shape`` is the unit-scale constraint set (a Box, point array, or
    segment) centered at the weight's center; at scale r it is dilated by r
    and the outer cube is Q_{outer_factor*r} about the same center.  For a
    power weight |x|^s centered at the scaling center the change of variables
    gives the exact exponent n + s - q.
    """
    if len(scales) < 3:
        raise ValueError("need at least 3 scales for a slope fit")
    if s_exponent is None:
        s_exponent = mu.alpha if mu.kind == "power" else 0.0
    center = shape.center if isinstance(shape, Box) else (0.0, 0.0)
    entries = []
    for r in scales:
        outer = Box(center, outer_factor * r)
        grid = Grid(outer, cells_per_axis)
        K = interior_set(grid, _scaled_shape(shape, r, center))
        prob = CapacityProblem(q=q, mu=mu, K=K, grid=grid)
        res = compute_capacity(prob, **solve_opts)
        mu_Q = grid_weighted_measure(grid, mu)
        entries.append(ScalingEntry(
            r=float(r), m=cells_per_axis, q=float(q), s=float(s_exponent),
            capacity=res.value, mu_Q=mu_Q,
            ratio=res.value * r ** q / mu_Q, iterations=res.iterations))
    logs_r = np.log([e.r for e in entries])
    logs_c = np.log([e.capacity for e in entries])
    slope = float(np.polyfit(logs_r, logs_c, 1)[0])
    n = 2
    return ScalingReport(slope=slope, theory_slope=n + s_exponent - q,
                         entries=entries)


def _scaled_shape(shape, r, center):
    ctr = np.asarray(center, dtype=float)
    if isinstance(shape, Box):
        new_ctr = ctr + r * (np.asarray(shape.center) - ctr)
        return Box(tuple(new_ctr), r * shape.r)
    arr = np.asarray(shape, dtype=float)
    return ctr + r * (arr - ctr)


def classify_negligible(K, mu, q, gamma, r, grid, **solve_opts):
    """Classify K against the capacity-density threshold gamma * r^{-q}.

    ``grid`` lives on the doubled cube Q_{2r} containing K.  Returns the
    label ("negligible" when Cap/mu(Q_{2r}) <= gamma r^{-q}, else
    "essential") together with the dimensionless ratio
    Cap * r^q / mu(Q_{2r}).
    """
    if not (0.0 < gamma < 0.5):
        raise ValueError("gamma must lie in (0, 1/2)")
    prob = CapacityProblem(q=q, mu=mu, K=K, grid=grid)
    res = compute_capacity(prob, **solve_opts)
    mu_Q = grid_weighted_measure(grid, mu)
    ratio = res.value * r ** q / mu_Q
    label = "negligible" if ratio <= gamma else "essential"
    return label, float(ratio)

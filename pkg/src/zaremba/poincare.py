"""Sobolev-Poincare constants on cubes and capacity-density checks.

For a cube Q_r, weight mu, and a constrained node set K, the object of
interest is the best constant C in

    ( (1/mu(Q_r)) int_{Q_r} |u/r|^p mu )^(1/p)
        <= C ( (1/mu(Q_r)) int_{Q_r} |grad u|^q mu )^(1/q)

over fields u vanishing on K (free on the rest of the cube, boundary
included).  At p = q = 2 the best discrete constant is exactly an
eigenvalue: C = (1/r) / sqrt(lambda_min) for the weighted stiffness/mass
pencil restricted off K.  For p != q the discrete optimum is a nonconvex
maximization; the reported value is a certified lower bound obtained by
projected gradient ascent from two structured candidates (the p = q = 2
maximizer and the complement of the capacitary potential of K).

The comparability probe multiplies C by r (Cap_{q,mu}(K, Q_{2r}) /
mu(Q_{2r}))^(1/q); this product is scale-invariant for power weights
centered at the scaling center, which is exactly what the sweeps test.

The capacity-density (boundary thickness) check evaluates, over sampled
centers x0 on a Dirichlet set D and radii r,

    r^q * Cap_{q,omega}(D cap closure(Q_r(x0)), Q_{Mr}(x0)) / omega(Q_r(x0)),

reporting the minimum as the empirical density constant.  The truncation of
R^n to Q_{Mr} over-estimates the whole-space capacity (domain monotonicity),
so reported ratios are upper bounds sample by sample.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from ._newton import EPS_SCHEDULE
from .assembly import (DiscreteField, assemble_weighted_mass,
                       assemble_weighted_stiffness, grid_weighted_measure,
                       quadrature, weight_at_quad)
from .capacity import CapacityProblem, compute_capacity
from .errors import CenterOffD, EmptyConstraintSet
from .geometry import Box, Grid, NodeSet, interior_set
from .weights import weighted_measure

EIGEN_RESIDUAL_TOL = 1e-8


@dataclass
class PoincareResult:
    C: float
    method: str              # "eigen" or "candidate-ascent"
    maximizer: DiscreteField
    bound_kind: str          # "exact-discrete" or "lower-bound"
    eigen_residual: float = np.nan


def _ratio_parts(grid, mu_g, mu_Q, r, p, q):
    quad = quadrature(grid)

    def parts(values):
        u_g = np.einsum("ga,ca->cg", quad.N, values[quad.cell_nodes])
        g_g = np.einsum("gad,ca->cgd", quad.dN, values[quad.cell_nodes])
        num = (quad.qw * np.sum(mu_g * np.abs(u_g / r) ** p) / mu_Q) ** (1.0 / p)
        mags = np.sqrt(np.sum(g_g * g_g, axis=-1))
        den = (quad.qw * np.sum(mu_g * mags ** q) / mu_Q) ** (1.0 / q)
        return num, den

    return parts


def poincare_ratio(u, mu, p, q):
    """The normalized ratio for one field (its grid's cube radius supplies r)."""
    grid = u.grid
    mu_g = weight_at_quad(grid, mu)
    mu_Q = grid_weighted_measure(grid, mu)
    num, den = _ratio_parts(grid, mu_g, mu_Q, grid.box.r, p, q)(u.values)
    if den == 0.0:
        return np.inf if num > 0 else 0.0
    return num / den


def _smallest_eigenpair(S, M, free, tol=EIGEN_RESIDUAL_TOL, max_iter=200):
    """Inverse power iteration for the smallest pencil eigenvalue on free dofs."""
    Sff = S[free][:, free].tocsc()
    Mff = M[free][:, free].tocsr()
    lu = spla.splu(Sff)
    x = np.ones(Sff.shape[0])
    x /= np.sqrt(x @ (Mff @ x))
    lam = x @ (Sff @ x)
    for _ in range(max_iter):
        x = lu.solve(Mff @ x)
        x /= np.sqrt(x @ (Mff @ x))
        Sx = Sff @ x
        Mx = Mff @ x
        lam = x @ Sx
        res = np.linalg.norm(Sx - lam * Mx) / np.linalg.norm(Mx)
        if res <= tol:
            break
    return float(lam), x, float(res)


def poincare_constant(grid, K, mu, p, q, ascent_steps=40, **cap_opts):
    """Best (p = q = 2: exact discrete) or lower-bound constant C for (K, mu).

    Raises EmptyConstraintSet when K is empty (the gradient seminorm then has
    a nontrivial kernel and no finite constant exists).
    """
    if len(K) == 0:
        raise EmptyConstraintSet("empty K: the Poincare constant is unbounded")
    free = ~K.mask()
    if not free.any():
        return PoincareResult(0.0, "eigen", DiscreteField.zeros(grid),
                              "exact-discrete", 0.0)
    S = assemble_weighted_stiffness(grid, mu)
    M = assemble_weighted_mass(grid, mu)
    lam, x_free, res = _smallest_eigenpair(S, M, free)
    eig_vals = np.zeros(grid.nnodes)
    eig_vals[free] = x_free
    eigenfield = DiscreteField(grid, eig_vals)
    r = grid.box.r
    if p == 2.0 and q == 2.0:
        return PoincareResult((1.0 / r) / np.sqrt(lam), "eigen", eigenfield,
                              "exact-discrete", res)

    mu_g = weight_at_quad(grid, mu)
    mu_Q = grid_weighted_measure(grid, mu)
    parts = _ratio_parts(grid, mu_g, mu_Q, r, p, q)
    candidates = [eig_vals]
    comp = _capacitary_complement(grid, K, mu, q, **cap_opts)
    if comp is not None:
        candidates.append(comp)
    best_vals, best_ratio = None, -np.inf
    for vals in candidates:
        num, den = parts(vals)
        ratio = num / den if den > 0 else 0.0
        if ratio > best_ratio:
            best_ratio, best_vals = ratio, vals.copy()
    vals, ratio = _ratio_ascent(grid, parts, best_vals, free, p, q,
                                mu_g, mu_Q, r, steps=ascent_steps)
    if ratio < best_ratio:
        vals, ratio = best_vals, best_ratio
    return PoincareResult(float(ratio), "candidate-ascent",
                          DiscreteField(grid, vals), "lower-bound")


def _capacitary_complement(grid, K, mu, q, **cap_opts):
    """1 - (capacitary potential of K in Q_{2r}), restricted to Q_r nodes."""
    if grid.m % 2 != 0:
        return None
    outer = Grid(Box(grid.box.center, 2.0 * grid.box.r), 2 * grid.m)
    K2 = interior_set(outer, K.coords())
    if len(K2) == 0:
        return None
    res = compute_capacity(CapacityProblem(q, mu, K2, outer),
                           raise_on_failure=False, **cap_opts)
    half = grid.m // 2
    pot = res.potential.values.reshape(outer.m + 1, outer.m + 1)
    window = pot[half:half + grid.m + 1, half:half + grid.m + 1]
    vals = 1.0 - window.ravel()
    vals[K.mask()] = 0.0
    return vals


def _ratio_ascent(grid, parts, vals0, free, p, q, mu_g, mu_Q, r, steps=40):
    """Projected gradient ascent on log(num/den); certified lower bound."""
    quad = quadrature(grid)
    vals = vals0.copy()
    num, den = parts(vals)
    if den == 0.0 or num == 0.0:
        return vals, 0.0
    ratio = num / den
    step = 1.0
    for _ in range(steps):
        u_g = np.einsum("ga,ca->cg", quad.N, vals[quad.cell_nodes])
        g_g = np.einsum("gad,ca->cgd", quad.dN, vals[quad.cell_nodes])
        mags = np.sqrt(np.sum(g_g * g_g, axis=-1))
        # d/du of the two normalized integrals
        coef_num = mu_g * np.abs(u_g) ** (p - 2.0) * u_g / (r ** p * mu_Q)
        b_num = np.zeros(grid.nnodes)
        np.add.at(b_num, quad.cell_nodes,
                  quad.qw * np.einsum("cg,ga->ca", coef_num, quad.N))
        safe = np.where(mags > 0, mags, 1.0)
        coef_den = (mu_g * safe ** (q - 2.0))[..., None] * g_g / mu_Q
        b_den = np.zeros(grid.nnodes)
        np.add.at(b_den, quad.cell_nodes,
                  quad.qw * np.einsum("cgd,gad->ca", coef_den, quad.dN))
        grad = b_num / max(num ** p, 1e-300) - b_den / max(den ** q, 1e-300)
        grad[~free] = 0.0
        gn = np.linalg.norm(grad)
        if gn == 0.0:
            break
        improved = False
        while step > 1e-10:
            trial = vals + step * grad / gn * np.linalg.norm(vals)
            trial[~free] = 0.0
            tn, td = parts(trial)
            if td > 0 and tn / td > ratio * (1.0 + 1e-12):
                vals, ratio = trial, tn / td
                improved = True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
    return vals, float(ratio)


@dataclass
class ComparabilityReport:
    ratio: float
    C: float
    capacity: float
    mu_Q2r: float
    r: float
    p: float
    q: float
    m: int


def comparability_ratio(grid, K, mu, q, p=None, **opts):
    """C * r * (Cap_{q,mu}(K, Q_{2r}) / mu(Q_{2r}))^(1/q) for K on the grid.

    The Poincare constant lives on the grid's cube Q_r; the capacity is
    computed on the concentric double cube at matched spacing (the grid's K
    nodes are re-marked there by coordinates).
    """
    if p is None:
        p = q
    pres = poincare_constant(grid, K, mu, p, q, **opts)
    outer = Grid(Box(grid.box.center, 2.0 * grid.box.r), 2 * grid.m)
    K2 = interior_set(outer, K.coords())
    cres = compute_capacity(CapacityProblem(q, mu, K2, outer))
    mu_Q2r = grid_weighted_measure(outer, mu)
    r = grid.box.r
    ratio = pres.C * r * (cres.value / mu_Q2r) ** (1.0 / q)
    return ComparabilityReport(ratio=float(ratio), C=pres.C,
                               capacity=cres.value, mu_Q2r=mu_Q2r, r=r,
                               p=float(p), q=float(q), m=grid.m)


@dataclass
class CenSample:
    x0: tuple
    r: float
    cap: float
    mu_Qr: float
    ratio: float


@dataclass
class CenCheckReport:
    samples: list = field(default_factory=list)
    min_ratio: float = np.inf
    c0: float = np.inf


def line_intervals(intervals, y=0.0):
    """A Dirichlet set given analytically: x-intervals on the line x2 = y."""
    return {"kind": "line_intervals",
            "intervals": [(float(a), float(b)) for a, b in intervals],
            "y": float(y)}


def _d_points(D):
    if isinstance(D, NodeSet):
        return D.coords()
    if hasattr(D, "dirichlet"):
        return D.dirichlet.coords()
    return None


def _center_on_line(D, x0, tol):
    if abs(x0[1] - D["y"]) > tol:
        return False
    return any(a - tol <= x0[0] <= b + tol for a, b in D["intervals"])


def _mark_line_window(grid, D, x0, r):
    xy = grid.node_xy()
    # only the single node row on the line (the grid is centered on D)
    on_line = np.abs(xy[:, 1] - D["y"]) <= grid.h / 4.0
    in_window = np.abs(xy[:, 0] - x0[0]) <= r + 1e-12
    hit = np.zeros(grid.nnodes, dtype=bool)
    for a, b in D["intervals"]:
        hit |= (xy[:, 0] >= a - 1e-12) & (xy[:, 0] <= b + 1e-12)
    return NodeSet(grid, np.flatnonzero(on_line & in_window & hit))


def verify_cen(D, omega, q, centers, radii, truncation=4.0,
               resolution=None, mu_cells=64, **cap_opts):
    """Sampled capacity-density ratios of D at (center, radius) pairs.

    ``D`` is a NodeSet, a BoundaryPartition, or an analytic line set from
    :func:`line_intervals`.  ``resolution`` selects the local-grid policy:
    ``{"cells_per_axis": m}`` keeps m cells on every Q_{Mr} window (matched,
    scale-exact), ``{"h": value}`` keeps the physical spacing fixed across
    radii (so the sweep exposes sets that are thin relative to the window).
    """
    if resolution is None:
        resolution = {"cells_per_axis": 64}
    pts = _d_points(D)
    report = CenCheckReport()
    for x0 in centers:
        x0 = (float(x0[0]), float(x0[1]))
        for r in radii:
            r = float(r)
            if "h" in resolution:
                m_loc = int(np.ceil(2.0 * truncation * r / resolution["h"]))
            else:
                m_loc = int(resolution["cells_per_axis"])
            m_loc += m_loc % 2  # keep the center line on a node row
            m_loc = max(m_loc, 4)
            local = Grid(Box(x0, truncation * r), m_loc)
            if pts is not None:
                if np.min(np.linalg.norm(pts - np.asarray(x0), axis=1)) > local.h:
                    raise CenterOffD(f"center {x0} not within h of D")
                window = pts[np.max(np.abs(pts - np.asarray(x0)), axis=1)
                             <= r + 1e-12]
                K = interior_set(local, window) if len(window) else \
                    NodeSet(local, [])
            else:
                if not _center_on_line(D, x0, local.h):
                    raise CenterOffD(f"center {x0} not within h of D")
                K = _mark_line_window(local, D, x0, r)
            cap = compute_capacity(
                CapacityProblem(q, omega, K, local),
                eps_schedule=cap_opts.pop("eps_schedule", EPS_SCHEDULE),
                **cap_opts).value
            mu_Qr = weighted_measure(omega, Box(x0, r), mu_cells)
            ratio = r ** q * cap / mu_Qr
            report.samples.append(CenSample(x0, r, cap, mu_Qr, float(ratio)))
    report.min_ratio = min(s.ratio for s in report.samples)
    report.c0 = report.min_ratio
    return report


def mean_zero_poincare_constant(grid, mu, mean="weighted"):
    """Exact best constant of the mean-zero inequality at p = q = 2.

    ``mean`` picks the subtracted constant: the mu-weighted average or the
    plain average.  Dense reduction onto the mean-zero subspace; intended for
    modest grids (the property checks), not production sweeps.
    """
    S = assemble_weighted_stiffness(grid, mu).toarray()
    M = assemble_weighted_mass(grid, mu).toarray()
    n = grid.nnodes
    ones = np.ones(n)
    w = M @ ones if mean == "weighted" else ones
    # orthonormal basis of {v : w.v = 0}
    Q, _ = np.linalg.qr(np.column_stack([w, np.eye(n)[:, :-1]]))
    Z = Q[:, 1:]
    A = Z.T @ M @ Z
    B = Z.T @ S @ Z
    lam = scipy.linalg.eigh(A, B, eigvals_only=True)
    return (1.0 / grid.box.r) * float(np.sqrt(np.max(lam)))


def mean_zero_ratio(u, mu, mean="weighted"):
    """Normalized ratio ||(u - A)/r|| / ||grad u|| in the weighted 2-norms."""
    grid = u.grid
    M = assemble_weighted_mass(grid, mu)
    S = assemble_weighted_stiffness(grid, mu)
    ones = np.ones(grid.nnodes)
    if mean == "weighted":
        A = (ones @ (M @ u.values)) / (ones @ (M @ ones))
    else:
        A = float(np.mean(u.values))
    v = u.values - A
    num = np.sqrt(v @ (M @ v)) / grid.box.r
    den = np.sqrt(u.values @ (S @ u.values))
    return num / den if den > 0 else 0.0

"""Empirical higher-integrability probes for the mixed-boundary solves.

A solution with data G satisfies the natural energy bound at exponent p; the
higher-integrability (Meyers) property says the same comparison survives for
exponents p + delta with some positive delta.  Desk-scale stand-in: solve on
a ladder of refinements and tabulate

    N_u(delta, m) = int |grad u_m|^(p+delta) * weight,
    N_G(delta, m) = int |G|^(p+delta)       * weight,

where the weight is omega for the measure form and omega~^(p+delta) for the
multiplier form.  A delta column counts as empirically stable when the ratio
N_u/N_G moves by less than 25% between the two finest levels; the delta = 0
column reproduces the energy ratio identically (same quadrature).

Local probes sample grid-aligned cubes and evaluate the Caccioppoli
inequality (gradient energy on Q_r against oscillation on the enlarged cube
plus data; Dirichlet-touching cubes use the zero constant and the doubled
cube) and the reverse Holder inequality (a p-average bounded by a lower
q-average on the doubled cube plus data).  Enlarged cubes are clipped to the
solution box, the flat-domain analogue of working in the reflected picture.
"""

from dataclasses import dataclass, field

import numpy as np

from .assembly import prolongate, quadrature, weight_at_quad
from .errors import CubeOutOfDomain
from .solver import solve_zaremba
from .weights import weight_power


@dataclass
class MeyersEntry:
    delta: float
    m: int
    N_u: float
    N_G: float
    ratio: float


@dataclass
class MeyersReport:
    delta_grid: list
    levels: list
    entries: list = field(default_factory=list)
    stable: dict = field(default_factory=dict)
    data_flags: dict = field(default_factory=dict)

    def ratio(self, delta, m):
        for e in self.entries:
            if e.delta == delta and e.m == m:
                return e.ratio
        raise KeyError((delta, m))


def _norm_weight(prob, delta):
    w = prob.scalar_weight()
    if prob.form == "multiplier":
        return weight_power(w, prob.p + delta)
    return w


def _power_integral(grid, mags, w, s):
    quad = quadrature(grid)
    return float(quad.qw * np.sum(weight_at_quad(grid, w) * mags ** s))


def meyers_scan(problem_factory, delta_grid, levels, stability_threshold=0.25,
                **solve_opts):
    """Refinement table of weighted L^(p+delta) gradient-to-data ratios.

    ``problem_factory(m)`` builds the problem at resolution m (same box,
    boundary spec, weight, and data field re-evaluated on each grid); levels
    are solved coarse to fine with prolongated warm starts.
    """
    levels = sorted(int(m) for m in levels)
    report = MeyersReport(delta_grid=list(delta_grid), levels=levels)
    prev = None
    for m in levels:
        prob = problem_factory(m)
        x0 = None
        if prev is not None and prob.grid.m == 2 * prev.grid.m:
            x0 = prolongate(prev, prob.grid).values
        res = solve_zaremba(prob, x0=x0, **solve_opts)
        quad = quadrature(prob.grid)
        grad = np.einsum("gad,ca->cgd", quad.dN, res.u.values[quad.cell_nodes])
        mag_u = np.sqrt(np.sum(grad * grad, axis=-1))
        mag_G = np.sqrt(np.sum(prob.G.values ** 2, axis=-1))
        for delta in delta_grid:
            w = _norm_weight(prob, delta)
            N_u = _power_integral(prob.grid, mag_u, w, prob.p + delta)
            N_G = _power_integral(prob.grid, mag_G, w, prob.p + delta)
            report.entries.append(MeyersEntry(float(delta), m, N_u, N_G,
                                              N_u / N_G))
        prev = res.u
    if len(levels) >= 2:
        m1, m0 = levels[-1], levels[-2]
        for delta in delta_grid:
            r1, r0 = report.ratio(delta, m1), report.ratio(delta, m0)
            report.stable[delta] = abs(r1 - r0) / r0 < stability_threshold
            e1 = next(e for e in report.entries
                      if e.delta == delta and e.m == m1)
            e0 = next(e for e in report.entries
                      if e.delta == delta and e.m == m0)
            if e1.N_G > 4.0 * e0.N_G:
                report.data_flags[delta] = "data_diverging"
    return report


# --- local estimates --------------------------------------------------------


@dataclass
class LocalEntry:
    center: tuple
    r: float
    variant: str
    lhs: float
    rhs: float
    ratio: float


@dataclass
class LocalEstimateReport:
    entries: list = field(default_factory=list)
    empirical_constant: float = 0.0


def _cell_mask(grid, center, R):
    """Cells of the grid fully inside the cube [center +- R], clipped to box."""
    lo = np.maximum(np.asarray(center) - R, grid.box.low) - 1e-9 * grid.h
    hi = np.minimum(np.asarray(center) + R, grid.box.high) + 1e-9 * grid.h
    i0 = int(np.ceil((lo[0] - grid.box.low[0]) / grid.h - 1e-6))
    i1 = int(np.floor((hi[0] - grid.box.low[0]) / grid.h + 1e-6))
    j0 = int(np.ceil((lo[1] - grid.box.low[1]) / grid.h - 1e-6))
    j1 = int(np.floor((hi[1] - grid.box.low[1]) / grid.h + 1e-6))
    mask = np.zeros((grid.m, grid.m), dtype=bool)
    mask[max(j0, 0):max(j1, 0), max(i0, 0):max(i1, 0)] = True
    return mask.ravel()


def sample_cubes(grid, boundary, n, radii_cells=(4, 8, 16), variant="interior",
                 seed=0):
    """Deterministic node-centered cube samples with grid-aligned radii.

    Interior cubes keep their 3r/2 enlargement strictly inside the box (and
    hence away from the boundary Dirichlet set); boundary cubes must meet the
    Dirichlet node set within 3r/2.
    """
    rng = np.random.default_rng(seed)
    xy = grid.node_xy()
    d_xy = boundary.dirichlet.coords() if len(boundary.dirichlet) else None
    out = []
    guard = 0
    while len(out) < n and guard < 200 * n:
        guard += 1
        node = int(rng.integers(0, grid.nnodes))
        rc = int(radii_cells[int(rng.integers(0, len(radii_cells)))])
        r = rc * grid.h
        c = xy[node]
        enlarged = 1.5 * r
        inside = np.all(c - enlarged >= grid.box.low - 1e-12) and \
            np.all(c + enlarged <= grid.box.high + 1e-12)
        if variant == "interior":
            if not inside:
                continue
        else:
            if d_xy is None:
                continue
            touch = np.min(np.max(np.abs(d_xy - c), axis=1)) <= enlarged
            if not touch:
                continue
        out.append((tuple(c), r))
    return out


def _local_integral(grid, values_g, w_g, s, mask):
    quad = quadrature(grid)
    return float(quad.qw * np.sum(w_g[mask] * values_g[mask] ** s))


def caccioppoli_check(prob, result, cubes):
    """Per-cube Caccioppoli ratios; the empirical constant is their maximum.

    Interior cubes (enlargement 3r/2 inside the box away from D) subtract the
    plain mean over the enlarged cube; Dirichlet-touching cubes use constant
    zero and the doubled cube.  ``cubes`` holds (center, r) pairs aligned to
    the grid, as produced by :func:`sample_cubes`.
    """
    grid = prob.grid
    quad = quadrature(grid)
    p = prob.p
    w = _norm_weight(prob, 0.0)
    w_g = weight_at_quad(grid, w)
    u_g = np.einsum("ga,ca->cg", quad.N, result.u.values[quad.cell_nodes])
    grad = np.einsum("gad,ca->cgd", quad.dN, result.u.values[quad.cell_nodes])
    mag_u = np.sqrt(np.sum(grad * grad, axis=-1))
    mag_G = np.sqrt(np.sum(prob.G.values ** 2, axis=-1))
    d_xy = prob.boundary.dirichlet.coords()
    report = LocalEstimateReport()
    for center, r in cubes:
        _validate_cube(grid, center, r)
        c = np.asarray(center)
        touches = len(d_xy) and \
            np.min(np.max(np.abs(d_xy - c), axis=1)) <= 1.5 * r + 1e-12
        if touches:
            variant, enlarge, lam = "boundary", 2.0, 0.0
        else:
            variant, enlarge, lam = "interior", 1.5, None
        inner = _cell_mask(grid, c, r)
        outer = _cell_mask(grid, c, enlarge * r)
        if lam is None:
            area = quad.qw * 4 * int(outer.sum())
            lam = quad.qw * float(np.sum(u_g[outer])) / area
        lhs = _local_integral(grid, mag_u, w_g, p, inner)
        rhs = _local_integral(grid, np.abs(u_g - lam) / r, w_g, p, outer) \
            + _local_integral(grid, mag_G, w_g, p, outer)
        ratio = lhs / rhs if rhs > 0 else 0.0
        report.entries.append(LocalEntry(tuple(center), r, variant, lhs, rhs,
                                         float(ratio)))
    report.empirical_constant = max((e.ratio for e in report.entries),
                                    default=0.0)
    return report


def reverse_holder_check(prob, result, cubes, q_sub):
    """Reverse-Holder ratios: p-average on Q_r vs q-average on Q_{2r} + data.

    All three averages are normalized by the weighted measure of the inner
    cube.  Requires 1 < q_sub <= p.
    """
    p = prob.p
    if not (1.0 < q_sub <= p):
        raise ValueError("q_sub must lie in (1, p]")
    grid = prob.grid
    quad = quadrature(grid)
    w = _norm_weight(prob, 0.0)
    w_g = weight_at_quad(grid, w)
    grad = np.einsum("gad,ca->cgd", quad.dN, result.u.values[quad.cell_nodes])
    mag_u = np.sqrt(np.sum(grad * grad, axis=-1))
    mag_G = np.sqrt(np.sum(prob.G.values ** 2, axis=-1))
    report = LocalEstimateReport()
    for center, r in cubes:
        _validate_cube(grid, center, r)
        inner = _cell_mask(grid, center, r)
        outer = _cell_mask(grid, center, 2.0 * r)
        w_Qr = float(quad.qw * np.sum(w_g[inner]))
        lhs = (_local_integral(grid, mag_u, w_g, p, inner) / w_Qr) ** (1.0 / p)
        rhs = (_local_integral(grid, mag_u, w_g, q_sub, outer) / w_Qr) \
            ** (1.0 / q_sub) \
            + (_local_integral(grid, mag_G, w_g, p, outer) / w_Qr) ** (1.0 / p)
        ratio = lhs / rhs if rhs > 0 else 0.0
        report.entries.append(LocalEntry(tuple(center), r, "holder", lhs, rhs,
                                         float(ratio)))
    report.empirical_constant = max((e.ratio for e in report.entries),
                                    default=0.0)
    return report


def _validate_cube(grid, center, r):
    c = np.asarray(center, dtype=float)
    if r <= 0 or r > grid.box.r or not grid.box.contains(c, 1e-12):
        raise CubeOutOfDomain(f"cube (center={tuple(c)}, r={r}) not usable "
                              "on this grid")

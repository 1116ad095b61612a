"""Degenerate scalar and matrix weights and their Muckenhoupt characteristics.

A scalar weight mu is positive almost everywhere but may vanish or blow up at
isolated centers (the model case is |x - x0|^alpha).  A matrix weight couples
such a scalar part with a bounded-condition-number anisotropy:

    A(x) = omega(x) * R(theta) diag(1, kappa) R(theta)^T,

so the spectral norm |A(x)| equals omega(x) exactly and |A||A^-1| = 1/kappa
is bounded by the configured Lambda.

The Muckenhoupt constant of mu for exponent p is

    sup over cubes Q of  (avg_Q mu) * (avg_Q mu^(-1/(p-1)))^(p-1),

estimated here over a dyadic family of cell-aligned cubes (down to four
integration cells across) plus optional random cubes.  All averages use
composite 2x2 tensor Gauss quadrature whose nodes are strictly interior to
the integration cells, so a singular center sitting on a cell corner is never
evaluated.  The result is a lower bound of the true constant, clipped from
below at the Jensen floor 1.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRegion, QuadratureSingularity, SingularEvaluation
from .geometry import Box

_G1 = 1.0 / np.sqrt(3.0)  # 2-point Gauss abscissa on [-1, 1]


@dataclass(frozen=True)
class ScalarWeight:
    """Tagged scalar weight: constant, |x - center|^alpha power, or product."""

    kind: str
    c: float = 1.0
    center: tuple = (0.0, 0.0)
    alpha: float = 0.0
    factors: tuple = ()

    @staticmethod
    def constant(c):
        if not c > 0:
            raise ValueError("constant weight must be positive")
        return ScalarWeight("constant", c=float(c))

    @staticmethod
    def power(center, alpha):
        return ScalarWeight("power", center=tuple(float(v) for v in center),
                            alpha=float(alpha))

    @staticmethod
    def product(factors):
        return ScalarWeight("product", factors=tuple(factors))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            other = ScalarWeight.constant(other)
        return ScalarWeight.product((self, other))

    __rmul__ = __mul__

    def singular_center(self):
        """The one point where evaluation is undefined, or None."""
        if self.kind == "power" and self.alpha < 0:
            return np.asarray(self.center)
        if self.kind == "product":
            for f in self.factors:
                ctr = f.singular_center()
                if ctr is not None:
                    return ctr
        return None

    def evaluate(self, pts):
        """Weight values at points of shape (..., n); positive off centers."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "constant":
            return np.full(pts.shape[:-1], self.c)
        if self.kind == "power":
            d = np.linalg.norm(pts - np.asarray(self.center), axis=-1)
            if self.alpha < 0 and np.any(d == 0.0):
                raise SingularEvaluation(
                    f"negative-power weight evaluated at its center {self.center}")
            if self.alpha == 0.0:
                return np.ones_like(d)
            return d ** self.alpha
        if self.kind == "product":
            out = np.ones(pts.shape[:-1])
            for f in self.factors:
                out = out * f.evaluate(pts)
            return out
        raise ValueError(f"unknown weight kind {self.kind!r}")


def eval_weight(w, x):
    """Evaluate a scalar weight at a single point."""
    return float(w.evaluate(np.asarray(x, dtype=float)))


def weight_power(w, exponent):
    """The weight w(x)^exponent as a ScalarWeight of the same family."""
    e = float(exponent)
    if e == 1.0:
        return w
    if w.kind == "constant":
        return ScalarWeight.constant(w.c ** e)
    if w.kind == "power":
        return ScalarWeight.power(w.center, w.alpha * e)
    if w.kind == "product":
        return ScalarWeight.product(tuple(weight_power(f, e) for f in w.factors))
    raise ValueError(f"unknown weight kind {w.kind!r}")


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    R = np.empty(np.shape(theta) + (2, 2))
    R[..., 0, 0] = c
    R[..., 0, 1] = -s
    R[..., 1, 0] = s
    R[..., 1, 1] = c
    return R


@dataclass(frozen=True)
class MatrixWeight:
    """Symmetric positive-definite matrix weight with condition number 1/kappa.

    ``form`` records whether the matrix enters the equation as a measure
    (multiplying the whole flux) or as a multiplier (applied to the gradient
    inside the nonlinearity); the algebraic object is the same.
    ``theta`` may be a constant angle or a callable of the point.
    """

    scalar_part: ScalarWeight
    kappa: float = 1.0
    theta: object = 0.0
    lam: float = 1.0
    form: str = "measure"

    def __post_init__(self):
        if self.lam < 1.0:
            raise ValueError("condition-number bound must be >= 1")
        if not (1.0 / self.lam - 1e-12 <= self.kappa <= 1.0 + 1e-12):
            raise ValueError("eigenvalue ratio kappa must lie in [1/Lambda, 1]")
        if self.form not in ("measure", "multiplier"):
            raise ValueError(f"unknown matrix-weight form {self.form!r}")

    def is_isotropic(self):
        return self.kappa == 1.0

    def evaluate(self, pts):
        """Matrices at points of shape (..., 2); spectral norm = scalar part."""
        pts = np.asarray(pts, dtype=float)
        w = self.scalar_part.evaluate(pts)
        if self.is_isotropic():
            return w[..., None, None] * np.eye(2)
        theta = self.theta(pts) if callable(self.theta) else np.broadcast_to(
            float(self.theta), w.shape)
        R = _rotation(theta)
        D = np.zeros(w.shape + (2, 2))
        D[..., 0, 0] = 1.0
        D[..., 1, 1] = self.kappa
        M = R @ D @ np.swapaxes(R, -1, -2)
        return w[..., None, None] * M


def eval_matrix(W, x):
    """Evaluate a matrix weight at a single point."""
    return np.asarray(W.evaluate(np.asarray(x, dtype=float)))


@dataclass
class ApEstimate:
    """Lower-bound estimate of the Muckenhoupt constant [mu]_{A_p}."""

    value: float
    p: float
    cube_count: int
    max_cube: Box
    depth: int = 0


def _gauss_cell_values(fn, box, cells):
    """Per-cell 2x2 Gauss values of ``fn`` on a cells x cells grid of box.

    Returns (vals, qw) where vals has shape (cells, cells, 4) ordered
    row-major in (iy, ix) and qw = h^2/4 is the single Gauss weight.
    """
    h = box.side / cells
    base = box.low + h * 0.5
    off = h * 0.5 * _G1
    ax = base[0] + h * np.arange(cells)
    ay = base[1] + h * np.arange(cells)
    gx = np.stack([ax - off, ax + off], axis=-1)  # (cells, 2)
    gy = np.stack([ay - off, ay + off], axis=-1)
    X = gx[None, :, None, :]  # (1, cx, 1, 2)
    Y = gy[:, None, :, None]  # (cy, 1, 2, 1)
    pts = np.empty((cells, cells, 2, 2, 2))
    pts[..., 0] = np.broadcast_to(X, (cells, cells, 2, 2))
    pts[..., 1] = np.broadcast_to(Y, (cells, cells, 2, 2))
    vals = fn(pts.reshape(-1, 2)).reshape(cells, cells, 4)
    if not np.all(np.isfinite(vals)):
        raise QuadratureSingularity("weight not finite at a quadrature node")
    return vals, h * h / 4.0


def weighted_measure(w, box, cells_per_axis):
    """Composite-Gauss approximation of the weighted volume mu(box)."""
    if cells_per_axis < 1:
        raise ValueError("cells_per_axis must be >= 1")
    if box.volume == 0.0:
        return 0.0
    vals, qw = _gauss_cell_values(w.evaluate, box, int(cells_per_axis))
    return float(qw * vals.sum())


def _prefix2d(cell_sums):
    P = np.zeros((cell_sums.shape[0] + 1, cell_sums.shape[1] + 1))
    np.cumsum(cell_sums, axis=0, out=P[1:, 1:])
    np.cumsum(P[1:, 1:], axis=1, out=P[1:, 1:])
    return P


def _rect_sum(P, oy, ox, s):
    return P[oy + s, ox + s] - P[oy, ox + s] - P[oy + s, ox] + P[oy, ox]


def ap_constant_estimate(w, p, box, depth, random_samples=0, seed=0):
    """Estimate [w]_{A_p} over dyadic plus random cell-aligned cubes of box.

    The integration grid has 2^(depth+2) cells per axis, so the deepest
    dyadic cubes are 4 cells (= 4h) across.  Deeper searches therefore both
    enlarge the cube family and refine every average.  The supremum is a
    lower bound of the true constant; ties keep the first cube in scan order
    (dyadic levels coarse to fine, then random draws).
    """
    if not p > 1:
        raise ValueError("A_p requires p > 1")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    m_int = 2 ** (int(depth) + 2)
    mu_vals, qw = _gauss_cell_values(w.evaluate, box, m_int)
    expo = -1.0 / (p - 1.0)
    if np.any(mu_vals == 0.0):
        raise QuadratureSingularity("weight vanishes at a quadrature node")
    nu_vals = mu_vals ** expo
    P_mu = _prefix2d(qw * mu_vals.sum(axis=-1))
    P_nu = _prefix2d(qw * nu_vals.sum(axis=-1))
    h = box.side / m_int

    best = -np.inf
    best_cube = None
    count = 0
    for level in range(int(depth) + 1):
        s = m_int >> level  # cells across one cube at this level
        k = m_int // s
        oy, ox = np.meshgrid(np.arange(k) * s, np.arange(k) * s, indexing="ij")
        area = (s * h) ** 2
        avg_mu = _rect_sum(P_mu, oy, ox, s) / area
        avg_nu = _rect_sum(P_nu, oy, ox, s) / area
        prod = avg_mu * avg_nu ** (p - 1.0)
        count += prod.size
        i = int(np.argmax(prod))
        if prod.flat[i] > best:
            best = float(prod.flat[i])
            best_cube = (oy.flat[i], ox.flat[i], s)
    if random_samples:
        rng = np.random.default_rng(seed)
        for _ in range(int(random_samples)):
            s = int(rng.integers(4, m_int, endpoint=True))
            ox = int(rng.integers(0, m_int - s, endpoint=True))
            oy = int(rng.integers(0, m_int - s, endpoint=True))
            area = (s * h) ** 2
            prod = (_rect_sum(P_mu, oy, ox, s) / area) \
                * (_rect_sum(P_nu, oy, ox, s) / area) ** (p - 1.0)
            count += 1
            if prod > best:
                best = float(prod)
                best_cube = (oy, ox, s)
    oy, ox, s = best_cube
    ctr = (box.low[0] + h * (ox + s / 2.0), box.low[1] + h * (oy + s / 2.0))
    value = max(best, 1.0)
    return ApEstimate(value=value, p=float(p), cube_count=count,
                      max_cube=Box(ctr, s * h / 2.0), depth=int(depth))


@dataclass
class DoublingReport:
    """Both directions of the measure-comparison inequalities on U in Q."""

    lhs: float
    rhs: float
    holds: bool
    mu_Q: float
    mu_U: float
    ub_exponent: float = field(default=np.nan)


def check_strong_doubling(w, p, Q, U, ap, cells_per_axis=64):
    """Check mu(Q)/mu(U) <= [mu]_{A_p} (|Q|/|U|)^p for U inside Q.

    Also fits the reverse-direction exponent delta in
    mu(U)/mu(Q) ~ (|U|/|Q|)^delta as an empirical report.  The supplied
    estimate is a lower bound, so a reported failure escalates to a deeper
    search rather than a hard assertion.
    """
    if U.volume == 0.0:
        raise EmptyRegion("comparison region U has zero volume")
    if not (np.all(U.low >= Q.low - 1e-12) and np.all(U.high <= Q.high + 1e-12)):
        raise ValueError("U must be contained in Q")
    mu_Q = weighted_measure(w, Q, cells_per_axis)
    mu_U = weighted_measure(w, U, cells_per_axis)
    lhs = mu_Q / mu_U
    rhs = ap.value * (Q.volume / U.volume) ** p
    if U.volume == Q.volume:
        delta = np.nan
    else:
        delta = np.log(mu_U / mu_Q) / np.log(U.volume / Q.volume)
    return DoublingReport(lhs=float(lhs), rhs=float(rhs), holds=bool(lhs <= rhs),
                          mu_Q=mu_Q, mu_U=mu_U, ub_exponent=float(delta))

"""Damped-Newton minimization of regularized weighted p-energies.

The one convex functional every equality-constrained solve in the package
reduces to is

    F(v) = sum_g qw * [ (w_g / p) * (|T_g grad v|^2 + eps^2)^(p/2)
                        - <rhs_g(eps), grad v> ],

with a nonnegative scalar field w_g, an optional per-point 2x2 symmetric
matrix T_g (the gradient multiplier), and an optional data field G_g.  The
data coefficient

    rhs_g(eps) = w_g * (|G|^2   + eps^2)^((p-2)/2) * G        (T = I)
    rhs_g(eps) =       (|T G|^2 + eps^2)^((p-2)/2) * T(T G)   (T given)

carries the same eps-smoothing as the flux, so a nodal field whose discrete
gradient equals G solves every regularized stage exactly, not just the
limit.  Capacity potentials use (w = mu, T = I, G = 0); the measure-form
solves use (w = omega, T = I); the multiplier form uses (w = 1, T = M(x)).

Each Newton step solves a symmetric positive-definite system: sparse LU
below a size threshold, Jacobi-preconditioned CG above it; both are
deterministic.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import assemble_tensor_stiffness, quadrature, scatter_gradient_form

LU_MAX_DOFS = 50_000
EPS_SCHEDULE = (1e-2, 1e-4, 1e-6)
ARMIJO_SLOPE = 1e-4


def solve_spd(A, b, rtol=1e-12):
    """Deterministic SPD solve: sparse LU, or Jacobi-CG for large systems."""
    n = A.shape[0]
    if n <= LU_MAX_DOFS:
        return spla.splu(A.tocsc()).solve(b)
    d = A.diagonal()
    d[d <= 0] = 1.0
    M = spla.LinearOperator((n, n), matvec=lambda x: x / d)
    x, info = spla.cg(A, b, rtol=rtol, atol=0.0, maxiter=20 * n, M=M)
    if info != 0:
        return spla.splu(A.tocsc()).solve(b)
    return x


@dataclass
class NewtonInfo:
    iterations: int
    grad_norm: float
    final_eps: float
    converged: bool
    energy: float
    energy_history: list = None  # per accepted step, within each stage


class PEnergy:
    """The functional F above on a fixed grid; eps enters flux and data alike."""

    def __init__(self, grid, p, weight_g, T_g=None, data_G=None):
        self.grid = grid
        self.q = quadrature(grid)
        self.p = float(p)
        self.w = weight_g  # (ncells, 4)
        self.T = T_g       # (ncells, 4, 2, 2) or None
        self.G = data_G    # (ncells, 4, 2) or None
        if T_g is not None:
            self.TtT = np.einsum("cgki,cgkj->cgij", T_g, T_g)
        self._rhs_cache = {}

    def _tapply(self, vec):
        return np.einsum("cgij,cgj->cgi", self.T, vec)

    def grads(self, x):
        return np.einsum("gad,ca->cgd", self.q.dN, x[self.q.cell_nodes])

    def rhs(self, eps):
        """Data coefficient field at this regularization, cached per eps."""
        if self.G is None:
            return None
        key = float(eps)
        if key not in self._rhs_cache:
            if self.T is None:
                s2 = np.sum(self.G ** 2, axis=-1) + eps * eps
                coef = self.w[..., None] * s2[..., None] ** ((self.p - 2.0) / 2.0) \
                    * self.G
            else:
                TG = self._tapply(self.G)
                s2 = np.sum(TG ** 2, axis=-1) + eps * eps
                coef = s2[..., None] ** ((self.p - 2.0) / 2.0) * self._tapply(TG)
            self._rhs_cache[key] = coef
        return self._rhs_cache[key]

    def energy(self, x, eps):
        g = self.grads(x)
        tg = g if self.T is None else self._tapply(g)
        s2 = np.sum(tg ** 2, axis=-1) + eps * eps
        val = np.sum(self.w * s2 ** (self.p / 2.0)) / self.p
        rhs = self.rhs(eps)
        if rhs is not None:
            val -= np.einsum("cgd,cgd->", rhs, g)
        return self.q.qw * val

    def gradient(self, x, eps):
        g = self.grads(x)
        tg = g if self.T is None else self._tapply(g)
        s2 = np.sum(tg ** 2, axis=-1) + eps * eps
        flux = self.w[..., None] * s2[..., None] ** ((self.p - 2.0) / 2.0)
        if self.T is None:
            coef = flux * g
        else:
            coef = flux * np.einsum("cgij,cgj->cgi", self.TtT, g)
        rhs = self.rhs(eps)
        if rhs is not None:
            coef = coef - rhs
        return scatter_gradient_form(self.grid, coef)

    def hessian(self, x, eps):
        g = self.grads(x)
        tg = g if self.T is None else self._tapply(g)
        s2 = np.sum(tg ** 2, axis=-1) + eps * eps
        a = s2 ** ((self.p - 2.0) / 2.0)
        if self.T is None:
            D = a[..., None, None] * np.eye(2)
            if self.p != 2.0:
                b = (self.p - 2.0) * s2 ** ((self.p - 4.0) / 2.0)
                D = D + b[..., None, None] * np.einsum("cgi,cgj->cgij", g, g)
        else:
            D = a[..., None, None] * self.TtT
            if self.p != 2.0:
                b = (self.p - 2.0) * s2 ** ((self.p - 4.0) / 2.0)
                Ttg = self._tapply(tg)
                D = D + b[..., None, None] * np.einsum("cgi,cgj->cgij", Ttg, Ttg)
        D = self.w[..., None, None] * D
        return assemble_tensor_stiffness(self.grid, D)

    def data_scale(self, eps):
        """1 + norm of the assembled data vector; residual normalization."""
        rhs = self.rhs(eps)
        if rhs is None:
            return None
        return 1.0 + float(np.linalg.norm(scatter_gradient_form(self.grid, rhs)))


def _energy_along(form, x, d_full, eps):
    """Cheap evaluator of t -> F(x + t d): the grads are affine in t."""
    gx = form.grads(x)
    gd = form.grads(d_full)
    if form.T is None:
        tgx, tgd = gx, gd
    else:
        tgx, tgd = form._tapply(gx), form._tapply(gd)
    rhs = form.rhs(eps)
    if rhs is None:
        c0 = c1 = 0.0
    else:
        c0 = np.einsum("cgd,cgd->", rhs, gx)
        c1 = np.einsum("cgd,cgd->", rhs, gd)
    qw, p, w = form.q.qw, form.p, form.w

    def F(t):
        tg = tgx + t * tgd
        s2 = np.sum(tg * tg, axis=-1) + eps * eps
        return qw * (np.sum(w * s2 ** (p / 2.0)) / p - (c0 + t * c1))

    return F


def minimize_energy(form, x0, free, eps_schedule, tol=1e-11, max_newton=60,
                    scale=None, stage_tol=1e-6):
    """Damped Newton with eps-continuation on the free dofs of ``form``.

    ``x0`` is a full nodal vector carrying the fixed values; only entries in
    the boolean mask ``free`` move.  Returns (x, NewtonInfo).  Convergence is
    ||grad||_2 <= tol * scale on the free dofs; by default ``scale`` is the
    data-vector norm plus one (or the initial gradient norm when there is no
    data term).  Intermediate continuation stages stop at the looser
    ``stage_tol``; only the final stage runs to ``tol``.  Backtracking uses
    safeguarded quadratic interpolation on the Armijo condition.
    """
    x = x0.copy()
    if form.p == 2.0:
        eps_schedule = (0.0,)
    if scale is None:
        scale = form.data_scale(eps_schedule[-1])
        if scale is None:
            scale = 1.0 + np.linalg.norm(form.gradient(x, eps_schedule[0])[free])
    total_iters = 0
    eps = eps_schedule[0]
    d_full = np.zeros_like(x)
    history = []
    for stage, eps in enumerate(eps_schedule):
        this_tol = tol if stage == len(eps_schedule) - 1 else max(tol, stage_tol)
        history.append([form.energy(x, eps)])
        for _ in range(max_newton):
            g = form.gradient(x, eps)[free]
            grad_norm = float(np.linalg.norm(g))
            if grad_norm <= this_tol * scale:
                break
            H = form.hessian(x, eps)[free][:, free]
            d = solve_spd(H, -g)
            gd = float(g @ d)
            if not np.isfinite(gd) or gd >= 0:
                d = -g
                gd = -grad_norm ** 2
            d_full[:] = 0.0
            d_full[free] = d
            F = _energy_along(form, x, d_full, eps)
            F0 = F(0.0)
            t = 1.0
            accepted = False
            while t > 1e-14:
                Ft = F(t)
                if Ft <= F0 + ARMIJO_SLOPE * t * gd:
                    accepted = True
                    break
                # quadratic-interpolation backtrack, safeguarded to [t/10, t/2]
                denom = 2.0 * (Ft - F0 - t * gd)
                t_new = -gd * t * t / denom if denom > 0 else 0.5 * t
                t = min(0.5 * t, max(0.1 * t, t_new))
            if not accepted:
                break  # at the numerical floor of this stage
            x[free] += t * d
            total_iters += 1
            history[-1].append(form.energy(x, eps))
            if form.p == 2.0:
                break
    grad_norm = float(np.linalg.norm(form.gradient(x, eps)[free]))
    converged = bool(grad_norm <= tol * scale or form.p == 2.0)
    info = NewtonInfo(total_iters, grad_norm, eps, converged,
                      form.energy(x, eps), energy_history=history)
    return x, info


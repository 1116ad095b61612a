"""Degenerate weights and their Muckenhoupt characteristics.

The model weights are |x|^alpha: integrable degeneracy for alpha > -n,
Muckenhoupt class A_p for -n < alpha < n(p-1).  The estimator searches
dyadic plus random cubes and reports a lower bound of the true constant.
"""

import numpy as np

from zaremba import (Box, MatrixWeight, ScalarWeight, ap_constant_estimate,
                     check_strong_doubling, eval_matrix, weighted_measure)

box = Box((0.0, 0.0), 1.0)

print("== A_p estimates on Q_1(0), p = 2 ==")
for alpha in (0.0, 0.25, 0.5, 0.75):
    w = ScalarWeight.power((0.0, 0.0), alpha)
    est = ap_constant_estimate(w, 2.0, box, depth=5, random_samples=200)
    print(f"  |x|^{alpha:<5}: [w]_A2 >= {est.value:.6f}   "
          f"(sup cube r={est.max_cube.r:.3f} at {est.max_cube.center})")

print("\n== alpha = -n violates A_p: estimate grows with search depth ==")
w_bad = ScalarWeight.power((0.0, 0.0), -2.0)
for depth in (3, 4, 5, 6):
    est = ap_constant_estimate(w_bad, 2.0, box, depth=depth)
    print(f"  depth {depth}: {est.value:.3f}")

print("\n== weighted volume of |x|^(1/2) scales like r^(5/2) ==")
w = ScalarWeight.power((0.0, 0.0), 0.5)
for r in (1.0, 0.5, 0.25):
    mu = weighted_measure(w, Box((0.0, 0.0), r), 64)
    print(f"  mu(Q_{r:<5}) = {mu:.6f}   mu/r^2.5 = {mu / r**2.5:.6f}")

print("\n== strong doubling (measure comparison on nested cubes) ==")
ap = ap_constant_estimate(w, 2.0, box, depth=5)
rep = check_strong_doubling(w, 2.0, box, Box((0.0, 0.0), 0.5), ap)
print(f"  mu(Q)/mu(U) = {rep.lhs:.4f} <= [w]_A2 (|Q|/|U|)^2 = {rep.rhs:.4f}"
      f"  -> holds: {rep.holds};  fitted lower exponent {rep.ub_exponent:.3f}")

print("\n== matrix weight: |x|^(1/2) times a rotated anisotropy ==")
W = MatrixWeight(w, kappa=0.5, theta=np.pi / 6, lam=2.0)
A = eval_matrix(W, (0.5, 0.5))
print(f"  A((.5,.5)) eigenvalues: {np.linalg.eigvalsh(A)}"
      f"   condition number {np.linalg.cond(A):.3f} <= {W.lam}")

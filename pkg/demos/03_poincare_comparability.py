"""Sobolev-Poincare constants and their capacity comparability.

For fields vanishing on K inside a cube Q_r the best constant C of the
normalized inequality is, at p = q = 2, an eigenvalue of the weighted
stiffness/mass pencil; in general the product

    C * r * (Cap_{q,mu}(K, Q_{2r}) / mu(Q_{2r}))^(1/q)

is scale-invariant, which the dyadic sweep below exhibits.
"""

import numpy as np

from zaremba import Box, Grid, NodeSet, ScalarWeight, interior_set
from zaremba.poincare import comparability_ratio, poincare_constant

one = ScalarWeight.constant(1.0)
half = ScalarWeight.power((0.0, 0.0), 0.5)

print("== eigen route: K = full boundary of Q_{1/2}(0), mu = 1 ==")
grid = Grid(Box((0.0, 0.0), 0.5), 64)
res = poincare_constant(grid, NodeSet(grid, grid.boundary_nodes()), one,
                        2.0, 2.0)
print(f"  C = {res.C:.6f}  (closed form (1/r)(2 pi^2)^(-1/2) = "
      f"{2.0 / np.sqrt(2 * np.pi**2):.6f}), eigen residual "
      f"{res.eigen_residual:.1e}")

print("\n== candidate-ascent route: p = 2, q = 3/2, degenerate weight ==")
K = interior_set(grid, Box((0.0, 0.0), 0.25))
res = poincare_constant(grid, K, half, 2.0, 1.5)
print(f"  C >= {res.C:.6f}  ({res.bound_kind}, method {res.method})")

print("\n== comparability across dyadic scales ==")
for mu, tag in ((one, "mu = 1"), (half, "mu = |x|^(1/2)")):
    for p, q in ((2.0, 2.0), (2.0, 1.5)):
        ratios = []
        for r in (1.0, 0.5, 0.25):
            g = Grid(Box((0.0, 0.0), r), 32)
            Kr = interior_set(g, Box((0.0, 0.0), r / 2))
            ratios.append(comparability_ratio(g, Kr, mu, q, p).ratio)
        print(f"  {tag:<15} (p={p}, q={q}): ratios "
              + ", ".join(f"{x:.5f}" for x in ratios)
              + f"   spread {max(ratios)/min(ratios):.4f}")

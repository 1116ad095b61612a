"""Weighted condenser capacities, their scaling law, and set classification.

Cap_{q,mu}(K, Q) is minimized gradient q-energy among potentials that are 1
on K and vanish on the boundary of Q.  For mu = |x|^s centered at the
scaling center, dilating everything by r multiplies the capacity by
r^(n+s-q) exactly; the discrete solves reproduce the exponent to high
accuracy at matched cells per axis.
"""

import numpy as np

from zaremba import Box, Grid, ScalarWeight, interior_set
from zaremba.capacity import (CapacityProblem, capacity_scaling_check,
                              classify_negligible, compute_capacity)

one = ScalarWeight.constant(1.0)

print("== capacitary potential of the half cube in Q_2(0), q = 2 ==")
grid = Grid(Box((0.0, 0.0), 2.0), 64)
K = interior_set(grid, Box((0.0, 0.0), 0.5))
res = compute_capacity(CapacityProblem(2.0, one, K, grid))
print(f"  capacity {res.value:.6f}, potential range "
      f"[{res.potential.values.min():.2e}, {res.potential.values.max():.6f}],"
      f" iterations {res.iterations}")

print("\n== scaling exponents n + s - q ==")
for s, q in ((0.0, 2.0), (0.0, 1.5), (0.5, 1.5)):
    mu = ScalarWeight.power((0.0, 0.0), s) if s else one
    rep = capacity_scaling_check(Box((0.0, 0.0), 0.5), mu, q,
                                 [1.0, 0.5, 0.25], cells_per_axis=48)
    print(f"  s={s}, q={q}:  fitted slope {rep.slope:+.4f}   "
          f"theory {rep.theory_slope:+.4f}")
    for e in rep.entries:
        print(f"      r={e.r:<5} cap={e.capacity:.6f} "
              f"ratio(cap*r^q/mu)={e.ratio:.6f}")

print("\n== negligible vs essential: a point loses capacity under refinement ==")
for m in (16, 32, 64, 128):
    grid = Grid(Box((0.0, 0.0), 2.0), m)
    K_pt = interior_set(grid, np.array([[0.0, 0.0]]))
    label, ratio = classify_negligible(K_pt, one, 2.0, gamma=0.01, r=1.0,
                                       grid=grid)
    print(f"  m={m:<4} single node: ratio {ratio:.5f} -> {label}")

"""Capacity density of a fractal Dirichlet set.

A generalized Cantor set with ratio lambda = 0.47 (Hausdorff dimension
log 2 / log(1/0.47) ~ 0.918) on the segment [-1/2, 1/2] x {0}, weight
|x|^(1/2), exponent q = 3/2.  The density ratio

    r^q * Cap_{q,w}(D cap Q_r(x0), Q_{4r}(x0)) / w(Q_r(x0))

stays bounded below across centers and radii (the set is uniformly thick in
the capacity sense), while a single point's ratio decays as the window
grows: points are q-negligible for q <= n.
"""

from zaremba import ScalarWeight, cantor_dimension, cantor_intervals
from zaremba.poincare import line_intervals, verify_cen

lam, level, q = 0.47, 5, 1.5
weight = ScalarWeight.power((0.0, 0.0), 0.5)
intervals = cantor_intervals(lam, level)
print(f"Cantor ratio {lam}: dimension {cantor_dimension(lam):.4f}, "
      f"level-{level} prefigure has {len(intervals)} intervals of length "
      f"{intervals[0][1] - intervals[0][0]:.5f}")

D = line_intervals(intervals, y=0.0)
mids = [(0.5 * (a + b), 0.0) for a, b in intervals]
centers = [mids[0], mids[len(mids) // 3], mids[-1]]
radii = [1 / 9, 1 / 27, 1 / 81]

print("\n== Cantor set: density ratios (matched 64 cells per window) ==")
rep = verify_cen(D, weight, q, centers, radii, truncation=4.0,
                 resolution={"cells_per_axis": 64})
for s in rep.samples:
    print(f"  x0 = {s.x0[0]:+.4f}, r = {s.r:.5f}: ratio {s.ratio:.5f}")
print(f"  empirical density constant c0 = {rep.c0:.5f}")

print("\n== single-node control at the weight center (fixed h = 1/96) ==")
ctrl = verify_cen(line_intervals([(0.0, 0.0)], y=0.0), weight, q,
                  [(0.0, 0.0)], radii, truncation=4.0,
                  resolution={"h": 1 / 96})
for s in sorted(ctrl.samples, key=lambda s: s.r):
    print(f"  r = {s.r:.5f}: ratio {s.ratio:.5f}")
print("  the point's ratio falls ~3x per 3x radius step: no positive c0")

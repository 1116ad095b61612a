"""Higher integrability of the gradient under refinement.

The solve has only the natural p-energy a priori; the table below shows the
weighted L^(p+delta) gradient-to-data ratios settling under refinement for
small delta > 0 (the Meyers property), plus local Caccioppoli and reverse
Holder constants on sampled cubes.
"""

import numpy as np

from zaremba import (Grid, MatrixWeight, ScalarWeight, VectorField,
                     mark_dirichlet, unit_square)
from zaremba.meyers import (caccioppoli_check, meyers_scan,
                            reverse_holder_check, sample_cubes)
from zaremba.solver import ZarembaProblem, solve_zaremba

weight = ScalarWeight.power((0.0, 0.0), 0.5)


def G_field(xy):
    return np.column_stack([np.sin(2 * np.pi * xy[:, 1]) + 1.5,
                            np.cos(2 * np.pi * xy[:, 0]) - 0.5])


def factory(m):
    grid = Grid(unit_square(), m)
    bp = mark_dirichlet(grid, {"kind": "checkerboard", "period": 0.125})
    return ZarembaProblem("measure", 2.0, MatrixWeight(weight), grid, bp,
                          VectorField.from_callable(grid, G_field))


print("== refinement table: N_u / N_G at p + delta ==")
rep = meyers_scan(factory, [0.0, 0.05, 0.1], [32, 64, 128])
print(f"  {'delta':>6} " + " ".join(f"{('m=' + str(m)):>12}"
                                    for m in rep.levels) + "   stable")
for delta in rep.delta_grid:
    cells = " ".join(f"{rep.ratio(delta, m):12.6f}" for m in rep.levels)
    print(f"  {delta:6.2f} {cells}   {rep.stable[delta]}")

print("\n== local estimates on the m = 128 solve ==")
prob = factory(128)
res = solve_zaremba(prob)
interior = sample_cubes(prob.grid, prob.boundary, 15, variant="interior",
                        seed=1)
boundary = sample_cubes(prob.grid, prob.boundary, 15, variant="boundary",
                        seed=2)
cac = caccioppoli_check(prob, res, interior + boundary)
print(f"  Caccioppoli: {len(cac.entries)} cubes, empirical constant "
      f"{cac.empirical_constant:.4f}")
rh = reverse_holder_check(prob, res, interior, q_sub=1.5)
print(f"  reverse Holder (q = 1.5): empirical constant "
      f"{rh.empirical_constant:.4f}")

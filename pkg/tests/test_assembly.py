import numpy as np
import pytest
import scipy.sparse.linalg as spla

from zaremba.assembly import (DiscreteField, VectorField,
                              assemble_weighted_mass,
                              assemble_weighted_stiffness,
                              gradient_at_quadpoints, grid_weighted_measure,
                              prolongate, quadrature, weighted_integral,
                              weighted_norm)
from zaremba.geometry import Box, Grid, unit_square
from zaremba.weights import MatrixWeight, ScalarWeight, weighted_measure

ONE = ScalarWeight.constant(1.0)
HALF_POWER = ScalarWeight.power((0.0, 0.0), 0.5)


class TestGradient:
    def test_linear_reproduced(self):
        g = Grid(Box((0, 0), 1.0), 6)
        a = np.array([0.7, -1.3])
        u = DiscreteField.from_callable(g, lambda xy: xy @ a + 2.0)
        grads = gradient_at_quadpoints(u).values
        assert np.allclose(grads, a, atol=1e-13)

    def test_constant_zero_gradient(self):
        g = Grid(Box((0, 0), 1.0), 4)
        u = DiscreteField(g, np.full(g.nnodes, 3.14))
        assert np.allclose(gradient_at_quadpoints(u).values, 0.0)

    def test_bilinear_xy(self):
        # x1*x2 is itself bilinear, so the interpolant gradient is exact
        g = Grid(Box((0, 0), 1.0), 2)
        u = DiscreteField.from_callable(g, lambda xy: xy[:, 0] * xy[:, 1])
        grads = gradient_at_quadpoints(u).values
        pts = quadrature(g).xy
        assert np.allclose(grads[..., 0], pts[..., 1], atol=1e-14)
        assert np.allclose(grads[..., 1], pts[..., 0], atol=1e-14)


class TestWeightedNorm:
    def test_constant_field(self):
        g = Grid(unit_square(), 4)
        f = DiscreteField(g, np.full(g.nnodes, 2.0))
        assert weighted_norm(f, ONE, 3.0) == pytest.approx(2.0)

    def test_gradient_of_linear(self):
        g = Grid(Box((0, 0), 1.0), 8)
        a = np.array([3.0, 4.0])
        u = DiscreteField.from_callable(g, lambda xy: xy @ a)
        val = weighted_norm(gradient_at_quadpoints(u), ONE, 2.0)
        assert val == pytest.approx(5.0 * 2.0)  # |a| * sqrt(|Q|), |Q| = 4

    def test_consistency_with_weighted_measure(self):
        g = Grid(Box((0, 0), 1.0), 32)
        f = DiscreteField(g, np.ones(g.nnodes))
        lhs = weighted_integral(f, HALF_POWER, 1.0)
        rhs = weighted_measure(HALF_POWER, g.box, 32)
        assert abs(lhs - rhs) <= 1e-10 * rhs

    def test_homogeneity(self):
        g = Grid(unit_square(), 6)
        rng = np.random.default_rng(0)
        vals = rng.standard_normal(g.nnodes)
        for s in (1.0, 1.5, 2.0, 3.0):
            n1 = weighted_norm(DiscreteField(g, vals), HALF_POWER, s)
            n2 = weighted_norm(DiscreteField(g, -2.5 * vals), HALF_POWER, s)
            assert n2 == pytest.approx(2.5 * n1, rel=1e-12)

    def test_normalized_form(self):
        g = Grid(Box((0, 0), 0.5), 8)
        f = DiscreteField(g, np.ones(g.nnodes))
        # (1/mu(Q)) int |1/r|^s mu = r^{-s}
        val = weighted_norm(f, HALF_POWER, 2.0, normalized=True, scale=g.box.r)
        assert val == pytest.approx(1.0 / g.box.r, rel=1e-12)


class TestOperators:
    def test_constants_in_stiffness_kernel(self):
        g = Grid(unit_square(), 5)
        S = assemble_weighted_stiffness(g, HALF_POWER)
        assert np.allclose(S @ np.ones(g.nnodes), 0.0, atol=1e-12)

    def test_hat_diagonal(self):
        g = Grid(Box((0, 0), 1.0), 2)
        S = assemble_weighted_stiffness(g, ONE)
        center = g.node_id(1, 1)
        assert S[center, center] == pytest.approx(8.0 / 3.0)

    def test_symmetry_random_pairs(self):
        g = Grid(unit_square(), 6)
        S = assemble_weighted_stiffness(
            g, MatrixWeight(HALF_POWER, kappa=0.5, theta=0.3, lam=2.0))
        rng = np.random.default_rng(1)
        for _ in range(100):
            u = rng.standard_normal(g.nnodes)
            v = rng.standard_normal(g.nnodes)
            assert abs(u @ (S @ v) - v @ (S @ u)) <= 1e-12 * (
                1 + abs(u @ (S @ v)))

    def test_mass_of_ones_is_weighted_volume(self):
        g = Grid(unit_square(), 8)
        M = assemble_weighted_mass(g, ONE)
        ones = np.ones(g.nnodes)
        assert ones @ (M @ ones) == pytest.approx(1.0)

    def test_mass_scales_with_weight(self):
        g = Grid(unit_square(), 6)
        M1 = assemble_weighted_mass(g, ONE)
        M3 = assemble_weighted_mass(g, ScalarWeight.constant(3.0))
        assert np.allclose(M3.toarray(), 3.0 * M1.toarray(), atol=1e-14)

    def test_mass_consistent_with_measure(self):
        g = Grid(Box((0, 0), 1.0), 16)
        M = assemble_weighted_mass(g, HALF_POWER)
        ones = np.ones(g.nnodes)
        quad_val = ones @ (M @ ones)
        assert abs(quad_val - grid_weighted_measure(g, HALF_POWER)) <= 1e-10

    def test_linearity_in_weight(self):
        g = Grid(unit_square(), 6)
        w1 = ScalarWeight.constant(2.0)
        w2 = HALF_POWER
        S1 = assemble_weighted_stiffness(g, w1).toarray()
        S2 = assemble_weighted_stiffness(g, w2).toarray()
        M1 = assemble_weighted_mass(g, w1).toarray()
        M2 = assemble_weighted_mass(g, w2).toarray()

        class SumWeight:
            def evaluate(self, pts):
                return w1.evaluate(pts) + w2.evaluate(pts)

        S12 = assemble_weighted_stiffness(g, SumWeight()).toarray()
        M12 = assemble_weighted_mass(g, SumWeight()).toarray()
        assert np.allclose(S12, S1 + S2, atol=1e-12)
        assert np.allclose(M12, M1 + M2, atol=1e-12)

    def test_quadrature_exact_for_bilinear_squared(self):
        # int over one cell of (bilinear)^2 is degree (2,2); 2x2 Gauss exact
        g = Grid(Box((0, 0), 1.0), 2)
        u = DiscreteField.from_callable(
            g, lambda xy: (1 + xy[:, 0]) * (1 - xy[:, 1]) / 4.0)
        M = assemble_weighted_mass(g, ScalarWeight.constant(2.0))
        exact = 2.0 * (8.0 / 3.0) * (8.0 / 3.0) / 16.0
        assert u.values @ (M @ u.values) == pytest.approx(exact, rel=1e-14)

    def test_first_dirichlet_eigenvalue(self):
        g = Grid(unit_square(), 64)
        S = assemble_weighted_stiffness(g, ONE)
        M = assemble_weighted_mass(g, ONE)
        interior = ~g.boundary_mask()
        Sff = S[interior][:, interior].tocsc()
        Mff = M[interior][:, interior].tocsr()
        lu = spla.splu(Sff)
        x = np.ones(Sff.shape[0])
        for _ in range(100):
            x = lu.solve(Mff @ x)
            x /= np.sqrt(x @ (Mff @ x))
        lam = x @ (Sff @ x)
        assert abs(lam - 2 * np.pi ** 2) / (2 * np.pi ** 2) < 0.02


class TestProlongation:
    def test_bilinear_fields_transfer_exactly(self):
        g = Grid(unit_square(), 8)
        u = DiscreteField.from_callable(
            g, lambda xy: 1.0 + 2 * xy[:, 0] - xy[:, 1] + xy[:, 0] * xy[:, 1])
        fine = g.refine()
        uf = prolongate(u, fine)
        expected = DiscreteField.from_callable(
            fine, lambda xy: 1.0 + 2 * xy[:, 0] - xy[:, 1]
            + xy[:, 0] * xy[:, 1])
        assert np.allclose(uf.values, expected.values, atol=1e-13)

    def test_vector_field_from_callable_shape(self):
        g = Grid(unit_square(), 4)
        V = VectorField.from_callable(g, lambda xy: xy)
        assert V.values.shape == (g.ncells, 4, 2)
        assert np.allclose(V.values, quadrature(g).xy)

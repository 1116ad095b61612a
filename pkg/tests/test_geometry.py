import numpy as np
import pytest

from zaremba.errors import InvalidLambda, InvalidResolution, OutOfDomain
from zaremba.geometry import (Box, CantorSet, NodeSet, build_grid, cantor_dimension,
                              cantor_intervals, interior_set, mark_dirichlet,
                              unit_square)


class TestGrid:
    def test_m2_counts(self):
        g = build_grid(Box((0, 0), 1.0), 2)
        assert g.nnodes == 9
        assert g.h == 1.0

    def test_m4_counts(self):
        g = build_grid(Box((0, 0), 0.5), 4)
        assert g.nnodes == 25
        assert g.h == 0.25

    def test_refine_nests_nodes(self):
        g = build_grid(Box((0, 0), 0.5), 4)
        fine = g.refine()
        coarse_xy = {tuple(p) for p in np.round(g.node_xy(), 12)}
        fine_xy = {tuple(p) for p in np.round(fine.node_xy(), 12)}
        assert coarse_xy <= fine_xy

    def test_too_coarse(self):
        with pytest.raises(InvalidResolution):
            build_grid(Box((0, 0), 1.0), 1)

    def test_zero_volume_box_rejected(self):
        with pytest.raises(InvalidResolution):
            build_grid(Box((0, 0), 0.0), 4)


class TestCantor:
    def test_level_zero(self):
        assert cantor_intervals(0.3, 0) == [(-0.5, 0.5)]

    def test_one_third_level_one(self):
        (a1, b1), (a2, b2) = cantor_intervals(1 / 3, 1)
        assert (a1, b2) == (-0.5, 0.5)
        assert b1 == pytest.approx(-1 / 6)
        assert a2 == pytest.approx(1 / 6)

    def test_counts_and_lengths(self):
        iv = cantor_intervals(0.47, 3)
        assert len(iv) == 8
        for a, b in iv:
            assert b - a == pytest.approx(0.47 ** 3)

    def test_nesting(self):
        coarse = cantor_intervals(0.4, 2)
        fine = cantor_intervals(0.4, 3)
        for a, b in fine:
            assert any(ca - 1e-12 <= a and b <= cb + 1e-12
                       for ca, cb in coarse)

    def test_total_length_formula(self):
        for lam in (0.2, 1 / 3, 0.47):
            for k in range(5):
                total = sum(b - a for a, b in cantor_intervals(lam, k))
                assert total == pytest.approx((2 * lam) ** k)

    def test_invalid_lambda(self):
        for lam in (0.0, 0.5, 0.6, -0.1):
            with pytest.raises(InvalidLambda):
                cantor_intervals(lam, 2)

    def test_dimension(self):
        assert cantor_dimension(1 / 3) == pytest.approx(np.log(2) / np.log(3))
        assert 0 < cantor_dimension(0.47) < 1

    def test_cantor_set_ambient_mapping(self):
        cs = CantorSet(1 / 3, 1, ambient=(0.0, 3.0))
        assert cs.intervals() == [(0.0, pytest.approx(1.0)),
                                  (pytest.approx(2.0), 3.0)]
        assert cs.total_length() == pytest.approx(2.0)
        assert cs.hausdorff_dim == pytest.approx(np.log(2) / np.log(3))
        nested = CantorSet(1 / 3, 2, ambient=(0.0, 3.0)).intervals()
        for a, b in nested:
            assert any(ca - 1e-12 <= a and b <= cb + 1e-12
                       for ca, cb in cs.intervals())


class TestMarkDirichlet:
    def test_full_boundary(self):
        g = build_grid(Box((0, 0), 0.5), 4)
        bp = mark_dirichlet(g, {"kind": "full_boundary"})
        assert len(bp.dirichlet) == 16
        assert not bp.is_empty

    def test_partition_covers_boundary(self):
        g = build_grid(Box((0, 0), 0.5), 6)
        bp = mark_dirichlet(g, {"kind": "edge_list", "edges": ["left", "top"]})
        d = set(bp.dirichlet.indices)
        n = set(bp.neumann().indices)
        assert d & n == set()
        assert d | n == set(g.boundary_nodes())

    def test_checkerboard_single_node_runs(self):
        g = build_grid(Box((0, 0), 0.5), 8)
        bp = mark_dirichlet(g, {"kind": "checkerboard", "period": 2 * g.h,
                                "edges": ["bottom"]})
        on_edge = np.intersect1d(bp.dirichlet.indices, g.edge_nodes("bottom"))
        assert len(on_edge) == int(np.ceil((g.m + 1) / 2))

    def test_cantor_marking_counts(self):
        g = build_grid(Box((0, 0), 0.5), 12)
        bp = mark_dirichlet(g, {"kind": "cantor", "lam": 1 / 3, "level": 1,
                                "edge": "bottom"})
        assert len(bp.dirichlet) == 10
        xy = bp.dirichlet.coords()
        assert np.all(xy[:, 1] == -0.5)
        assert np.all((xy[:, 0] <= -1 / 6 + 1e-12) | (xy[:, 0] >= 1 / 6 - 1e-12))

    @pytest.mark.parametrize("spec", [
        {"kind": "full_boundary"},
        {"kind": "edge_list", "edges": ["right", "bottom"]},
        {"kind": "checkerboard", "period": 0.25},
        {"kind": "cantor", "lam": 0.47, "level": 3, "edge": "bottom"},
    ])
    def test_refinement_preserves_membership(self, spec):
        g = build_grid(unit_square(), 8)
        fine = g.refine()
        coarse_pts = mark_dirichlet(g, spec).dirichlet.coords()
        fine_pts = mark_dirichlet(fine, spec).dirichlet.coords()
        fine_set = {tuple(p) for p in np.round(fine_pts, 12)}
        for p in np.round(coarse_pts, 12):
            assert tuple(p) in fine_set

    def test_explicit(self):
        g = build_grid(Box((0, 0), 0.5), 4)
        bp = mark_dirichlet(g, {"kind": "explicit", "nodes": [0, 1, 2]})
        assert list(bp.dirichlet.indices) == [0, 1, 2]

    def test_empty_dirichlet_flagged_not_error(self):
        g = build_grid(Box((0, 0), 0.5), 4)
        bp = mark_dirichlet(g, {"kind": "explicit", "nodes": []})
        assert bp.is_empty


class TestInteriorSet:
    def test_sub_box_node_count(self):
        g = build_grid(Box((0, 0), 1.0), 8)
        assert len(interior_set(g, Box((0, 0), 0.5))) == 25

    def test_single_point_is_single_node(self):
        g = build_grid(Box((0, 0), 1.0), 8)
        ns = interior_set(g, np.array([[0.25, -0.5]]))
        assert len(ns) == 1
        assert np.allclose(ns.coords()[0], [0.25, -0.5])

    def test_segment_node_count(self):
        g = build_grid(Box((0, 0), 1.0), 8)
        ns = interior_set(g, ((-0.5, 0.0), (0.5, 0.0)))
        assert len(ns) == 5

    def test_out_of_domain(self):
        g = build_grid(Box((0, 0), 1.0), 8)
        with pytest.raises(OutOfDomain):
            interior_set(g, Box((0.9, 0.9), 0.5))

    def test_nodeset_rejects_bad_indices(self):
        g = build_grid(Box((0, 0), 1.0), 4)
        with pytest.raises(OutOfDomain):
            NodeSet(g, [999])

    def test_nodeset_csv_rows(self):
        g = build_grid(Box((0, 0), 1.0), 4)
        rows = NodeSet(g, [0, 7]).to_csv_rows()
        assert rows[0][0] == 0
        assert len(rows) == 2

"""Subdivision, the least-vertex retraction, contiguity, and the filling steps."""

import numpy as np
import pytest

from coarsec import (Entourage, GroundSet, PointMap, SimplicialComplex, SimplicialMap,
                     check_close, check_contiguous, combine_close_maps, fill_edge_path,
                     half_gap_certifies_contiguity, iterated_least_vertex_map,
                     iterated_subdivision, least_vertex_map, perturb_filling,
                     standard_simplex, subdivide, subdivide_map, subdivided_disk,
                     sup_displacement)
from coarsec.errors import ContiguityError, PreconditionError
from coarsec.spaces import threshold_entourage

from _oracles import brute_flags, random_downward_closed, random_symmetric_relation


def complex_from_layers(layers, n_vertices, labels=None):
    ground = GroundSet(tuple(labels) if labels else tuple(range(n_vertices)))
    return SimplicialComplex(ground, len(layers) - 1, tuple(layers))


def interval_entourage(lo, hi, r):
    ground = GroundSet(tuple(range(lo, hi + 1)))
    pts = np.arange(lo, hi + 1)
    return Entourage(ground, np.abs(pts[:, None] - pts[None, :]) <= r, normalized=True)


class TestSubdivide:
    def test_edge(self):
        sd = subdivide(standard_simplex(1))
        assert sd.complex.counts == (3, 2)
        assert sd.complex.ground.points == ((0,), (1,), (0, 1))

    def test_single_vertex(self):
        cx = SimplicialComplex(GroundSet(("a",)), 0, ({(0,)},))
        sd = subdivide(cx)
        assert sd.complex.counts == (1,)

    def test_triangle_counts(self):
        sd = subdivide(standard_simplex(2))
        assert sd.complex.counts == (7, 12, 6)

    def test_flag_counts_match_brute_force(self, rng):
        for _ in range(8):
            layers = random_downward_closed(rng, 5, 2)
            cx = complex_from_layers(layers, 5)
            sd = subdivide(cx)
            sims = [s for layer in layers for s in layer]
            flags = brute_flags(sims)
            by_len = {}
            for f in flags:
                by_len[len(f)] = by_len.get(len(f), 0) + 1
            for k in range(sd.complex.dim_cap + 1):
                assert len(sd.complex.simplices[k]) == by_len.get(k + 1, 0)

    def test_barycenter_order_rule(self, rng):
        layers = random_downward_closed(rng, 6, 3)
        sd = subdivide(complex_from_layers(layers, 6))
        cells = sd.barycenter_of
        for a in range(len(cells)):
            for b in range(a + 1, len(cells)):
                sa, sb = set(cells[a]), set(cells[b])
                if len(sa) != len(sb):
                    assert len(sa) < len(sb)
                else:
                    assert min(sa - sb) < min(sb - sa)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            subdivide(SimplicialComplex(GroundSet(()), 0, (set(),)))


class TestLeastVertexMap:
    def test_edge_images(self):
        sd = subdivide(standard_simplex(1))
        gamma = least_vertex_map(sd)
        assert gamma((0,)) == 0 and gamma((1,)) == 1 and gamma((0, 1)) == 0

    def test_single_vertex_identity(self):
        cx = SimplicialComplex(GroundSet((7,)), 0, ({(0,)},))
        gamma = least_vertex_map(subdivide(cx))
        assert gamma((7,)) == 7

    def test_flag_image_inside_top(self, rng):
        layers = random_downward_closed(rng, 6, 3)
        sd = subdivide(complex_from_layers(layers, 6))
        gamma = least_vertex_map(sd)
        for k in range(sd.complex.dim_cap + 1):
            for flag in sd.complex.simplices[k]:
                top = set(sd.barycenter_of[flag[-1]])
                image = {gamma.vertex_images[v] for v in flag}
                assert image <= top

    def test_naturality(self, rng):
        for _ in range(10):
            n = int(rng.integers(3, 6))
            layers = random_downward_closed(rng, n, 2)
            x = complex_from_layers(layers, n)
            m = n + int(rng.integers(1, 4))
            positions = sorted(rng.choice(m, size=n, replace=False).tolist())
            image_layers = [set() for _ in range(3)]
            for k in range(3):
                for s in layers[k]:
                    image_layers[k].add(tuple(positions[v] for v in s))
            extra = random_downward_closed(rng, m, 2)
            merged = [image_layers[k] | extra[k] for k in range(3)]
            y = complex_from_layers(merged, m)
            f = SimplicialMap(x, y, tuple(positions))
            sdx, sdy = subdivide(x), subdivide(y)
            sdf = subdivide_map(f, sdx, sdy)
            lhs = f.after(least_vertex_map(sdx))
            rhs = least_vertex_map(sdy).after(sdf)
            assert lhs.vertex_images == rhs.vertex_images

    def test_iterated_composition(self):
        tower = iterated_subdivision(standard_simplex(2), 2)
        gamma2 = iterated_least_vertex_map(tower)
        assert gamma2.source is tower[-1].complex
        assert gamma2.target is tower[0].previous
        one = least_vertex_map(tower[0]).after(least_vertex_map(tower[1]))
        assert gamma2.vertex_images == one.vertex_images


class TestContiguity:
    def test_equal_maps(self, four_cycle):
        u = threshold_entourage(four_cycle, 1)
        from coarsec import build_vr_complex

        cx = build_vr_complex(u, 2)
        ident = SimplicialMap.identity(cx)
        assert check_contiguous(ident, ident).contiguous

    def test_rotation_on_cycle_fails(self, four_cycle):
        from coarsec import build_vr_complex

        u = threshold_entourage(four_cycle, 1)
        cx = build_vr_complex(u, 2)
        rotation = SimplicialMap(cx, cx, (1, 2, 3, 0))
        report = check_contiguous(SimplicialMap.identity(cx), rotation)
        assert not report.contiguous
        assert len(report.witness) == 2

    def test_rotation_into_full_simplex(self, four_cycle):
        from coarsec import build_vr_complex

        u1 = threshold_entourage(four_cycle, 1)
        u2 = threshold_entourage(four_cycle, 2)
        small = build_vr_complex(u1, 3)
        big = build_vr_complex(u2, 3)
        ident = SimplicialMap.inclusion(small, big)
        rotation = SimplicialMap(small, big, (1, 2, 3, 0))
        assert check_contiguous(ident, rotation).contiguous


class TestCombineCloseMaps:
    def test_equal_maps(self):
        u = interval_entourage(0, 5, 1)
        f = PointMap.identity(u.ground)
        report = combine_close_maps(f, f, u, u)
        assert report.ok

    def test_shift_by_one(self):
        src = GroundSet(tuple(range(-6, 6)))
        tgt = GroundSet(tuple(range(-6, 7)))
        tgt_pts = np.arange(-6, 7)
        tgt_d = np.abs(tgt_pts[:, None] - tgt_pts[None, :])
        u = interval_entourage(-6, 5, 1)
        w = Entourage(tgt, tgt_d <= 1, normalized=True)
        f = PointMap.from_callable(src, tgt, lambda x: x)
        g = PointMap.from_callable(src, tgt, lambda x: x + 1)
        report = combine_close_maps(f, g, u, w)
        assert report.ok
        assert np.array_equal(report.composed_pairs, tgt_d <= 2)

    def test_precondition_enforced(self):
        src = GroundSet((0, 1))
        u = Entourage.full(src)
        f = PointMap.identity(src)
        g = PointMap(src, src, (1, 0))
        with pytest.raises(PreconditionError):
            combine_close_maps(f, g, u, Entourage.diagonal(src))

    def test_random_close_pairs(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 9))
            m = int(rng.integers(3, 9))
            src = GroundSet(tuple(range(n)))
            tgt = GroundSet(tuple(range(m)))
            u = Entourage.from_matrix(src, random_symmetric_relation(rng, n, 0.4))
            f = PointMap(src, tgt, tuple(rng.integers(0, m, n).tolist()))
            g = PointMap(src, tgt, tuple(rng.integers(0, m, n).tolist()))
            wmat = random_symmetric_relation(rng, m, 0.2)
            for a, b in zip(f.image_index, g.image_index):
                wmat[a, b] = wmat[b, a] = True
            w = Entourage.from_matrix(tgt, wmat)
            assert check_close(f, g, w)
            assert combine_close_maps(f, g, u, w, dim_cap=3).ok


def build_path_complex(length, radius=1, dim_cap=2):
    ground = GroundSet(tuple(range(length + 1)))
    pts = np.arange(length + 1)
    u = Entourage(ground, np.abs(pts[:, None] - pts[None, :]) <= radius, normalized=True)
    from coarsec import build_vr_complex

    return build_vr_complex(u, dim_cap)


class TestPerturbFilling:
    def test_overwrite_with_same_map_returns_filling(self):
        disk = subdivided_disk(1, 0, 2)
        k = build_path_complex(5, radius=1)
        coarse = build_path_complex(5, radius=2)
        f = SimplicialMap(disk.boundary_coarse, k, (0, 4))
        fine = interval_entourage(0, 5, 1)
        wide = interval_entourage(0, 5, 4)
        f_hat = fill_edge_path(0, 4, fine, wide).filling
        g_hat = perturb_filling(disk, f, f_hat, f, coarse)
        assert g_hat.vertex_images == f_hat.vertex_images

    def test_shifted_endpoints(self):
        disk = subdivided_disk(1, 0, 2)
        k = build_path_complex(5, radius=1)
        coarse = build_path_complex(5, radius=2)
        f = SimplicialMap(disk.boundary_coarse, k, (0, 4))
        fine = interval_entourage(0, 5, 1)
        wide = interval_entourage(0, 5, 4)
        f_hat = fill_edge_path(0, 4, fine, wide).filling
        g = SimplicialMap(disk.boundary_coarse, k, (1, 5))
        g_hat = perturb_filling(disk, f, f_hat, g, coarse)
        nested_a, nested_b = ((0,),), ((1,),)
        assert g_hat(nested_a) == 1
        assert g_hat(nested_b) == 5
        interior = [p for p in disk.disk.ground.points
                    if p not in disk.boundary_fine.ground.points]
        for p in interior:
            assert g_hat(p) == f_hat(p)

    def test_far_perturbation_raises(self):
        disk = subdivided_disk(1, 0, 2)
        k = build_path_complex(6, radius=1)
        tight = build_path_complex(6, radius=1)
        f = SimplicialMap(disk.boundary_coarse, k, (0, 4))
        fine = interval_entourage(0, 6, 1)
        wide = interval_entourage(0, 6, 4)
        f_hat_full = fill_edge_path(0, 4, fine, wide).filling
        f_hat = SimplicialMap(f_hat_full.source, k, f_hat_full.vertex_images)
        g = SimplicialMap(disk.boundary_coarse, k, (2, 6))
        with pytest.raises(ContiguityError):
            perturb_filling(disk, f, f_hat, g, tight)

    def test_bad_boundary_restriction_rejected(self):
        disk = subdivided_disk(1, 0, 1)
        k = build_path_complex(3, radius=1)
        coarse = build_path_complex(3, radius=2)
        f = SimplicialMap(disk.boundary_coarse, k, (0, 2))
        bad_images = []
        for p in disk.disk.ground.points:
            bad_images.append(1)  # constant map: simplicial but wrong on the boundary
        f_hat = SimplicialMap(disk.disk, k, tuple(bad_images))
        with pytest.raises(PreconditionError):
            perturb_filling(disk, f, f_hat, f, coarse)


class TestFillEdgePath:
    def test_constant(self):
        fine = interval_entourage(0, 3, 1)
        coarse = interval_entourage(0, 3, 2)
        out = fill_edge_path(1, 1, fine, coarse)
        assert out.level == 0
        assert out.path == (1,)
        assert set(out.filling.vertex_images) == {1}

    def test_distance_five(self):
        fine = interval_entourage(0, 8, 1)
        coarse = interval_entourage(0, 8, 5)
        out = fill_edge_path(0, 5, fine, coarse)
        assert out.level == 3
        assert out.path == (0, 1, 2, 3, 4, 5)
        images = list(out.filling.vertex_images)
        assert sorted(images).count(5) == 4  # tail padding repeats the endpoint
        nested_a, nested_b = 0, 1
        for _ in range(3):
            nested_a, nested_b = (nested_a,), (nested_b,)
        assert out.filling(nested_a) == 0
        assert out.filling(nested_b) == 5

    def test_four_cycle(self, four_cycle):
        fine = threshold_entourage(four_cycle, 1)
        coarse = threshold_entourage(four_cycle, 2)
        out = fill_edge_path(0, 2, fine, coarse)
        assert out.level == 1
        assert out.path in ((0, 1, 2), (0, 3, 2))

    def test_disconnected_raises(self):
        ground = GroundSet((0, 1, 10, 11))
        pts = np.array((0, 1, 10, 11))
        d = np.abs(pts[:, None] - pts[None, :])
        fine = Entourage(ground, d <= 1, normalized=True)
        coarse = Entourage(ground, d <= 10, normalized=True)
        with pytest.raises(PreconditionError):
            fill_edge_path(0, 10, fine, coarse)

    def test_not_a_coarse_edge_raises(self):
        fine = interval_entourage(0, 5, 1)
        with pytest.raises(PreconditionError):
            fill_edge_path(0, 5, fine, fine)


class TestMetricMode:
    def test_sup_displacement_and_half_gap(self):
        cx = build_path_complex(5, radius=2)
        pts = np.arange(6)
        d = np.abs(pts[:, None] - pts[None, :])
        f = SimplicialMap.identity(cx)
        g = SimplicialMap(cx, cx, (1, 2, 3, 4, 5, 5))
        assert sup_displacement(f, g, d) == 1
        assert half_gap_certifies_contiguity(f, g, d, 2, 5)
        assert not half_gap_certifies_contiguity(f, g, d, 2, 4)

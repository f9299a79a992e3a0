"""Space ingestion: word balls, synthetic families, distance files, schedules."""

import numpy as np
import pytest

from coarsec import (GroupSpec, bounded, build_word_ball, geometric_series, grid,
                     load_distance_matrix, make_synthetic, restrict_window,
                     threshold_entourage, threshold_schedule)
from coarsec.errors import CapExceededError, MetricError, ScheduleError
from coarsec.spaces import validate_metric


class TestWordBalls:
    def test_rank_one_ball_is_interval(self):
        w = build_word_ball(GroupSpec.free_abelian(1), 5)
        values = sorted(p[0] for p in w.ground.points)
        assert values == list(range(-5, 6))
        a = w.ground.index((-5,))
        b = w.ground.index((5,))
        assert w.d[a, b] == 10

    def test_rank_two_ball_count(self):
        w = build_word_ball(GroupSpec.free_abelian(2), 2)
        assert w.ground.size == 13  # 1 + 4 + 8

    def test_free_group_ball_count(self):
        w = build_word_ball(GroupSpec.free(2), 2)
        assert w.ground.size == 17  # 1 + 4 + 12 reduced words

    def test_distances_are_word_lengths(self):
        spec = GroupSpec.free(2)
        w = build_word_ball(spec, 2)
        a = w.ground.index((1, 2))      # ab
        b = w.ground.index((1, -2))     # ab^-1
        assert w.d[a, b] == 2           # (ab)^-1 ab^-1 = b^-1 b^-1
        identity = w.ground.index(())
        assert w.d[identity, a] == 2

    def test_ball_closed_under_inversion(self):
        # inversion preserves word length, so it permutes the ball; it is a
        # d-isometry only when the group is abelian (the metric is
        # left-invariant, and inversion swaps left for right invariance)
        for spec in (GroupSpec.free(2), GroupSpec.permutation([[(1, 2)], [(1, 2, 3)]])):
            w = build_word_ball(spec, 2)
            identity = w.ground.index(spec.identity())
            for p in w.ground.points:
                q = spec.invert(p)
                assert q in w.ground
                assert w.d[identity, w.ground.index(q)] == w.d[identity, w.ground.index(p)]

    def test_inversion_is_isometry_for_abelian_kinds(self):
        for spec in (GroupSpec.free_abelian(2), GroupSpec.cyclic_product([3, 4])):
            w = build_word_ball(spec, 2)
            perm = [w.ground.index(spec.invert(p)) for p in w.ground.points]
            assert np.array_equal(w.d, w.d[np.ix_(perm, perm)])

    def test_nested_radii_agree(self):
        spec = GroupSpec.free_abelian(2)
        big = build_word_ball(spec, 3)
        small = build_word_ball(spec, 2)
        idx = [big.ground.index(p) for p in small.ground.points]
        assert np.array_equal(small.d, big.d[np.ix_(idx, idx)])

    def test_permutation_group(self):
        spec = GroupSpec.permutation([[(1, 2)], [(1, 2, 3)]])
        w = build_word_ball(spec, 4)
        assert w.ground.size == 6  # all of Sym(3)

    def test_cyclic_product(self):
        spec = GroupSpec.cyclic_product([2, 3])
        w = build_word_ball(spec, 3)
        assert w.ground.size == 6

    def test_multiplication_oracle_spot_checks(self):
        for spec in (GroupSpec.free_abelian(2), GroupSpec.free(2),
                     GroupSpec.permutation([[(1, 2)], [(2, 3)]]),
                     GroupSpec.cyclic_product([2, 4])):
            gens = spec.generators()
            e = spec.identity()
            for g in gens:
                assert spec.multiply(g, spec.invert(g)) == e
                assert spec.multiply(e, g) == g
            a, b, c = gens[0], gens[-1], gens[len(gens) // 2]
            lhs = spec.multiply(spec.multiply(a, b), c)
            rhs = spec.multiply(a, spec.multiply(b, c))
            assert lhs == rhs

    def test_cap_enforced(self):
        with pytest.raises(CapExceededError):
            build_word_ball(GroupSpec.free(2), 10, cap=100)


class TestSynthetic:
    def test_bounded_is_full_simplex(self):
        w = bounded(4)
        from coarsec import build_vr_complex

        cx = build_vr_complex(threshold_entourage(w, 1), 3)
        assert cx.counts == (4, 6, 4, 1)

    def test_geometric_series_gaps(self):
        w = geometric_series(10)
        assert w.ground.size == 11
        gaps = sorted(int(w.d[i, i + 1]) for i in range(10))
        assert gaps[0] == 1 and gaps[-1] == 512

    def test_grid_shape(self):
        w = grid(9, 9)
        assert w.ground.size == 81
        assert int(w.d.max()) == 16

    def test_dispatch(self):
        assert make_synthetic("bounded", n=3).ground.size == 3
        assert make_synthetic("grid", w=2, h=5).ground.size == 10
        assert make_synthetic("geometric_series", k=4).ground.size == 5


class TestDistanceFiles:
    def test_four_cycle_file(self, tmp_path):
        f = tmp_path / "cycle.csv"
        f.write_text("#points: a,b,c,d\n0,1,2,1\n1,0,1,2\n2,1,0,1\n1,2,1,0\n")
        w = load_distance_matrix(f)
        assert w.ground.points == ("a", "b", "c", "d")
        assert w.distance("a", "c") == 2

    def test_triangle_violation(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("0,1,5\n1,0,1\n5,1,0\n")
        with pytest.raises(MetricError) as err:
            load_distance_matrix(f)
        assert err.value.witness is not None

    def test_non_square(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("0,1\n1,0,2\n")
        from coarsec.errors import FormatError

        with pytest.raises(FormatError):
            load_distance_matrix(f)

    def test_validate_metric_symmetry(self):
        d = np.array([[0, 1], [2, 0]])
        with pytest.raises(MetricError):
            validate_metric(d, (0, 1))


class TestSchedules:
    def test_thresholds_induce_nested_schedule(self):
        w = geometric_series(5)
        sched = threshold_schedule(w, [1, 2, 4, 8])
        for i in range(1, len(sched)):
            assert sched.stage(i).is_subset_of(sched.stage(i + 1))

    def test_rejects_non_increasing(self):
        w = bounded(3)
        with pytest.raises(ScheduleError):
            threshold_schedule(w, [2, 2])

    def test_restrict_window_keeps_depth(self):
        w = build_word_ball(GroupSpec.free_abelian(1), 6)
        evens = [p for p in w.ground.points if p[0] % 2 == 0]
        sub = restrict_window(w, evens)
        assert sub.ground.size == 7
        assert sub.depth is not None and len(sub.depth) == 7

    def test_env_cap_override(self, monkeypatch):
        monkeypatch.setenv("COARSEC_CAP", "5")
        with pytest.raises(CapExceededError):
            grid(3, 3)
        monkeypatch.setenv("COARSEC_CAP", "100")
        assert grid(3, 3).ground.size == 9

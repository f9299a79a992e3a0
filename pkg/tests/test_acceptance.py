"""Acceptance suite: one test per criterion, printing one PASS/FAIL line each.

Expected values marked as derived were computed with the independent oracles
in _oracles.py (exhaustive enumeration, bitset GF(2) ranks, sympy ranks,
networkx components) and frozen here.  Each criterion asserts its stated
tolerance (exact equality throughout) and runtime budget.
"""

import json
import time
from pathlib import Path

import numpy as np

from coarsec import (CECH, VIETORIS_RIPS, Entourage, GroundSet, Inclusion, PointMap,
                     SimplicialMap, SubsetFamilyFlavor, bounded, build_cech_complex,
                     build_simpset, build_vr_complex, build_word_ball,
                     certify_essential_connectivity, check_close, check_coarse_retract,
                     check_contiguous, check_sandwich, combine_close_maps, compute_betti,
                     geometric_series, grid, induced_homology_map, least_vertex_map,
                     normalize_entourage, pi1_bounded_fill, restrict_window,
                     retract_transfer_experiment, simpset_complex_comparison, subdivide,
                     subdivide_map, threshold_entourage, threshold_schedule)
from coarsec import GroupSpec, SimplicialComplex
from coarsec.cli import main
from coarsec.homology import rank_mod

from _oracles import (brute_cech_sets, brute_compose, brute_vr_sets,
                      random_downward_closed, random_symmetric_relation)


def report(k, ok, detail):
    print(f"ACCEPTANCE CRITERION {k:02d}: {'PASS' if ok else 'FAIL'} ({detail})")


def complex_from_layers(layers, n_vertices):
    ground = GroundSet(tuple(range(n_vertices)))
    return SimplicialComplex(ground, len(layers) - 1, tuple(layers))


def padded(betti, upto):
    return list(betti) + [0] * (upto - len(betti))


def test_criterion_01_sandwich_suite():
    """>= 100 random normalized entourages on <= 12 points, cap 3, zero violations."""
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    failures = []
    for trial in range(100):
        n = int(rng.integers(3, 13))
        ground = GroundSet(tuple(range(n)))
        u = Entourage.from_matrix(ground, random_symmetric_relation(rng, n, float(rng.uniform(0.1, 0.7))))
        verdict = check_sandwich(u, 3)
        if not verdict.ok:
            failures.append((trial, verdict.violation))
            continue
        vr = brute_vr_sets(u.pairs, 3)
        cech = brute_cech_sets(u.pairs, 3)
        vr2 = brute_vr_sets(brute_compose(u.pairs, u.pairs), 3)
        if not (vr <= cech <= vr2):
            failures.append((trial, "oracle inclusion failed"))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30
    report(1, ok, f"100 instances, {elapsed:.1f}s")
    assert not failures, failures[:3]
    assert elapsed < 30


def test_criterion_02_flavor_equivalence_oracle():
    """>= 50 random instances <= 8 points: C and E Betti agree in degrees 0..2."""
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    failures = []
    for trial in range(50):
        n = int(rng.integers(3, 9))
        ground = GroundSet(tuple(range(n)))
        u = Entourage.from_matrix(ground, random_symmetric_relation(rng, n, float(rng.uniform(0.2, 0.8))))
        for kind, build in ((VIETORIS_RIPS, build_vr_complex), (CECH, build_cech_complex)):
            sets = build(u, 3)
            tuples = build_simpset(SubsetFamilyFlavor(kind, u), 3)
            if padded(compute_betti(sets), 3) != padded(compute_betti(tuples), 3):
                failures.append((trial, kind, "betti mismatch"))
                continue
            comparison = simpset_complex_comparison(tuples, sets)
            if not (comparison.chain_map_ok and comparison.all_isomorphisms):
                failures.append((trial, kind, "comparison failed"))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120
    report(2, ok, f"50 instances x 2 families, {elapsed:.1f}s")
    assert not failures, failures[:3]
    assert elapsed < 120


def test_criterion_03_least_vertex_suite():
    """>= 50 random complexes <= 7 vertices: retraction properties, exactly."""
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    failures = []
    for trial in range(50):
        n = int(rng.integers(3, 8))
        layers = random_downward_closed(rng, n, 3)
        cx = complex_from_layers(layers, n)
        sd = subdivide(cx)
        gamma = least_vertex_map(sd)  # construction itself asserts simpliciality
        if any(gamma.vertex_images[i] != min(s) for i, s in enumerate(sd.barycenter_of)):
            failures.append((trial, "least-vertex rule violated"))
            continue
        # naturality along a random order-preserving injective map
        m = n + int(rng.integers(1, 4))
        positions = sorted(rng.choice(m, size=n, replace=False).tolist())
        image_layers = [set() for _ in range(4)]
        for k in range(4):
            for s in layers[k]:
                image_layers[k].add(tuple(positions[v] for v in s))
        extra = random_downward_closed(rng, m, 3)
        y = complex_from_layers([image_layers[k] | extra[k] for k in range(4)], m)
        f = SimplicialMap(cx, y, tuple(positions))
        sdy = subdivide(y)
        lhs = f.after(least_vertex_map(sd))
        rhs = least_vertex_map(sdy).after(subdivide_map(f, sd, sdy))
        if lhs.vertex_images != rhs.vertex_images:
            failures.append((trial, "naturality failed"))
            continue
        for k in range(min(3, len(compute_betti(cx)))):
            hm = induced_homology_map(gamma, k)
            rows, cols = hm.shape
            mat = np.array(hm.matrix, dtype=np.int64).reshape(rows, cols)
            if rows != cols or rank_mod(mat, 2) != rows:
                failures.append((trial, k, "homology not isomorphic"))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120
    report(3, ok, f"50 complexes, {elapsed:.1f}s")
    assert not failures, failures[:3]
    assert elapsed < 120


def _random_close_quadruple(rng):
    n = int(rng.integers(3, 9))
    m = int(rng.integers(3, 9))
    src = GroundSet(tuple(range(n)))
    tgt = GroundSet(tuple(range(m)))
    u = Entourage.from_matrix(src, random_symmetric_relation(rng, n, float(rng.uniform(0.2, 0.7))))
    f = PointMap(src, tgt, tuple(int(v) for v in rng.integers(0, m, n)))
    g = PointMap(src, tgt, tuple(int(v) for v in rng.integers(0, m, n)))
    wmat = random_symmetric_relation(rng, m, float(rng.uniform(0.0, 0.3)))
    for a, b in zip(f.image_index, g.image_index):
        wmat[a, b] = wmat[b, a] = True
    w = Entourage.from_matrix(tgt, wmat)
    return f, g, u, w


def test_criterion_04_contiguity_implies_equal_homology():
    """>= 50 random contiguous pairs induce identical homology matrices."""
    rng = np.random.default_rng(404)
    t0 = time.perf_counter()
    checked = 0
    failures = []
    # half the pairs: the two canonical retractions of a subdivision
    for trial in range(25):
        n = int(rng.integers(3, 7))
        cx = complex_from_layers(random_downward_closed(rng, n, 3), n)
        sd = subdivide(cx)
        lo = least_vertex_map(sd)
        hi = SimplicialMap(sd.complex, sd.previous, tuple(max(s) for s in sd.barycenter_of))
        if not check_contiguous(lo, hi).contiguous:
            failures.append((trial, "expected contiguous pair"))
            continue
        checked += 1
        for k in range(min(3, len(compute_betti(cx)))):
            if induced_homology_map(lo, k).matrix != induced_homology_map(hi, k).matrix:
                failures.append((trial, k, "matrices differ"))
    # the other half: close point maps into the composed-scale complex
    for trial in range(25):
        f, g, u, w = _random_close_quadruple(rng)
        combined = combine_close_maps(f, g, u, w, dim_cap=3)
        if not combined.ok:
            failures.append((trial, "close-maps verdict failed"))
            continue
        # a union of two capped simplices can have twice the vertices, so the
        # target complex needs twice the dimension headroom
        vw = Entourage.from_matrix(w.ground, combined.composed_pairs)
        target = build_vr_complex(normalize_entourage(vw, strict=True), 7)
        source = combined.source_complex
        fs = SimplicialMap(source, target, tuple(int(v) for v in f.image_index))
        gs = SimplicialMap(source, target, tuple(int(v) for v in g.image_index))
        if not check_contiguous(fs, gs).contiguous:
            failures.append((trial, "maps not contiguous into composed scale"))
            continue
        checked += 1
        for k in range(min(3, len(compute_betti(source)))):
            if induced_homology_map(fs, k).matrix != induced_homology_map(gs, k).matrix:
                failures.append((trial, k, "matrices differ"))
    elapsed = time.perf_counter() - t0
    ok = not failures and checked == 50 and elapsed < 60
    report(4, ok, f"{checked} contiguous pairs, {elapsed:.1f}s")
    assert not failures, failures[:3]
    assert checked == 50
    assert elapsed < 60


def test_criterion_05_close_maps_lemma_suite():
    """>= 50 random close quadruples: every union simplex lands in the composed scale."""
    rng = np.random.default_rng(505)
    t0 = time.perf_counter()
    failures = []
    for trial in range(50):
        f, g, u, w = _random_close_quadruple(rng)
        if not check_close(f, g, w):
            failures.append((trial, "closeness construction broken"))
            continue
        verdict = combine_close_maps(f, g, u, w, dim_cap=3)
        if not verdict.ok:
            failures.append((trial, verdict.witness))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    report(5, ok, f"50 quadruples, {elapsed:.1f}s")
    assert not failures, failures[:3]
    assert elapsed < 60


def test_criterion_06_four_cycle_golden_case(four_cycle):
    """Frozen Betti vector fixtures, re-derived here by the brute-force oracle."""
    from _oracles import betti_f2, complex_boundaries

    t0 = time.perf_counter()
    u1 = threshold_entourage(four_cycle, 1)
    u2 = threshold_entourage(four_cycle, 2)
    vr1 = build_vr_complex(u1, 3)
    cech1 = build_cech_complex(u1, 3)
    vr2 = build_vr_complex(u2, 3)

    def oracle_betti(pairs, family):
        layers = [sorted(s for s in family(pairs, 3) if len(s) == k + 1) for k in range(4)]
        return betti_f2(complex_boundaries(layers))

    fixtures = {
        "vr1": ([1, 1, 0], oracle_betti(u1.pairs, brute_vr_sets)),
        "cech1": ([1, 0, 1], oracle_betti(u1.pairs, brute_cech_sets)),
        "vr2": ([1, 0, 0], oracle_betti(u2.pairs, brute_vr_sets)),
    }
    results = {
        "vr1": compute_betti(vr1) == [1, 1],
        "cech1": compute_betti(cech1) == [1, 0, 1],
        "vr2": compute_betti(vr2) == [1, 0, 0],
        "oracle_agrees": all(frozen == derived for frozen, derived in fixtures.values()),
        "h1_into_cech": induced_homology_map(Inclusion(vr1, cech1), 1).is_zero,
        "h1_into_vr2": induced_homology_map(Inclusion(vr1, vr2), 1).is_zero,
        "pi1_fill": pi1_bounded_fill((0, 1, 2, 3, 0), cech1, budget=200).found,
    }
    elapsed = time.perf_counter() - t0
    ok = all(results.values()) and elapsed < 1
    report(6, ok, f"{elapsed * 1000:.0f}ms")
    assert all(results.values()), results
    assert elapsed < 1


def test_criterion_07_integer_window():
    """[-20, 20], thresholds 1..5, n = 2, margin 5: complete with j(i) = i."""
    t0 = time.perf_counter()
    w = build_word_ball(GroupSpec.free_abelian(1), 20)
    sched = threshold_schedule(w, [1, 2, 3, 4, 5])
    cert = certify_essential_connectivity(sched, 2, margin=5, depth=w.depth)
    elapsed = time.perf_counter() - t0
    ok = cert.complete and [s.witness for s in cert.stages] == [1, 2, 3, 4, 5] and elapsed < 10
    report(7, ok, f"{elapsed:.1f}s")
    assert cert.complete
    assert [s.witness for s in cert.stages] == [1, 2, 3, 4, 5]
    assert elapsed < 10


def test_criterion_08_grid_window():
    """9x9 l1 grid, thresholds {1, 2}, margin 1: H_1 dies at stage 2."""
    t0 = time.perf_counter()
    w = grid(9, 9)
    sched = threshold_schedule(w, [1, 2])
    cert = certify_essential_connectivity(sched, 2, margin=1, depth=w.depth, dim_cap=3)
    # the interior 7x7 window carries 36 independent unit squares at stage 1
    interior = [p for p, dep in zip(w.ground.points, w.depth) if dep >= 1]
    sub = restrict_window(w, interior)
    src = build_vr_complex(threshold_entourage(sub, 1), 3)
    tgt = build_vr_complex(threshold_entourage(w, 2), 3)
    assert compute_betti(src)[1] == 36  # 2*7*6 - 49 + 1, one class per unit square
    hm = induced_homology_map(Inclusion(src, tgt), 1)
    elapsed = time.perf_counter() - t0
    ok = cert.complete and cert.stages[0].witness == 2 and hm.is_zero and elapsed < 120
    report(8, ok, f"{elapsed:.1f}s")
    assert hm.is_zero
    assert cert.complete
    assert cert.stages[0].witness == 2
    assert elapsed < 120


def test_criterion_09_non_connected_control(tmp_path):
    """Criterion as stated: power schedule incomplete with growing witnesses.

    KNOWN SPEC DEFECT (see /root/notes/decisions.md): with the paper's
    non-strict Vietoris-Rips inequality, the threshold-512 stage merges the
    window (the largest gap is exactly 512), so every stage is witnessed by
    the final stage and the certificate is complete.  Witness existence for
    n = 1 is moreover stage-independent, so "incomplete with strictly growing
    j(i) among completed stages" is unattainable for any window.  The test
    asserts the criterion faithfully and is expected to fail.
    """
    t0 = time.perf_counter()
    w = geometric_series(10)
    sched = threshold_schedule(w, [2 ** i for i in range(10)])
    cert = certify_essential_connectivity(sched, 1)
    completed = [(s.stage, s.witness) for s in cert.stages if s.witness is not None]
    strictly_growing = all(b[1] > a[1] for a, b in zip(completed, completed[1:]))
    space = tmp_path / "geom.space"
    space.write_text(json.dumps({
        "format": 1, "kind": "synthetic", "family": "geometric_series", "k": 10,
        "schedule": [2 ** i for i in range(10)],
    }))
    exit_code = main(["certify", "--input", str(space), "--degree", "1",
                      "--out", str(tmp_path / "geom.cert.json")])
    elapsed = time.perf_counter() - t0
    ok = (not cert.complete) and strictly_growing and exit_code == 2 and elapsed < 1
    report(9, ok, f"complete={cert.complete}, witnesses={[s.witness for s in cert.stages]}, "
                  f"exit={exit_code}, {elapsed:.2f}s")
    assert not cert.complete, (
        "spec defect: the non-strict Vietoris-Rips inequality (pinned by criteria 6-8) "
        "connects the window at threshold 512, making the certificate complete; "
        "see the decisions ledger"
    )
    assert strictly_growing
    assert exit_code == 2
    assert elapsed < 1


def test_criterion_10_retract_transfer():
    """Integer window versus its even subset through the rounding retraction."""
    t0 = time.perf_counter()
    x = build_word_ball(GroupSpec.free_abelian(1), 20)
    evens = [p for p in x.ground.points if p[0] % 2 == 0]
    y = restrict_window(x, evens)
    xs = threshold_schedule(x, [1, 2, 3, 4, 5, 6])
    ys = threshold_schedule(y, [2, 4, 6])
    inc = PointMap.inclusion(y.ground, x.ground)
    ret = PointMap.from_callable(x.ground, y.ground, lambda p: (2 * (p[0] // 2),))
    rr = check_coarse_retract(inc, ret, xs, ys)
    transfer = retract_transfer_experiment(inc, ret, xs, ys, 2)
    bounded_stages = [s for s in transfer.stages if s.ok is not None]
    elapsed = time.perf_counter() - t0
    ok = (rr.retract and transfer.x_certificate.complete and transfer.y_certificate.complete
          and transfer.implication_holds and bounded_stages and elapsed < 30)
    report(10, ok, f"{len(bounded_stages)} bounded stages, {elapsed:.1f}s")
    assert rr.retract
    assert transfer.x_certificate.complete and transfer.y_certificate.complete
    assert transfer.implication_holds
    assert bounded_stages and all(s.ok for s in bounded_stages)
    assert elapsed < 30


def test_criterion_11_bounded_space():
    """bounded(6) certifies completely at every degree <= 3 with witness 1."""
    t0 = time.perf_counter()
    w = bounded(6)
    sched = threshold_schedule(w, [1])
    cert = certify_essential_connectivity(sched, 4, dim_cap=4)
    elapsed = time.perf_counter() - t0
    ok = cert.complete and cert.stages[0].witness == 1 and len(cert.stages[0].methods) == 4 \
        and elapsed < 1
    report(11, ok, f"{elapsed * 1000:.0f}ms")
    assert cert.complete
    assert cert.stages[0].witness == 1
    assert len(cert.stages[0].methods) == 4
    assert elapsed < 1


def test_criterion_12_determinism(tmp_path):
    """Re-running the desk experiments produces byte-identical certificates."""
    samples = Path(__file__).parent.parent / "samples"
    runs = [
        ("fourcycle.space", ["--degree", "2"]),
        ("z_window.space", ["--degree", "2", "--margin", "5"]),
        ("grid9.space", ["--degree", "2", "--max-dim", "3", "--margin", "1"]),
        ("geom.space", ["--degree", "1"]),
        ("bounded6.space", ["--degree", "4", "--max-dim", "4"]),
    ]
    failures = []
    for name, flags in runs:
        outs = []
        for attempt in ("first", "second"):
            out = tmp_path / f"{name}.{attempt}.cert.json"
            main(["certify", "--input", str(samples / name), *flags, "--out", str(out)])
            outs.append(out.read_bytes())
        if outs[0] != outs[1]:
            failures.append(name)
    ok = not failures
    report(12, ok, f"{len(runs)} configurations re-run")
    assert not failures, failures

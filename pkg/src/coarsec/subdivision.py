"""Barycentric subdivision, the least-vertex retraction, contiguity, and fillings.

Subdividing replaces a complex by the complex of flags of its simplices; the
vertex of a flag is the barycenter of the simplex it tops.  Barycenter tokens
are the tuples of lower-level tokens of the subdivided simplex, so equality
and ordering are content-addressed and towers over a disk and its boundary
share vertices.  The canonical retraction sends each barycenter to the least
vertex of its simplex in the ground order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np

from .coarse import Entourage, GroundSet, PointMap, check_close, compose_pair_matrices
from .complexes import SimplicialComplex, build_vr_complex
from .errors import ContiguityError, PreconditionError, SimplicialityError


@dataclass(frozen=True, eq=False)
class SimplicialMap:
    """A vertex map carrying simplices to simplices.

    ``vertex_images`` aligns with the source ground order and holds target
    vertex indices.  Construction validates simpliciality.
    """

    source: SimplicialComplex
    target: SimplicialComplex
    vertex_images: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertex_images", tuple(int(v) for v in self.vertex_images))
        if len(self.vertex_images) != self.source.ground.size:
            raise ValueError("one image per source vertex required")
        witness = simpliciality_witness(self.source, self.target, self.vertex_images)
        if witness is not None:
            raise SimplicialityError(f"image of {witness} is not a target simplex", witness)

    @classmethod
    def from_tokens(cls, source: SimplicialComplex, target: SimplicialComplex,
                    mapping) -> "SimplicialMap":
        images = tuple(target.ground.index(mapping[p]) for p in source.ground.points)
        return cls(source, target, images)

    @classmethod
    def identity(cls, cx: SimplicialComplex) -> "SimplicialMap":
        return cls(cx, cx, tuple(range(cx.ground.size)))

    @classmethod
    def inclusion(cls, source: SimplicialComplex, target: SimplicialComplex) -> "SimplicialMap":
        images = tuple(target.ground.index(p) for p in source.ground.points)
        return cls(source, target, images)

    def image_simplex(self, s: tuple) -> tuple:
        return tuple(sorted({self.vertex_images[v] for v in s}))

    def __call__(self, point):
        return self.target.ground.points[self.vertex_images[self.source.ground.index(point)]]

    def after(self, inner: "SimplicialMap") -> "SimplicialMap":
        """self o inner."""
        if inner.target.ground.points != self.source.ground.points:
            raise ValueError("composition domain mismatch")
        images = tuple(self.vertex_images[v] for v in inner.vertex_images)
        return SimplicialMap(inner.source, self.target, images)

    def retarget(self, target: SimplicialComplex) -> "SimplicialMap":
        """Reinterpret into a larger complex by matching vertex tokens."""
        images = tuple(target.ground.index(self.target.ground.points[v]) for v in self.vertex_images)
        return SimplicialMap(self.source, target, images)


def simpliciality_witness(source: SimplicialComplex, target: SimplicialComplex,
                          vertex_images: Sequence[int]) -> Optional[tuple]:
    """First source simplex whose image set is not a target simplex, else None."""
    for k in range(source.dim_cap + 1):
        for s in sorted(source.simplices[k]):
            image = tuple(sorted({vertex_images[v] for v in s}))
            if image not in target:
                return s
    return None


@dataclass(frozen=True)
class ContiguityReport:
    contiguous: bool
    witness: Optional[tuple] = None


def check_contiguous(f: SimplicialMap, g: SimplicialMap) -> ContiguityReport:
    """True iff f(s) united with g(s) is a target simplex for every source simplex."""
    if f.source is not g.source and f.source.ground.points != g.source.ground.points:
        raise ValueError("contiguity needs a shared source")
    if f.target is not g.target and f.target.ground.points != g.target.ground.points:
        raise ValueError("contiguity needs a shared target")
    for k in range(f.source.dim_cap + 1):
        for s in sorted(f.source.simplices[k]):
            union = tuple(sorted({f.vertex_images[v] for v in s} | {g.vertex_images[v] for v in s}))
            if union not in f.target:
                return ContiguityReport(False, s)
    return ContiguityReport(True)


# ---------------------------------------------------------------------------
# subdivision


@dataclass(frozen=True, eq=False)
class SubdividedComplex:
    """One barycentric subdivision step, remembering where it came from.

    ``complex`` is the subdivision of ``previous``; ``base`` is the original
    complex (``level`` steps below).  ``barycenter_of[i]`` is the simplex of
    ``previous`` (as vertex indices) whose barycenter is vertex i, aligned
    with the ground order of ``complex``: by dimension, then lexicographic,
    which realizes the required barycenter order.
    """

    base: SimplicialComplex
    previous: SimplicialComplex
    level: int
    complex: SimplicialComplex
    barycenter_of: tuple


def subdivide(x: Union[SimplicialComplex, SubdividedComplex]) -> SubdividedComplex:
    """Barycentric subdivision; iterable by feeding the result back in."""
    if isinstance(x, SubdividedComplex):
        base, previous, level = x.base, x.complex, x.level + 1
    else:
        base, previous, level = x, x, 1
    if previous.dim < 0:
        raise ValueError("cannot subdivide an empty complex")
    cells = [s for k in range(previous.dim_cap + 1) for s in sorted(previous.simplices[k])]
    cells.sort(key=lambda s: (len(s), s))
    index_of = {s: i for i, s in enumerate(cells)}
    tokens = tuple(tuple(previous.ground.points[v] for v in s) for s in cells)
    ground = GroundSet(tokens)

    chains = {}
    for s in cells:
        ending_here = [(s,)]
        for size in range(1, len(s)):
            for face in combinations(s, size):
                for c in chains[face]:
                    ending_here.append(c + (s,))
        chains[s] = ending_here
    layers = [set() for _ in range(previous.dim_cap + 1)]
    for s in cells:
        for c in chains[s]:
            layers[len(c) - 1].add(tuple(index_of[t] for t in c))
    cx = SimplicialComplex(ground, previous.dim_cap, tuple(layers))
    return SubdividedComplex(base, previous, level, cx, tuple(cells))


def iterated_subdivision(x: SimplicialComplex, n: int) -> list:
    """Tower of n subdivision steps (empty list for n = 0)."""
    tower = []
    current: Union[SimplicialComplex, SubdividedComplex] = x
    for _ in range(n):
        current = subdivide(current)
        tower.append(current)
    return tower


def least_vertex_map(sd: SubdividedComplex) -> SimplicialMap:
    """Canonical retraction of a subdivision: each barycenter to min of its simplex."""
    images = tuple(min(s) for s in sd.barycenter_of)
    return SimplicialMap(sd.complex, sd.previous, images)


def iterated_least_vertex_map(tower: Sequence[SubdividedComplex]) -> SimplicialMap:
    """Composite retraction of a subdivision tower down to its base."""
    if not tower:
        raise ValueError("empty tower has no retraction")
    out = least_vertex_map(tower[0])
    for sd in tower[1:]:
        out = out.after(least_vertex_map(sd))
    return out


def subdivide_map(f: SimplicialMap, sdx: SubdividedComplex, sdy: SubdividedComplex) -> SimplicialMap:
    """Functorial action on subdivisions: barycenter of s to barycenter of f(s)."""
    if sdx.previous.ground.points != f.source.ground.points:
        raise ValueError("sdx must subdivide the source of f")
    if sdy.previous.ground.points != f.target.ground.points:
        raise ValueError("sdy must subdivide the target of f")
    index_of = {s: i for i, s in enumerate(sdy.barycenter_of)}
    images = []
    for s in sdx.barycenter_of:
        image = f.image_simplex(s)
        if image not in index_of:
            raise SimplicialityError(f"image simplex {image} has no barycenter in the target", image)
        images.append(index_of[image])
    return SimplicialMap(sdx.complex, sdy.complex, tuple(images))


# ---------------------------------------------------------------------------
# model disks


def standard_simplex(m: int) -> SimplicialComplex:
    """The full simplex on vertices 0..m."""
    if m < 0:
        raise ValueError("dimension must be nonnegative")
    ground = GroundSet(tuple(range(m + 1)))
    return SimplicialComplex.from_simplices(ground, [tuple(range(m + 1))], m, close=True)


def boundary_simplex(m: int) -> SimplicialComplex:
    """The boundary of the m-simplex, over the same ground set 0..m."""
    if m < 1:
        raise ValueError("the boundary model needs dimension at least 1")
    ground = GroundSet(tuple(range(m + 1)))
    tops = list(combinations(range(m + 1), m))
    return SimplicialComplex.from_simplices(ground, tops, m - 1, close=True)


@dataclass(frozen=True, eq=False)
class SubdividedDisk:
    """Subdivided model pair: a disk at one level, its boundary at a coarser one.

    Boundary tokens are shared with the disk at every level, so restriction is
    token membership; ``boundary_retraction`` is the composite least-vertex
    map from the fine boundary down to the coarse one.
    """

    dim: int
    boundary_level: int
    disk_level: int
    disk: SimplicialComplex
    boundary_coarse: SimplicialComplex
    boundary_fine: SimplicialComplex
    boundary_retraction: SimplicialMap


def subdivided_disk(m: int, boundary_level: int, disk_level: int) -> SubdividedDisk:
    if disk_level < boundary_level:
        raise ValueError("disk level must be at least the boundary level")
    disk_tower = iterated_subdivision(standard_simplex(m), disk_level)
    disk = disk_tower[-1].complex if disk_tower else standard_simplex(m)
    boundary_tower = iterated_subdivision(boundary_simplex(m), disk_level)
    coarse = boundary_tower[boundary_level - 1].complex if boundary_level else boundary_simplex(m)
    fine = boundary_tower[-1].complex if boundary_tower else boundary_simplex(m)
    if disk_level == boundary_level:
        retraction = SimplicialMap.identity(fine)
    else:
        retraction = iterated_least_vertex_map(boundary_tower[boundary_level:])
    return SubdividedDisk(m, boundary_level, disk_level, disk, coarse, fine, retraction)


def perturb_filling(disk: SubdividedDisk, f: SimplicialMap, f_hat: SimplicialMap,
                    g: SimplicialMap, coarse_target: SimplicialComplex) -> SimplicialMap:
    """Fill a perturbed sphere by overwriting a known filling on the boundary.

    ``f`` and ``g`` map the coarse boundary into a complex K inside
    ``coarse_target``; ``f_hat`` fills ``f`` over the subdivided disk.  The
    returned map agrees with g composed with the boundary retraction on
    boundary barycenters and with ``f_hat`` elsewhere.  Preconditions (the
    boundary restriction identity and contiguity of f and g into the coarse
    target) are enforced; the overwrite is then checked to be simplicial into
    ``coarse_target``, and a failure witness names the simplex on which the
    contiguity surrogate was too weak.
    """
    if f.source.ground.points != disk.boundary_coarse.ground.points:
        raise PreconditionError("f must be defined on the coarse boundary of the disk")
    if g.source.ground.points != f.source.ground.points or \
            g.target.ground.points != f.target.ground.points:
        raise PreconditionError("f and g must share source and target")
    if f_hat.source.ground.points != disk.disk.ground.points:
        raise PreconditionError("f_hat must be defined on the subdivided disk")
    if f_hat.target.ground.points != f.target.ground.points:
        raise PreconditionError("f_hat must land in the same complex as f")
    if not f.target.is_subcomplex_of(coarse_target):
        raise PreconditionError("K must be a subcomplex of the coarse target")

    retraction = disk.boundary_retraction
    boundary_vertex = {p: i for i, p in enumerate(disk.boundary_fine.ground.points)}
    disk_points = disk.disk.ground.points
    for p, v_fine in boundary_vertex.items():
        v_disk = disk.disk.ground.index(p)
        expected = f.vertex_images[retraction.vertex_images[v_fine]]
        if f_hat.vertex_images[v_disk] != expected:
            raise PreconditionError(
                f"f_hat does not restrict to f after the boundary retraction at {p!r}"
            )

    f_coarse = f.retarget(coarse_target)
    g_coarse = g.retarget(coarse_target)
    report = check_contiguous(f_coarse, g_coarse)
    if not report.contiguous:
        raise ContiguityError(
            f"f and g are not contiguous into the coarse target at {report.witness}",
            report.witness,
        )

    to_coarse = [coarse_target.ground.index(p) for p in f.target.ground.points]
    images = []
    for i, p in enumerate(disk_points):
        if p in boundary_vertex:
            k_image = g.vertex_images[retraction.vertex_images[boundary_vertex[p]]]
        else:
            k_image = f_hat.vertex_images[i]
        images.append(to_coarse[k_image])
    witness = simpliciality_witness(disk.disk, coarse_target, images)
    if witness is not None:
        raise SimplicialityError(
            "overwritten filling is not simplicial; the contiguity surrogate was "
            f"insufficient at {witness}",
            witness,
        )
    return SimplicialMap(disk.disk, coarse_target, tuple(images))


# ---------------------------------------------------------------------------
# edge-path filling and close maps


@dataclass(frozen=True)
class EdgePathFilling:
    level: int
    path: tuple
    filling: SimplicialMap


def fill_edge_path(x, y, fine: Entourage, coarse: Entourage, dim_cap: int = 1) -> EdgePathFilling:
    """Fill a coarse edge by a subdivided path in the fine complex.

    Finds a shortest fine path from x to y, subdivides the model edge until it
    has at least that many segments, and maps path vertices in order with the
    tail padded by the endpoint (simplicial because the diagonal is present).
    """
    if fine.ground.points != coarse.ground.points:
        raise PreconditionError("fine and coarse entourages must share a ground set")
    if not coarse.has(x, y):
        raise PreconditionError("the pair is not a coarse edge")
    start, goal = fine.ground.index(x), fine.ground.index(y)
    from collections import deque

    parent = {start: None}
    dq = deque([start])
    while dq and goal not in parent:
        v = dq.popleft()
        for w in np.nonzero(fine.pairs[v])[0]:
            w = int(w)
            if w != v and w not in parent:
                parent[w] = v
                dq.append(w)
    if goal not in parent:
        raise PreconditionError("endpoints lie in different fine components")
    path = []
    v = goal
    while v is not None:
        path.append(v)
        v = parent[v]
    path = path[::-1]
    hops = len(path) - 1
    level = 0
    while (1 << level) < hops:
        level += 1
    target = build_vr_complex(fine, dim_cap)
    model = standard_simplex(1)
    if level == 0:
        cx = model
        order = [0, 1]
        endpoint_token = 0
    else:
        tower = iterated_subdivision(model, level)
        cx = tower[-1].complex
        endpoint_token = 0
        for _ in range(level):
            endpoint_token = (endpoint_token,)
        adj = {i: [] for i in range(cx.ground.size)}
        for a, b in cx.edges:
            adj[a].append(b)
            adj[b].append(a)
        cursor = cx.ground.index(endpoint_token)
        order = [cursor]
        prev = None
        while len(order) < cx.ground.size:
            nxt = [w for w in adj[cursor] if w != prev]
            prev, cursor = cursor, nxt[0]
            order.append(cursor)
    images = [0] * len(order)
    for pos, vertex in enumerate(order):
        images[vertex] = path[min(pos, hops)]
    filling = SimplicialMap(cx, target, tuple(images))
    return EdgePathFilling(level, tuple(fine.ground.points[v] for v in path), filling)


@dataclass(frozen=True)
class CloseMapsReport:
    ok: bool
    witness: Optional[tuple]
    source_complex: SimplicialComplex
    composed_pairs: np.ndarray
    simplex_count: int


def combine_close_maps(f: PointMap, g: PointMap, u: Entourage, w: Entourage,
                       dim_cap: int = 3) -> CloseMapsReport:
    """Certify that close maps are contiguous into the composed-scale complex.

    With V the union of the two pushforwards of u, verifies for every simplex
    s of the source Vietoris-Rips complex that f(s) united with g(s) has all
    ordered vertex pairs inside V o w (membership in the Vietoris-Rips complex
    at that relation).  Requires f and g to be w-close.
    """
    if not check_close(f, g, w):
        raise PreconditionError("maps are not close at the given entourage")
    v_pairs = f.push_entourage(u) | g.push_entourage(u)
    vw = compose_pair_matrices(v_pairs, w.pairs)
    src = build_vr_complex(u, dim_cap)
    fi, gi = f.image_index, g.image_index
    count = 0
    for k in range(dim_cap + 1):
        for s in sorted(src.simplices[k]):
            count += 1
            image = sorted({int(fi[v]) for v in s} | {int(gi[v]) for v in s})
            for a in image:
                for b in image:
                    if not vw[a, b]:
                        return CloseMapsReport(False, (s, (a, b)), src, vw, count)
    return CloseMapsReport(True, None, src, vw, count)


def sup_displacement(f: SimplicialMap, g: SimplicialMap, d: np.ndarray):
    """Largest distance between images of the same vertex (metric mode)."""
    if f.source.ground.points != g.source.ground.points:
        raise ValueError("maps must share a source")
    if f.target.ground.points != g.target.ground.points:
        raise ValueError("maps must share a target")
    fi = np.array(f.vertex_images)
    gi = np.array(g.vertex_images)
    return d[fi, gi].max()


def half_gap_certifies_contiguity(f: SimplicialMap, g: SimplicialMap, d: np.ndarray,
                                  radius_lo, radius_hi) -> bool:
    """Metric sufficient condition: displacement below half the radius gap."""
    return bool(sup_displacement(f, g, d) < (radius_hi - radius_lo) / 2)

"""Example coarse spaces: word-metric balls, synthetic families, distance files.

Word distances are computed inside the double-radius ball so that distances
between radius-R points are exact; group kinds are restricted to those with
easy normal forms.  Every window can induce a nested threshold schedule.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .coarse import Entourage, EntourageSchedule, GroundSet
from .errors import CapExceededError, FormatError, MetricError, ScheduleError

DEFAULT_SIZE_CAP = 20000


def size_cap() -> int:
    """Global point-count cap; the COARSEC_CAP environment variable overrides it."""
    raw = os.environ.get("COARSEC_CAP")
    if raw is None:
        return DEFAULT_SIZE_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise FormatError(f"COARSEC_CAP must be an integer, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# groups with easy normal forms


@dataclass(frozen=True)
class GroupSpec:
    """A finitely generated group with a canonical normal form.

    Supported kinds: free_abelian(rank), free(rank), permutation(generator
    cycle lists), cyclic_product(moduli).  Generators are symmetric (closed
    under inversion) by construction.
    """

    kind: str
    rank: int = 0
    moduli: tuple = ()
    cycles: tuple = ()
    degree: int = 0

    @classmethod
    def free_abelian(cls, rank: int) -> "GroupSpec":
        if rank < 1:
            raise ValueError("rank must be positive")
        return cls("free_abelian", rank=rank)

    @classmethod
    def free(cls, rank: int) -> "GroupSpec":
        if rank < 1:
            raise ValueError("rank must be positive")
        return cls("free", rank=rank)

    @classmethod
    def permutation(cls, generators: Sequence, degree: Optional[int] = None) -> "GroupSpec":
        """Generators as lists of cycles on 1..N, e.g. [[(1, 2, 3)], [(1, 2)]]."""
        gens = tuple(tuple(tuple(int(v) for v in cyc) for cyc in gen) for gen in generators)
        moved = [v for gen in gens for cyc in gen for v in cyc]
        if not moved:
            raise ValueError("permutation group needs at least one nontrivial generator")
        n = max(moved)
        if degree is not None:
            if degree < n:
                raise ValueError("degree smaller than the largest moved point")
            n = degree
        if min(moved) < 1:
            raise ValueError("cycle entries must lie in 1..N")
        return cls("permutation", cycles=gens, degree=n)

    @classmethod
    def cyclic_product(cls, moduli: Sequence[int]) -> "GroupSpec":
        mods = tuple(int(m) for m in moduli)
        if not mods or any(m < 2 for m in mods):
            raise ValueError("moduli must all be at least 2")
        return cls("cyclic_product", moduli=mods)

    # -- normal-form arithmetic ------------------------------------------------

    def identity(self):
        if self.kind == "free_abelian":
            return (0,) * self.rank
        if self.kind == "free":
            return ()
        if self.kind == "permutation":
            return tuple(range(self.degree))
        return (0,) * len(self.moduli)

    def generators(self) -> tuple:
        if self.kind == "free_abelian":
            gens = []
            for i in range(self.rank):
                unit = tuple(int(i == j) for j in range(self.rank))
                gens.append(unit)
                gens.append(tuple(-v for v in unit))
            return tuple(gens)
        if self.kind == "free":
            return tuple((s,) for i in range(self.rank) for s in (i + 1, -(i + 1)))
        if self.kind == "permutation":
            out = []
            for gen in self.cycles:
                perm = list(range(self.degree))
                for cyc in gen:
                    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                        perm[a - 1] = b - 1
                p = tuple(perm)
                inv = self.invert(p)
                for q in (p, inv):
                    if q not in out:
                        out.append(q)
            return tuple(out)
        gens = []
        for i, m in enumerate(self.moduli):
            plus = tuple((int(i == j)) % self.moduli[j] for j in range(len(self.moduli)))
            minus = tuple((-int(i == j)) % self.moduli[j] for j in range(len(self.moduli)))
            for q in (plus, minus):
                if q not in gens and q != self.identity():
                    gens.append(q)
        return tuple(gens)

    def multiply(self, a, b):
        if self.kind == "free_abelian":
            return tuple(x + y for x, y in zip(a, b))
        if self.kind == "free":
            word = list(a)
            for letter in b:
                if word and word[-1] == -letter:
                    word.pop()
                else:
                    word.append(letter)
            return tuple(word)
        if self.kind == "permutation":
            return tuple(a[b[i]] for i in range(self.degree))
        return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))

    def invert(self, a):
        if self.kind == "free_abelian":
            return tuple(-x for x in a)
        if self.kind == "free":
            return tuple(-x for x in reversed(a))
        if self.kind == "permutation":
            inv = [0] * self.degree
            for i, v in enumerate(a):
                inv[v] = i
            return tuple(inv)
        return tuple((-x) % m for x, m in zip(a, self.moduli))


# ---------------------------------------------------------------------------
# metric windows


@dataclass(frozen=True, eq=False)
class MetricWindow:
    """A finite metric window: ordered points, distance matrix, and provenance.

    ``depth``, when present, records per point how large a ball around it
    stays inside the window of the ambient space it was cut from; margins in
    certification erode the window through it.
    """

    ground: GroundSet
    d: np.ndarray
    provenance: dict
    depth: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.ground.size
        if self.d.shape != (n, n):
            raise MetricError("distance matrix shape does not match the ground set")
        self.d.setflags(write=False)
        if self.depth is not None:
            if len(self.depth) != n:
                raise MetricError("depth must assign one value per point")
            self.depth.setflags(write=False)

    def distance(self, a, b):
        return self.d[self.ground.index(a), self.ground.index(b)]


def validate_metric(d: np.ndarray, points: Sequence) -> None:
    """Raise MetricError (with a witness) on any violated metric axiom."""
    n = d.shape[0]
    if d.shape != (n, n):
        raise MetricError("distance matrix is not square")
    if np.any(np.diagonal(d) != 0):
        i = int(np.nonzero(np.diagonal(d))[0][0])
        raise MetricError(f"nonzero self-distance at {points[i]!r}", (points[i],))
    if np.any(d < 0):
        i, j = map(int, np.argwhere(d < 0)[0])
        raise MetricError(f"negative distance between {points[i]!r} and {points[j]!r}",
                          (points[i], points[j]))
    if not np.array_equal(d, d.T):
        i, j = map(int, np.argwhere(d != d.T)[0])
        raise MetricError(f"asymmetric distances between {points[i]!r} and {points[j]!r}",
                          (points[i], points[j]))
    for k in range(n):
        slack = d - (d[:, [k]] + d[[k], :])
        if np.any(slack > 0):
            i, j = map(int, np.argwhere(slack > 0)[0])
            raise MetricError(
                f"triangle inequality fails on ({points[i]!r}, {points[k]!r}, {points[j]!r})",
                (points[i], points[k], points[j]),
            )


def build_word_ball(spec: GroupSpec, radius: int, cap: Optional[int] = None) -> MetricWindow:
    """Word-metric ball of the given radius, with exact in-ball distances.

    Enumeration is breadth-first over the double-radius ball (the frontier
    order fixes the canonical point order); d(x, y) is the word length of
    x^-1 y, which always lies inside the double ball.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    limit = cap if cap is not None else size_cap()
    gens = spec.generators()
    identity = spec.identity()
    lengths = {identity: 0}
    order = [identity]
    dq = deque([identity])
    while dq:
        g = dq.popleft()
        if lengths[g] == 2 * radius:
            continue
        for s in gens:
            h = spec.multiply(g, s)
            if h not in lengths:
                lengths[h] = lengths[g] + 1
                order.append(h)
                dq.append(h)
                if len(lengths) > limit:
                    raise CapExceededError(
                        f"word ball enumeration exceeded the cap of {limit} points"
                    )
    points = [g for g in order if lengths[g] <= radius]
    n = len(points)
    d = np.zeros((n, n), dtype=np.int64)
    inverses = [spec.invert(g) for g in points]
    for i in range(n):
        for j in range(i + 1, n):
            dist = lengths[spec.multiply(inverses[i], points[j])]
            d[i, j] = dist
            d[j, i] = dist
    depth = np.array([radius - lengths[g] for g in points], dtype=np.float64)
    return MetricWindow(
        ground=GroundSet(tuple(points)),
        d=d,
        provenance={"kind": "group_ball", "group": spec.kind, "radius": radius},
        depth=depth,
    )


def make_synthetic(kind: str, **params) -> MetricWindow:
    """Synthetic windows: geometric_series(k), grid(w, h), bounded(n)."""
    if kind == "geometric_series":
        return geometric_series(params["k"])
    if kind == "grid":
        return grid(params["w"], params["h"])
    if kind == "bounded":
        return bounded(params["n"])
    raise ValueError(f"unknown synthetic kind {kind!r}")


def geometric_series(k: int) -> MetricWindow:
    """Powers of two up to 2^k inside the integers, with the usual distance."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k + 1 > size_cap():
        raise CapExceededError("geometric series exceeds the size cap")
    points = [2 ** i for i in range(k + 1)]
    arr = np.array(points, dtype=np.int64)
    d = np.abs(arr[:, None] - arr[None, :])
    depth = np.array([2 ** (k + 1) - p - 1 for p in points], dtype=np.float64)
    return MetricWindow(GroundSet(tuple(points)), d,
                        {"kind": "synthetic", "family": "geometric_series", "k": k}, depth)


def grid(w: int, h: int) -> MetricWindow:
    """A w-by-h window of the integer lattice with the l1 metric."""
    if w < 1 or h < 1:
        raise ValueError("grid sides must be positive")
    if w * h > size_cap():
        raise CapExceededError("grid exceeds the size cap")
    points = [(i, j) for i in range(w) for j in range(h)]
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    d = np.abs(xs[:, None] - xs[None, :]) + np.abs(ys[:, None] - ys[None, :])
    depth = np.array([min(i, w - 1 - i, j, h - 1 - j) for i, j in points], dtype=np.float64)
    return MetricWindow(GroundSet(tuple(points)), d.astype(np.int64),
                        {"kind": "synthetic", "family": "grid", "w": w, "h": h}, depth)


def bounded(n: int) -> MetricWindow:
    """n points at pairwise distance one: the whole space is a single ball."""
    if n < 1:
        raise ValueError("need at least one point")
    if n > size_cap():
        raise CapExceededError("bounded space exceeds the size cap")
    d = np.ones((n, n), dtype=np.int64) - np.eye(n, dtype=np.int64)
    depth = np.full(n, np.inf)
    return MetricWindow(GroundSet(tuple(range(n))), d,
                        {"kind": "synthetic", "family": "bounded", "n": n}, depth)


def _parse_number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"cannot parse number {text!r}") from exc
    return float(frac)


def load_distance_matrix(path) -> MetricWindow:
    """Read a comma-separated square matrix; first line may be '#points: a,b,c'."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    labels = None
    if lines and lines[0].startswith("#points:"):
        raw = lines[0][len("#points:"):].strip()
        sep = "," if "," in raw else None
        labels = tuple(tok.strip() for tok in raw.split(sep))
        lines = lines[1:]
    rows = []
    for line in lines:
        rows.append([_parse_number(tok) for tok in line.split(",")])
    if not rows:
        raise FormatError(f"{path}: no matrix rows found")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise FormatError(f"{path}: matrix is not square")
    if labels is None:
        labels = tuple(range(n))
    elif len(labels) != n:
        raise FormatError(f"{path}: {len(labels)} labels for {n} rows")
    if n > size_cap():
        raise CapExceededError("distance matrix exceeds the size cap")
    integral = all(isinstance(v, int) for r in rows for v in r)
    d = np.array(rows, dtype=np.int64 if integral else np.float64)
    validate_metric(d, labels)
    return MetricWindow(GroundSet(labels), d, {"kind": "distance_matrix", "path": str(path)})


def restrict_window(window: MetricWindow, keep: Sequence) -> MetricWindow:
    """Sub-window on a subset of points (order preserved); depth is inherited."""
    idx = np.array([window.ground.index(p) for p in keep], dtype=int)
    sub = window.ground.restrict(keep)
    d = window.d[np.ix_(idx, idx)].copy()
    depth = window.depth[idx].copy() if window.depth is not None else None
    prov = dict(window.provenance)
    prov["restricted_to"] = len(keep)
    return MetricWindow(sub, d, prov, depth)


def threshold_entourage(window: MetricWindow, r) -> Entourage:
    """All pairs at distance at most r (normalized by construction)."""
    if r < 0:
        raise ScheduleError("thresholds must be nonnegative")
    return Entourage(window.ground, window.d <= r, normalized=True)


def threshold_schedule(window: MetricWindow, thresholds: Sequence) -> EntourageSchedule:
    """Nested schedule from a strictly increasing threshold list."""
    ts = list(thresholds)
    if not ts:
        raise ScheduleError("need at least one threshold")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ScheduleError("thresholds must be strictly increasing")
    stages = tuple(threshold_entourage(window, t) for t in ts)
    return EntourageSchedule(window.ground, stages, tuple(ts))

"""The four filtration flavors on a finite coarse window.

For a normalized entourage U there are two subset families: Vietoris-Rips
(all pairs inside U) and Cech (a common center sees every member inside U).
Each family yields a simplicial complex (finite member sets) and a truncated
simplicial set (tuples with entries in a common member, recorded by their
nondegenerate representatives).  Everything is capped in dimension; homology
in degree k only needs simplices up to dimension k + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Optional

import numpy as np

from .coarse import Entourage, GroundSet, compose_entourages

VIETORIS_RIPS = "vietoris_rips"
CECH = "cech"


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """A downward-closed family of simplices over an ordered ground set.

    Simplices are strictly increasing tuples of vertex indices, graded by
    dimension; ``simplices[k]`` is the frozenset of k-dimensional ones.
    The stored family is a complex in its own right: when it arises as a
    dimension-capped build, it is the cap-skeleton of the full object.
    """

    ground: GroundSet
    dim_cap: int
    simplices: tuple

    def __post_init__(self):
        if self.dim_cap < 0:
            raise ValueError("dim_cap must be nonnegative")
        object.__setattr__(self, "simplices", tuple(frozenset(s) for s in self.simplices))
        if len(self.simplices) != self.dim_cap + 1:
            raise ValueError("need one simplex layer per dimension 0..dim_cap")
        n = self.ground.size
        for k, layer in enumerate(self.simplices):
            for s in layer:
                if len(s) != k + 1:
                    raise ValueError(f"{s} stored at dimension {k}")
                if any(not 0 <= v < n for v in s):
                    raise ValueError(f"vertex index out of range in {s}")
                if any(b <= a for a, b in zip(s, s[1:])):
                    raise ValueError(f"simplex {s} is not strictly increasing")
                if k > 0:
                    lower = self.simplices[k - 1]
                    for i in range(k + 1):
                        if s[:i] + s[i + 1:] not in lower:
                            raise ValueError(f"face of {s} missing: not downward closed")

    @classmethod
    def from_simplices(cls, ground: GroundSet, simplices: Iterable[tuple], dim_cap: int,
                       close: bool = False) -> "SimplicialComplex":
        """Build from index tuples; ``close=True`` adds all faces up to dim_cap."""
        layers = [set() for _ in range(dim_cap + 1)]
        for s in simplices:
            t = tuple(sorted(set(s)))
            if len(t) - 1 > dim_cap:
                raise ValueError(f"simplex {t} exceeds dim_cap {dim_cap}")
            layers[len(t) - 1].add(t)
        if close:
            for k in range(dim_cap, 0, -1):
                for s in layers[k]:
                    for f in combinations(s, k):
                        layers[k - 1].add(f)
        return cls(ground, dim_cap, tuple(layers))

    @classmethod
    def from_token_simplices(cls, ground: GroundSet, simplices: Iterable[tuple], dim_cap: int,
                             close: bool = False) -> "SimplicialComplex":
        idx = (tuple(ground.index(p) for p in s) for s in simplices)
        return cls.from_simplices(ground, idx, dim_cap, close=close)

    @property
    def dim(self) -> int:
        """Top dimension with a stored simplex; -1 when empty."""
        for k in range(self.dim_cap, -1, -1):
            if self.simplices[k]:
                return k
        return -1

    @cached_property
    def counts(self) -> tuple:
        return tuple(len(layer) for layer in self.simplices)

    def __contains__(self, simplex) -> bool:
        t = tuple(sorted(set(simplex)))
        k = len(t) - 1
        return 0 <= k <= self.dim_cap and t in self.simplices[k]

    def basis(self, k: int) -> tuple:
        """Canonically sorted k-simplices (the chain basis in degree k)."""
        if not 0 <= k <= self.dim_cap:
            return ()
        return tuple(sorted(self.simplices[k]))

    @property
    def vertices(self) -> tuple:
        return tuple(sorted(v[0] for v in self.simplices[0]))

    @property
    def edges(self) -> tuple:
        return self.basis(1) if self.dim_cap >= 1 else ()

    def skeleton(self, k: int) -> "SimplicialComplex":
        k = min(k, self.dim_cap)
        return SimplicialComplex(self.ground, k, self.simplices[: k + 1])

    def token_simplex(self, s: tuple) -> tuple:
        return tuple(self.ground.points[v] for v in s)

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        """Token-wise containment (grounds may differ)."""
        for k, layer in enumerate(self.simplices):
            if not layer:
                continue
            if k > other.dim_cap:
                return False
            if self.ground.points == other.ground.points:
                if not layer <= other.simplices[k]:
                    return False
                continue
            for s in layer:
                try:
                    t = tuple(sorted(other.ground.index(p) for p in self.token_simplex(s)))
                except KeyError:
                    return False
                if t not in other.simplices[k]:
                    return False
        return True


@dataclass(frozen=True, eq=False)
class TruncatedSimplicialSet:
    """Nondegenerate tuple-simplices up to a dimension cap.

    ``tuples[k]`` holds the (k+1)-tuples of vertex indices with no two
    consecutive entries equal.  Degenerate tuples are implicit: normalized
    chains see exactly the stored family.
    """

    ground: GroundSet
    dim_cap: int
    tuples: tuple

    def __post_init__(self):
        if self.dim_cap < 0:
            raise ValueError("dim_cap must be nonnegative")
        object.__setattr__(self, "tuples", tuple(frozenset(layer) for layer in self.tuples))
        if len(self.tuples) != self.dim_cap + 1:
            raise ValueError("need one tuple layer per dimension 0..dim_cap")
        n = self.ground.size
        for k, layer in enumerate(self.tuples):
            for t in layer:
                if len(t) != k + 1:
                    raise ValueError(f"{t} stored at dimension {k}")
                if any(not 0 <= v < n for v in t):
                    raise ValueError(f"vertex index out of range in {t}")
                if any(a == b for a, b in zip(t, t[1:])):
                    raise ValueError(f"{t} has consecutive repeats")
        for k in range(1, self.dim_cap + 1):
            for t in self.tuples[k]:
                for i in range(k + 1):
                    f = self.face(t, i)
                    if f not in self.tuples[len(f) - 1]:
                        raise ValueError(f"face {f} of {t} missing: not closed under faces")

    @staticmethod
    def face(t: tuple, i: int) -> tuple:
        """Delete coordinate i, collapsing a newly created consecutive repeat."""
        out = t[:i] + t[i + 1:]
        if 0 < i < len(t) - 1 and t[i - 1] == t[i + 1]:
            out = out[:i] + out[i + 1:]
        return out

    @property
    def dim(self) -> int:
        for k in range(self.dim_cap, -1, -1):
            if self.tuples[k]:
                return k
        return -1

    @cached_property
    def counts(self) -> tuple:
        return tuple(len(layer) for layer in self.tuples)

    def __contains__(self, t) -> bool:
        t = tuple(t)
        k = len(t) - 1
        return 0 <= k <= self.dim_cap and t in self.tuples[k]

    def basis(self, k: int) -> tuple:
        if not 0 <= k <= self.dim_cap:
            return ()
        return tuple(sorted(self.tuples[k]))

    @property
    def edges(self) -> tuple:
        """Underlying undirected 1-skeleton as sorted vertex pairs."""
        if self.dim_cap < 1:
            return ()
        return tuple(sorted({tuple(sorted(t)) for t in self.tuples[1] if t[0] != t[1]}))


@dataclass(frozen=True)
class SubsetFamilyFlavor:
    """Membership predicate for subsets of the window at a fixed entourage."""

    kind: str
    entourage: Entourage

    def __post_init__(self):
        if self.kind not in (VIETORIS_RIPS, CECH):
            raise ValueError(f"unknown flavor kind {self.kind!r}")

    def admits(self, simplex: tuple) -> bool:
        """Whether the given vertex-index set belongs to the family."""
        m = self.entourage.pairs
        if self.kind == VIETORIS_RIPS:
            return all(m[a, b] for a in simplex for b in simplex)
        cols = m[:, simplex[0]].copy()
        for v in simplex[1:]:
            cols &= m[:, v]
        return bool(cols.any())


def _require_normalized(u: Entourage):
    if not u.normalized:
        raise ValueError("builder requires a normalized entourage")


def build_vr_complex(u: Entourage, dim_cap: int) -> SimplicialComplex:
    """Clique complex of the entourage graph, truncated at dim_cap.

    Expansion is ordered along the ground order: a simplex grows only by
    vertices above its maximum that neighbor all current members, so each
    clique is enumerated exactly once and the cap prunes the search.
    """
    _require_normalized(u)
    if dim_cap < 0:
        raise ValueError("dim_cap must be nonnegative")
    n = u.ground.size
    adj = u.pairs.copy()
    np.fill_diagonal(adj, False)
    layers = [set() for _ in range(dim_cap + 1)]
    layers[0] = {(v,) for v in range(n)}
    above = np.triu(np.ones((n, n), dtype=bool), k=1)
    frontier = [((v,), adj[v] & above[v]) for v in range(n)]
    for k in range(1, dim_cap + 1):
        nxt = []
        for simplex, cands in frontier:
            for w in np.nonzero(cands)[0]:
                s = simplex + (int(w),)
                layers[k].add(s)
                nxt.append((s, cands & adj[w] & above[w]))
        frontier = nxt
        if not frontier:
            break
    return SimplicialComplex(u.ground, dim_cap, tuple(layers))


def build_cech_complex(u: Entourage, dim_cap: int) -> SimplicialComplex:
    """Complex generated by the entourage balls, truncated at dim_cap.

    A set is a simplex iff some center (any window point, not necessarily a
    member) sees all its elements inside the entourage; enumeration is by
    centers with deduplication, and faces come for free since subsets of a
    ball stay in the ball.
    """
    _require_normalized(u)
    if dim_cap < 0:
        raise ValueError("dim_cap must be nonnegative")
    n = u.ground.size
    layers = [set() for _ in range(dim_cap + 1)]
    for center in range(n):
        ball = [int(v) for v in np.nonzero(u.pairs[center])[0]]
        for k in range(min(dim_cap, len(ball) - 1) + 1):
            layers[k].update(combinations(ball, k + 1))
    return SimplicialComplex(u.ground, dim_cap, tuple(layers))


def _family_sets(flavor: SubsetFamilyFlavor, dim_cap: int) -> SimplicialComplex:
    if flavor.kind == VIETORIS_RIPS:
        return build_vr_complex(flavor.entourage, dim_cap)
    return build_cech_complex(flavor.entourage, dim_cap)


def build_simpset(flavor: SubsetFamilyFlavor, dim_cap: int) -> TruncatedSimplicialSet:
    """Nondegenerate tuples supported on a member of the subset family.

    A (k+1)-tuple without consecutive repeats is a k-simplex iff its support
    belongs to the family; supports of capped tuples are exactly the simplices
    of the capped complex of the same family.
    """
    _require_normalized(flavor.entourage)
    if dim_cap < 0:
        raise ValueError("dim_cap must be nonnegative")
    sets = _family_sets(flavor, dim_cap)
    layers = [set() for _ in range(dim_cap + 1)]
    for size in range(1, dim_cap + 2):
        for support in sets.simplices[size - 1]:
            for k in range(size - 1, dim_cap + 1):
                for t in product(support, repeat=k + 1):
                    if any(a == b for a, b in zip(t, t[1:])):
                        continue
                    if len(set(t)) == size:
                        layers[k].add(t)
    return TruncatedSimplicialSet(flavor.entourage.ground, dim_cap, tuple(layers))


@dataclass(frozen=True)
class SandwichReport:
    """Outcome of the VR / Cech / VR-composed inclusion checks."""

    ok: bool
    violation: Optional[tuple] = None


def check_sandwich(u: Entourage, dim_cap: int) -> SandwichReport:
    """Verify VR_U <= Cech_U <= VR_{U o U} simplexwise, for both flavors."""
    _require_normalized(u)
    uu = compose_entourages(u, u)
    vr = build_vr_complex(u, dim_cap)
    cech = build_cech_complex(u, dim_cap)
    vr2 = build_vr_complex(uu, dim_cap)
    for k in range(dim_cap + 1):
        for s in sorted(vr.simplices[k] - cech.simplices[k]):
            return SandwichReport(False, ("complex", "vr_not_in_cech", s))
        for s in sorted(cech.simplices[k] - vr2.simplices[k]):
            return SandwichReport(False, ("complex", "cech_not_in_vr_composed", s))
    evr = build_simpset(SubsetFamilyFlavor(VIETORIS_RIPS, u), dim_cap)
    ecech = build_simpset(SubsetFamilyFlavor(CECH, u), dim_cap)
    evr2 = build_simpset(SubsetFamilyFlavor(VIETORIS_RIPS, uu), dim_cap)
    for k in range(dim_cap + 1):
        for t in sorted(evr.tuples[k] - ecech.tuples[k]):
            return SandwichReport(False, ("simpset", "vr_not_in_cech", t))
        for t in sorted(ecech.tuples[k] - evr2.tuples[k]):
            return SandwichReport(False, ("simpset", "cech_not_in_vr_composed", t))
    return SandwichReport(True)

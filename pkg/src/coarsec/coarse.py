"""Finite coarse spaces: ground sets, entourages, schedules, and point maps.

An entourage is a reflexive relation on a finite ground set, stored as a dense
boolean matrix so that composition is a boolean matrix product.  A schedule is
a nested increasing family of entourages and stands in for a coarse structure
at desk scale; every verdict produced from a schedule is a verdict "on window".
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import GroundMismatchError, ScheduleError

logger = logging.getLogger("coarsec.coarse")

Point = Hashable


@dataclass(frozen=True)
class GroundSet:
    """An ordered finite set of opaque point identifiers.

    The list order is the strict total order used everywhere downstream,
    in particular as the vertex order of the least-vertex retraction on
    barycentric subdivisions.
    """

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(set(self.points)) != len(self.points):
            raise ValueError("ground set identifiers must be pairwise distinct")

    @cached_property
    def _index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    @property
    def size(self) -> int:
        return len(self.points)

    def index(self, point) -> int:
        return self._index[point]

    def __contains__(self, point) -> bool:
        return point in self._index

    def __len__(self) -> int:
        return len(self.points)

    def restrict(self, keep: Sequence[Point]) -> "GroundSet":
        """Subset ground set; `keep` must preserve the ambient order."""
        idx = [self._index[p] for p in keep]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("restriction must preserve the ground order")
        return GroundSet(tuple(keep))


def _freeze(mat: np.ndarray) -> np.ndarray:
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True, eq=False)
class Entourage:
    """A reflexive relation on a ground set.

    ``normalized`` records whether the relation is known symmetric (the state
    produced by :func:`normalize_entourage`).  The diagonal is present in every
    entourage; ingestion adds it when missing.
    """

    ground: GroundSet
    pairs: np.ndarray
    normalized: bool

    def __post_init__(self):
        n = self.ground.size
        if self.pairs.shape != (n, n) or self.pairs.dtype != np.bool_:
            raise ValueError("pairs must be an (n, n) boolean matrix")
        if not self.pairs.diagonal().all():
            raise ValueError("an entourage must contain the diagonal; "
                             "ingest raw relations through from_matrix or from_pairs")
        _freeze(self.pairs)

    @classmethod
    def from_matrix(cls, ground: GroundSet, mat: np.ndarray) -> "Entourage":
        """Ingest a raw relation matrix.  The diagonal is added silently."""
        m = np.array(mat, dtype=bool)
        if not m.diagonal().all():
            logger.warning("entourage ingested without full diagonal; adding it")
            m = m.copy()
            np.fill_diagonal(m, True)
        return cls(ground, m, normalized=bool(np.array_equal(m, m.T)))

    @classmethod
    def from_pairs(cls, ground: GroundSet, pairs: Iterable[tuple]) -> "Entourage":
        n = ground.size
        m = np.zeros((n, n), dtype=bool)
        for a, b in pairs:
            m[ground.index(a), ground.index(b)] = True
        return cls.from_matrix(ground, m)

    @classmethod
    def diagonal(cls, ground: GroundSet) -> "Entourage":
        return cls(ground, _freeze(np.eye(ground.size, dtype=bool)), normalized=True)

    @classmethod
    def full(cls, ground: GroundSet) -> "Entourage":
        return cls(ground, _freeze(np.ones((ground.size, ground.size), dtype=bool)), normalized=True)

    def has(self, a, b) -> bool:
        return bool(self.pairs[self.ground.index(a), self.ground.index(b)])

    def is_subset_of(self, other: "Entourage") -> bool:
        _require_same_ground(self.ground, other.ground)
        return bool(np.all(other.pairs | ~self.pairs))

    def transpose(self) -> "Entourage":
        return Entourage(self.ground, _freeze(self.pairs.T.copy()), self.normalized)

    @property
    def pair_count(self) -> int:
        return int(self.pairs.sum())

    def restrict(self, sub: GroundSet) -> "Entourage":
        """Restriction to a sub-ground-set (tokens of `sub` must exist here)."""
        idx = np.array([self.ground.index(p) for p in sub.points], dtype=int)
        m = self.pairs[np.ix_(idx, idx)].copy()
        return Entourage(sub, _freeze(m), self.normalized)


def _require_same_ground(a: GroundSet, b: GroundSet):
    if a is not b and a.points != b.points:
        raise GroundMismatchError("operands live on different ground sets")


def same_pairs(u: Entourage, v: Entourage) -> bool:
    _require_same_ground(u.ground, v.ground)
    return bool(np.array_equal(u.pairs, v.pairs))


def compose_pair_matrices(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Relation composition: (x, z) related iff some y has (x, y) in a, (y, z) in b."""
    return (a.astype(np.uint8) @ b.astype(np.uint8)) > 0


def compose_entourages(u: Entourage, v: Entourage) -> Entourage:
    """Compose two entourages on a shared ground set.

    The result is re-normalized (symmetrized; the diagonal is automatic) only
    when both inputs are normalized; otherwise the raw composition is returned
    with the normalization flag cleared.
    """
    _require_same_ground(u.ground, v.ground)
    m = compose_pair_matrices(u.pairs, v.pairs)
    if u.normalized and v.normalized:
        m |= m.T
        np.fill_diagonal(m, True)
        return Entourage(u.ground, _freeze(m), normalized=True)
    return Entourage(u.ground, _freeze(m), normalized=False)


def normalize_entourage(u: Entourage, strict: bool = False) -> Entourage:
    """Symmetrize and add the diagonal.

    Default is the union form u | u^T; ``strict=True`` uses the intersection
    u & u^T instead.  Both are idempotent.
    """
    m = (u.pairs & u.pairs.T) if strict else (u.pairs | u.pairs.T)
    m = m.copy()
    np.fill_diagonal(m, True)
    return Entourage(u.ground, _freeze(m), normalized=True)


@dataclass(frozen=True, eq=False)
class PointMap:
    """A total map between ground sets, stored as images aligned with the source order."""

    source: GroundSet
    target: GroundSet
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.source.size:
            raise ValueError("images must assign one target point per source point")
        for p in self.images:
            if p not in self.target:
                raise ValueError(f"image {p!r} is not a target point")

    @classmethod
    def from_mapping(cls, source: GroundSet, target: GroundSet, mapping: Mapping) -> "PointMap":
        return cls(source, target, tuple(mapping[p] for p in source.points))

    @classmethod
    def from_callable(cls, source: GroundSet, target: GroundSet, fn: Callable) -> "PointMap":
        return cls(source, target, tuple(fn(p) for p in source.points))

    @classmethod
    def identity(cls, ground: GroundSet) -> "PointMap":
        return cls(ground, ground, ground.points)

    @classmethod
    def inclusion(cls, sub: GroundSet, sup: GroundSet) -> "PointMap":
        return cls(sub, sup, sub.points)

    @cached_property
    def image_index(self) -> np.ndarray:
        return np.array([self.target.index(p) for p in self.images], dtype=int)

    def __call__(self, point):
        return self.images[self.source.index(point)]

    def after(self, inner: "PointMap") -> "PointMap":
        """self o inner."""
        if inner.target.points != self.source.points:
            raise GroundMismatchError("composition domain mismatch")
        return PointMap(inner.source, self.target, tuple(self(p) for p in inner.images))

    def push(self, pairs: np.ndarray) -> np.ndarray:
        """(f x f) applied to a relation matrix on the source; raw target matrix."""
        rows, cols = np.nonzero(pairs)
        out = np.zeros((self.target.size, self.target.size), dtype=bool)
        idx = self.image_index
        out[idx[rows], idx[cols]] = True
        return out

    def push_entourage(self, u: Entourage) -> np.ndarray:
        _require_same_ground(u.ground, self.source)
        return self.push(u.pairs)


@dataclass(frozen=True, eq=False)
class EntourageSchedule:
    """A nested increasing family of normalized entourages, indexed 1..m.

    Stage labels are for reporting only (threshold values when built from a
    metric, plain positions otherwise).
    """

    ground: GroundSet
    stages: tuple
    labels: tuple

    def __post_init__(self):
        if not self.stages:
            raise ScheduleError("schedule needs at least one stage")
        if len(self.labels) != len(self.stages):
            raise ScheduleError("one label per stage required")
        for u in self.stages:
            _require_same_ground(u.ground, self.ground)
            if not u.normalized:
                raise ScheduleError("every schedule stage must be normalized")
        for k, (a, b) in enumerate(zip(self.stages, self.stages[1:]), start=1):
            if not a.is_subset_of(b):
                raise ScheduleError(f"schedule not nested between stages {k} and {k + 1}")

    @classmethod
    def from_entourages(cls, stages: Sequence[Entourage], labels=None) -> "EntourageSchedule":
        stages = tuple(stages)
        if labels is None:
            labels = tuple(range(1, len(stages) + 1))
        return cls(stages[0].ground, stages, tuple(labels))

    def __len__(self) -> int:
        return len(self.stages)

    def stage(self, index: int) -> Entourage:
        """1-based stage access."""
        if not 1 <= index <= len(self.stages):
            raise IndexError(f"stage index {index} outside 1..{len(self.stages)}")
        return self.stages[index - 1]

    def least_stage_containing(self, pairs: np.ndarray, start: int = 1) -> Optional[int]:
        """Least 1-based stage whose entourage contains the given relation, else None."""
        for j in range(start, len(self.stages) + 1):
            if bool(np.all(self.stages[j - 1].pairs | ~pairs)):
                return j
        return None

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.ground.points).encode())
        h.update(repr(self.labels).encode())
        for u in self.stages:
            h.update(np.packbits(u.pairs).tobytes())
        return h.hexdigest()

    def restrict(self, sub: GroundSet) -> "EntourageSchedule":
        return EntourageSchedule(sub, tuple(u.restrict(sub) for u in self.stages), self.labels)


@dataclass(frozen=True)
class BornologousReport:
    """Per-stage least witness stages for (f x f)(U_i) inclusion, 1-based; None if absent."""

    table: tuple
    bornologous: bool


def check_bornologous(f: PointMap, src: EntourageSchedule, tgt: EntourageSchedule) -> BornologousReport:
    """For each source stage, the least target stage containing its image."""
    _require_same_ground(f.source, src.ground)
    _require_same_ground(f.target, tgt.ground)
    table = []
    for u in src.stages:
        table.append(tgt.least_stage_containing(f.push(u.pairs)))
    return BornologousReport(tuple(table), all(j is not None for j in table))


def check_close(f: PointMap, g: PointMap, w: Entourage) -> bool:
    """True iff every pair (f(x), g(x)) lies in w and in its transpose."""
    if f.source.points != g.source.points or f.target.points != g.target.points:
        raise GroundMismatchError("close-maps test needs a shared source and target")
    _require_same_ground(w.ground, f.target)
    fi, gi = f.image_index, g.image_index
    return bool(np.all(w.pairs[fi, gi]) and np.all(w.pairs[gi, fi]))


@dataclass(frozen=True)
class RetractReport:
    retract: bool
    closeness_stage: Optional[int]
    inclusion_bornologous: BornologousReport
    retraction_bornologous: BornologousReport
    equivalence: Optional[bool] = None
    closeness_stage_x: Optional[int] = None


def check_coarse_retract(
    inclusion: PointMap,
    retraction: PointMap,
    xs: EntourageSchedule,
    ys: EntourageSchedule,
    equivalence: bool = False,
) -> RetractReport:
    """Certify a coarse retract on the given schedule window.

    ``inclusion`` maps Y into X and ``retraction`` maps X back; the verdict
    holds iff both are bornologous on-window and the round trip is close to
    the identity at some stage of ``ys``.  With ``equivalence=True`` the other
    round trip is also checked against ``xs``.
    """
    _require_same_ground(inclusion.source, ys.ground)
    _require_same_ground(inclusion.target, xs.ground)
    _require_same_ground(retraction.source, xs.ground)
    _require_same_ground(retraction.target, ys.ground)
    binc = check_bornologous(inclusion, ys, xs)
    bret = check_bornologous(retraction, xs, ys)
    round_trip = retraction.after(inclusion)
    ident = PointMap.identity(ys.ground)
    closeness = None
    for j in range(1, len(ys) + 1):
        if check_close(ident, round_trip, ys.stage(j)):
            closeness = j
            break
    report = RetractReport(
        retract=binc.bornologous and bret.bornologous and closeness is not None,
        closeness_stage=closeness,
        inclusion_bornologous=binc,
        retraction_bornologous=bret,
    )
    if not equivalence:
        return report
    other = inclusion.after(retraction)
    ident_x = PointMap.identity(xs.ground)
    closeness_x = None
    for j in range(1, len(xs) + 1):
        if check_close(ident_x, other, xs.stage(j)):
            closeness_x = j
            break
    return RetractReport(
        retract=report.retract,
        closeness_stage=closeness,
        inclusion_bornologous=binc,
        retraction_bornologous=bret,
        equivalence=report.retract and closeness_x is not None,
        closeness_stage_x=closeness_x,
    )

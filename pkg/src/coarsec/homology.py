"""Chain complexes, Betti numbers, and induced maps along inclusions and simplicial maps.

Complexes use simplicial chains; truncated simplicial sets use normalized
chains (nondegenerate tuples only, faces that become degenerate are dropped).
Boundary matrices are stored over the integers once and reduced modulo p on
use, so the same representation serves F_2, F_p, and Z.

Homotopy groups are certified by proxy: pi_0 exactly by union-find, pi_1
semi-decidably by a bounded filling search (positive certificates only), and
everything else through homology.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .complexes import SimplicialComplex, TruncatedSimplicialSet
from .errors import CoarsecError, PreconditionError
from .subdivision import SimplicialMap

Space = Union[SimplicialComplex, TruncatedSimplicialSet]


# ---------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True)
class Coefficients:
    """Coefficient system: a prime p for F_p, or None for the integers."""

    p: Optional[int]

    def __post_init__(self):
        if self.p is not None:
            if self.p < 2 or any(self.p % q == 0 for q in range(2, int(self.p ** 0.5) + 1)):
                raise ValueError(f"{self.p} is not prime")

    @classmethod
    def parse(cls, text: str) -> "Coefficients":
        text = text.strip().lower()
        if text == "z":
            return cls(None)
        if text == "z2":
            return cls(2)
        if text.startswith("zp:"):
            return cls(int(text[3:]))
        raise ValueError(f"unknown coefficient system {text!r}")

    def __str__(self) -> str:
        if self.p is None:
            return "z"
        if self.p == 2:
            return "z2"
        return f"zp:{self.p}"

    @property
    def is_field(self) -> bool:
        return self.p is not None


Z2 = Coefficients(2)
Z = Coefficients(None)


# ---------------------------------------------------------------------------
# chain complexes


def _sort_sign(seq: Sequence[int]):
    """Sorted tuple plus permutation sign; sign 0 when entries collide."""
    if len(set(seq)) != len(seq):
        return tuple(sorted(seq)), 0
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return tuple(sorted(seq)), sign


@dataclass(frozen=True, eq=False)
class ChainComplexRep:
    """Bases and integer boundary matrices of a space, one per degree.

    ``boundary[k]`` maps degree-k chains to degree-(k-1) chains; the degree-0
    boundary is the empty matrix.  Basis order is canonical (sorted), so all
    matrices are reproducible.
    """

    space: Space
    coeff: Coefficients
    bases: tuple
    boundaries: tuple

    @property
    def dim_cap(self) -> int:
        return self.space.dim_cap

    def basis_index(self, k: int) -> dict:
        return {s: i for i, s in enumerate(self.bases[k])}

    def degree_size(self, k: int) -> int:
        if not 0 <= k <= self.dim_cap:
            return 0
        return len(self.bases[k])


def _complex_boundary(basis_lo: dict, basis_hi: Sequence[tuple]) -> np.ndarray:
    mat = np.zeros((len(basis_lo), len(basis_hi)), dtype=np.int8)
    for col, s in enumerate(basis_hi):
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            mat[basis_lo[face], col] = 1 if i % 2 == 0 else -1
    return mat


def _simpset_boundary(basis_lo: dict, basis_hi: Sequence[tuple]) -> np.ndarray:
    mat = np.zeros((len(basis_lo), len(basis_hi)), dtype=np.int8)
    for col, t in enumerate(basis_hi):
        for i in range(len(t)):
            face = t[:i] + t[i + 1:]
            if any(a == b for a, b in zip(face, face[1:])):
                continue
            sign = 1 if i % 2 == 0 else -1
            mat[basis_lo[face], col] += sign
    return mat


def chain_complex(space: Space, coeff: Coefficients = Z2) -> ChainComplexRep:
    """Build the (normalized, for simplicial sets) chain complex of a space."""
    cap = space.dim_cap
    bases = tuple(space.basis(k) for k in range(cap + 1))
    mats = [np.zeros((0, len(bases[0])), dtype=np.int8)]
    builder = _simpset_boundary if isinstance(space, TruncatedSimplicialSet) else _complex_boundary
    for k in range(1, cap + 1):
        lo = {s: i for i, s in enumerate(bases[k - 1])}
        mats.append(builder(lo, bases[k]))
    for k in range(2, cap + 1):
        prod = mats[k - 1].astype(np.int64) @ mats[k].astype(np.int64)
        if prod.size and np.any(prod):
            raise CoarsecError(f"boundary of boundary nonzero in degree {k}")
    return ChainComplexRep(space, coeff, bases, tuple(mats))


def reported_degrees(space: Space) -> range:
    """Degrees whose homology the truncation supports: 0 .. min(dim_cap - 1, dim)."""
    return range(0, min(space.dim_cap - 1, space.dim) + 1)


# ---------------------------------------------------------------------------
# linear algebra over F_p


def rref_mod(M: np.ndarray, p: int):
    """Reduced row echelon form mod p; returns (R, pivot column list)."""
    R = np.mod(M.astype(np.int64), p)
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        R[r] = (R[r] * pow(int(R[r, c]), p - 2, p)) % p
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        if others.size:
            R[others] = (R[others] - np.outer(R[others, c], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank_mod(M: np.ndarray, p: int) -> int:
    if M.size == 0:
        return 0
    return len(rref_mod(M, p)[1])


def nullspace_mod(M: np.ndarray, p: int) -> np.ndarray:
    """Columns form a basis of the kernel of M over F_p."""
    rows, cols = M.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    R, pivots = rref_mod(M, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, fc in enumerate(free):
        basis[fc, j] = 1
        for ri, pc in enumerate(pivots):
            basis[pc, j] = (-int(R[ri, fc])) % p
    return basis


class Echelon:
    """Incremental column echelon over F_p with homology-class bookkeeping.

    Feed boundary columns first, then candidate generator cycles; afterwards
    ``classify`` expresses any cycle in the surviving generators.
    """

    def __init__(self, p: int):
        self.p = p
        self.pivots = {}
        self.ngens = 0

    def _reduce(self, v: np.ndarray, acc: Optional[dict]):
        p = self.p
        v = np.mod(v.astype(np.int64), p)
        while True:
            nz = np.nonzero(v)[0]
            if nz.size == 0:
                return v, -1
            lead = int(nz[0])
            hit = self.pivots.get(lead)
            if hit is None:
                return v, lead
            pv, pcoords = hit
            f = int(v[lead])
            v = np.mod(v - f * pv, p)
            if acc is not None and pcoords:
                for j, c in pcoords.items():
                    acc[j] = (acc.get(j, 0) + f * c) % p

    def add(self, v: np.ndarray, generator: bool = False) -> bool:
        """Insert a column; True iff it enlarged the span."""
        acc: Optional[dict] = {} if generator else None
        residue, lead = self._reduce(v, acc)
        if lead < 0:
            return False
        inv = pow(int(residue[lead]), self.p - 2, self.p)
        pv = np.mod(residue * inv, self.p)
        coords: dict = {}
        if generator:
            coords[self.ngens] = inv % self.p
            for j, c in acc.items():
                coords[j] = (coords.get(j, 0) - inv * c) % self.p
            coords = {j: c for j, c in coords.items() if c}
            self.ngens += 1
        self.pivots[lead] = (pv, coords)
        return True

    def in_span(self, v: np.ndarray) -> bool:
        residue, lead = self._reduce(v, None)
        return lead < 0

    def classify(self, v: np.ndarray) -> Optional[np.ndarray]:
        """Generator coordinates of a vector in the span, else None."""
        acc: dict = {}
        residue, lead = self._reduce(v, acc)
        if lead >= 0:
            return None
        out = np.zeros(self.ngens, dtype=np.int64)
        for j, c in acc.items():
            out[j] = c % self.p
        return out


def homology_generators_mod(cc: ChainComplexRep, k: int, p: int):
    """Representative cycles of H_k over F_p plus the classifying echelon.

    The echelon is seeded with the boundary columns, so generator numbering
    refers only to classes that survive.
    """
    n_k = cc.degree_size(k)
    ech = Echelon(p)
    if k + 1 <= cc.dim_cap:
        for col in cc.boundaries[k + 1].T:
            ech.add(col, generator=False)
    reps = []
    if n_k:
        kernel = nullspace_mod(cc.boundaries[k], p)
        for col in kernel.T:
            if ech.add(col, generator=True):
                reps.append(np.mod(col, p))
    return reps, ech


# ---------------------------------------------------------------------------
# integer linear algebra (Smith normal form)


def smith_normal_form(A: Sequence[Sequence[int]], shape=None):
    """Smith normal form with transforms: returns (D, S, S_inv, T) with D = S A T."""
    D = [list(map(int, row)) for row in A]
    if shape is not None:
        m, n = shape
    else:
        m = len(D)
        n = len(D[0]) if m else 0
    S = [[int(i == j) for j in range(m)] for i in range(m)]
    S_inv = [[int(i == j) for j in range(m)] for i in range(m)]
    T = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_swap(i, j):
        D[i], D[j] = D[j], D[i]
        S[i], S[j] = S[j], S[i]
        for r in range(m):
            S_inv[r][i], S_inv[r][j] = S_inv[r][j], S_inv[r][i]

    def row_add(i, j, c):
        # row i += c * row j
        D[i] = [a + c * b for a, b in zip(D[i], D[j])]
        S[i] = [a + c * b for a, b in zip(S[i], S[j])]
        for r in range(m):
            S_inv[r][j] -= c * S_inv[r][i]

    def row_neg(i):
        D[i] = [-a for a in D[i]]
        S[i] = [-a for a in S[i]]
        for r in range(m):
            S_inv[r][i] = -S_inv[r][i]

    def col_swap(i, j):
        for r in range(m):
            D[r][i], D[r][j] = D[r][j], D[r][i]
        for r in range(n):
            T[r][i], T[r][j] = T[r][j], T[r][i]

    def col_add(i, j, c):
        # column i += c * column j
        for r in range(m):
            D[r][i] += c * D[r][j]
        for r in range(n):
            T[r][i] += c * T[r][j]

    def move_min_pivot(t) -> bool:
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = abs(D[i][j])
                if v and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            return False
        _, i, j = best
        if i != t:
            row_swap(i, t)
        if j != t:
            col_swap(j, t)
        return True

    t = 0
    while t < min(m, n):
        if not move_min_pivot(t):
            break
        while True:
            dirty = True
            while dirty:
                dirty = False
                for i in range(t + 1, m):
                    if D[i][t]:
                        q = D[i][t] // D[t][t]
                        row_add(i, t, -q)
                        if D[i][t]:
                            row_swap(i, t)
                            dirty = True
                for j in range(t + 1, n):
                    if D[t][j]:
                        q = D[t][j] // D[t][t]
                        col_add(j, t, -q)
                        if D[t][j]:
                            col_swap(j, t)
                            dirty = True
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if D[i][j] % D[t][t]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_add(t, bad, 1)
        if D[t][t] < 0:
            row_neg(t)
        t += 1
    return D, S, S_inv, T


@dataclass(frozen=True, eq=False)
class SmithDecomposition:
    D: tuple
    S: tuple
    S_inv: tuple
    T: tuple
    shape: tuple

    @classmethod
    def of(cls, A: np.ndarray) -> "SmithDecomposition":
        m, n = A.shape
        rows = [[int(v) for v in A[i]] for i in range(m)]
        D, S, S_inv, T = smith_normal_form(rows, shape=(m, n))
        return cls(tuple(map(tuple, D)), tuple(map(tuple, S)), tuple(map(tuple, S_inv)),
                   tuple(map(tuple, T)), (m, n))

    @property
    def invariants(self) -> tuple:
        m, n = self.shape
        out = []
        for i in range(min(m, n)):
            if self.D[i][i]:
                out.append(self.D[i][i])
        return tuple(out)

    @property
    def rank(self) -> int:
        return len(self.invariants)

    def solve(self, b: Sequence[int]) -> Optional[list]:
        """Integer solution x of A x = b, or None."""
        m, n = self.shape
        sb = [sum(self.S[i][j] * int(b[j]) for j in range(m)) for i in range(m)]
        r = self.rank
        y = [0] * n
        for i in range(m):
            if i < r:
                d = self.D[i][i]
                if sb[i] % d:
                    return None
                if i < n:
                    y[i] = sb[i] // d
            elif sb[i]:
                return None
        return [sum(self.T[i][j] * y[j] for j in range(n)) for i in range(n)]

    def kernel_basis(self) -> list:
        """Columns of T past the rank span the integer kernel."""
        m, n = self.shape
        r = self.rank
        return [[self.T[i][j] for i in range(n)] for j in range(r, n)]


class IntegerHomology:
    """H_k over Z with generators, orders (0 = free), and class coordinates."""

    def __init__(self, cc: ChainComplexRep, k: int):
        n_k = cc.degree_size(k)
        snf_k = SmithDecomposition.of(cc.boundaries[k].astype(np.int64))
        kernel = snf_k.kernel_basis()  # list of length-n_k vectors
        z = len(kernel)
        self._kernel = kernel
        self._kmat = np.array(kernel, dtype=np.int64).T.reshape(n_k, z)
        self._kernel_snf = SmithDecomposition.of(self._kmat) if z else None
        cols = []
        if k + 1 <= cc.dim_cap:
            for col in cc.boundaries[k + 1].astype(np.int64).T:
                u = self._kernel_coords([int(v) for v in col])
                if u is None:
                    raise CoarsecError("boundary column outside cycle lattice")
                cols.append(u)
        image = np.array(cols, dtype=np.int64).T.reshape(z, len(cols))
        self._ysnf = SmithDecomposition.of(image)
        r = self._ysnf.rank
        invariants = self._ysnf.invariants
        keep = [i for i, d in enumerate(invariants) if d != 1] + list(range(r, z))
        self.orders = tuple([d for d in invariants if d != 1] + [0] * (z - r))
        s_inv = self._ysnf.S_inv
        gens = []
        for i in keep:
            coeffs = np.array([s_inv[row][i] for row in range(z)], dtype=np.int64)
            gens.append(self._kmat @ coeffs if z else np.zeros(n_k, dtype=np.int64))
        self.generators = gens
        self._keep = keep
        self._z = z

    def _kernel_coords(self, chain) -> Optional[list]:
        if not self._kernel:
            return [] if not any(chain) else None
        return self._kernel_snf.solve(chain)

    @property
    def betti(self) -> int:
        return sum(1 for d in self.orders if d == 0)

    @property
    def torsion(self) -> tuple:
        return tuple(d for d in self.orders if d > 1)

    def classify(self, chain) -> Optional[np.ndarray]:
        """Coordinates of a cycle in the kept generators, reduced mod orders."""
        u = self._kernel_coords(list(map(int, chain)))
        if u is None:
            return None
        z = self._z
        S = self._ysnf.S
        v = [sum(S[i][j] * u[j] for j in range(z)) for i in range(z)]
        out = []
        for idx, d in zip(self._keep, self.orders):
            c = v[idx]
            out.append(c % d if d else c)
        return np.array(out, dtype=np.int64)

    def is_trivial_class(self, chain) -> bool:
        coords = self.classify(chain)
        if coords is None:
            raise CoarsecError("chain is not a cycle on the window")
        return not np.any(coords)


# ---------------------------------------------------------------------------
# Betti numbers


def compute_betti(space: Space, coeff: Coefficients = Z2, with_torsion: bool = False):
    """Betti numbers in degrees 0 .. min(dim_cap - 1, dim).

    Over Z, ``with_torsion=True`` returns (betti, torsion orders) pairs; the
    torsion orders are the elementary divisors of the next boundary matrix.
    """
    if with_torsion and coeff.is_field:
        raise ValueError("torsion is only reported over Z")
    cc = chain_complex(space, coeff)
    degs = reported_degrees(space)
    out = []
    for k in degs:
        n_k = cc.degree_size(k)
        if coeff.is_field:
            p = coeff.p
            beta = n_k - rank_mod(cc.boundaries[k], p) - rank_mod(cc.boundaries[k + 1], p)
            out.append(beta)
        else:
            snf_lo = SmithDecomposition.of(cc.boundaries[k].astype(np.int64))
            snf_hi = SmithDecomposition.of(cc.boundaries[k + 1].astype(np.int64))
            beta = n_k - snf_lo.rank - snf_hi.rank
            torsion = tuple(d for d in snf_hi.invariants if d > 1)
            out.append((beta, torsion) if with_torsion else beta)
    return out


# ---------------------------------------------------------------------------
# induced maps


@dataclass(frozen=True)
class Inclusion:
    """Token-wise inclusion of one space into another of the same kind."""

    source: Space
    target: Space

    def __post_init__(self):
        if isinstance(self.source, SimplicialComplex) != isinstance(self.target, SimplicialComplex):
            raise ValueError("inclusion endpoints must be of the same kind")


def _sparse_chain(basis: Sequence[tuple], vec) -> tuple:
    return tuple((basis[i], int(c)) for i, c in enumerate(vec) if c)


@dataclass(frozen=True)
class HomologyMap:
    """Matrix of an induced map on degree-k homology.

    Rows are target classes, columns source classes.  Over Z the entries in a
    torsion row are reduced modulo that row's order (``target_orders``).
    """

    degree: int
    coeff: str
    source_classes: tuple
    target_classes: tuple
    matrix: tuple
    target_orders: Optional[tuple] = None

    @property
    def is_zero(self) -> bool:
        return all(not e for row in self.matrix for e in row)

    @property
    def shape(self) -> tuple:
        return (len(self.target_classes), len(self.source_classes))


def _vertex_index_map(src_ground, tgt_ground) -> np.ndarray:
    return np.array([tgt_ground.index(p) for p in src_ground.points], dtype=int)


def chain_map_matrix(m: Union[SimplicialMap, Inclusion], src_cc: ChainComplexRep,
                     tgt_cc: ChainComplexRep, k: int) -> np.ndarray:
    """Integer matrix of the degree-k chain map."""
    src_basis = src_cc.bases[k] if k <= src_cc.dim_cap else ()
    tgt_index = tgt_cc.basis_index(k) if k <= tgt_cc.dim_cap else {}
    mat = np.zeros((tgt_cc.degree_size(k), len(src_basis)), dtype=np.int64)
    if isinstance(m, Inclusion):
        remap = _vertex_index_map(m.source.ground, m.target.ground)
        for col, s in enumerate(src_basis):
            image = tuple(int(remap[v]) for v in s)
            mat[tgt_index[image], col] = 1
        return mat
    images = m.vertex_images
    if isinstance(src_cc.space, TruncatedSimplicialSet):
        raise ValueError("simplicial maps of tuple spaces are not supported; use Inclusion")
    for col, s in enumerate(src_basis):
        mapped = [images[v] for v in s]
        image, sign = _sort_sign(mapped)
        if sign == 0:
            continue
        mat[tgt_index[image], col] = sign
    return mat


def induced_homology_map(m: Union[SimplicialMap, Inclusion], k: int,
                         coeff: Coefficients = Z2) -> HomologyMap:
    """Matrix of H_k(source) -> H_k(target) for an inclusion or simplicial map."""
    src_space = m.source
    tgt_space = m.target
    src_cc = chain_complex(src_space, coeff)
    tgt_cc = chain_complex(tgt_space, coeff)
    fk = chain_map_matrix(m, src_cc, tgt_cc, k)
    if coeff.is_field:
        p = coeff.p
        src_reps, _ = homology_generators_mod(src_cc, k, p)
        tgt_reps, tgt_ech = homology_generators_mod(tgt_cc, k, p)
        cols = []
        for rep in src_reps:
            image = np.mod(fk @ rep, p)
            coords = tgt_ech.classify(image)
            if coords is None:
                raise CoarsecError("image of a cycle is not a cycle; map is not simplicial")
            cols.append(coords)
        matrix = tuple(tuple(int(c[i]) for c in cols) for i in range(len(tgt_reps)))
        return HomologyMap(
            degree=k,
            coeff=str(coeff),
            source_classes=tuple(_sparse_chain(src_cc.bases[k], r) for r in src_reps),
            target_classes=tuple(_sparse_chain(tgt_cc.bases[k], r) for r in tgt_reps),
            matrix=matrix,
        )
    src_h = IntegerHomology(src_cc, k)
    tgt_h = IntegerHomology(tgt_cc, k)
    cols = []
    for gen in src_h.generators:
        image = fk @ gen
        coords = tgt_h.classify(image)
        if coords is None:
            raise CoarsecError("image of a cycle is not a cycle; map is not simplicial")
        cols.append(coords)
    matrix = tuple(tuple(int(c[i]) for c in cols) for i in range(len(tgt_h.generators)))
    return HomologyMap(
        degree=k,
        coeff=str(coeff),
        source_classes=tuple(_sparse_chain(src_cc.bases[k], g) for g in src_h.generators),
        target_classes=tuple(_sparse_chain(tgt_cc.bases[k], g) for g in tgt_h.generators),
        matrix=matrix,
        target_orders=tgt_h.orders,
    )


# ---------------------------------------------------------------------------
# tuple-flavor to subset-flavor comparison


@dataclass(frozen=True)
class ComparisonDegree:
    degree: int
    betti_tuples: int
    betti_sets: int
    isomorphism: bool
    method: str


@dataclass(frozen=True)
class ComparisonReport:
    chain_map_ok: bool
    degrees: tuple

    @property
    def all_isomorphisms(self) -> bool:
        return all(d.isomorphism for d in self.degrees)


def simpset_complex_comparison(tuples: TruncatedSimplicialSet, sets: SimplicialComplex,
                               coeff: Coefficients = Z2) -> ComparisonReport:
    """Flatten tuple chains onto set chains and certify the homology comparison.

    A tuple with distinct entries maps to its sorted support with the sign of
    the sorting permutation; tuples with a repeated entry map to zero.  The
    result is a chain map and induces isomorphisms on homology in every
    reported degree; both facts are verified, not assumed.
    """
    if tuples.ground.points != sets.ground.points:
        raise PreconditionError("comparison requires the complex of the same family")
    e_cc = chain_complex(tuples, coeff)
    c_cc = chain_complex(sets, coeff)
    cap = min(tuples.dim_cap, sets.dim_cap)
    phi = []
    for k in range(cap + 1):
        tgt_index = c_cc.basis_index(k)
        mat = np.zeros((c_cc.degree_size(k), e_cc.degree_size(k)), dtype=np.int64)
        for col, t in enumerate(e_cc.bases[k]):
            image, sign = _sort_sign(t)
            if sign == 0:
                continue
            mat[tgt_index[image], col] = sign
        phi.append(mat)
    chain_ok = True
    for k in range(1, cap + 1):
        lhs = c_cc.boundaries[k].astype(np.int64) @ phi[k]
        rhs = phi[k - 1] @ e_cc.boundaries[k].astype(np.int64)
        if lhs.shape != rhs.shape or (lhs.size and not np.array_equal(lhs, rhs)):
            chain_ok = False
            break
    degrees = []
    degs = range(0, min(cap - 1, max(tuples.dim, sets.dim)) + 1)
    if coeff.is_field:
        p = coeff.p
        for k in degs:
            src_reps, _ = homology_generators_mod(e_cc, k, p)
            tgt_reps, tgt_ech = homology_generators_mod(c_cc, k, p)
            cols = [tgt_ech.classify(np.mod(phi[k] @ r, p)) for r in src_reps]
            square = len(src_reps) == len(tgt_reps)
            if any(c is None for c in cols):
                iso = False
            elif not tgt_reps:
                iso = square
            else:
                full = bool(cols) and rank_mod(np.array(cols, dtype=np.int64).T, p) == len(tgt_reps)
                iso = square and full
            degrees.append(ComparisonDegree(k, len(src_reps), len(tgt_reps), iso, f"matrix-rank mod {p}"))
    else:
        for k in degs:
            eh = IntegerHomology(e_cc, k)
            ch = IntegerHomology(c_cc, k)
            same_shape = eh.betti == ch.betti and eh.torsion == ch.torsion
            primes = {2} | {q for d in eh.torsion + ch.torsion for q in _prime_factors(d)}
            field_ok = all(
                simpset_complex_comparison(tuples, sets, Coefficients(q)).degrees[k].isomorphism
                for q in sorted(primes)
            ) if same_shape else False
            degrees.append(ComparisonDegree(
                k, eh.betti, ch.betti, same_shape and field_ok,
                "rank+torsion equality with field checks at " + ",".join(map(str, sorted(primes))),
            ))
    return ComparisonReport(chain_ok, tuple(degrees))


def _prime_factors(d: int) -> set:
    out = set()
    q = 2
    while q * q <= d:
        while d % q == 0:
            out.add(q)
            d //= q
        q += 1
    if d > 1:
        out.add(d)
    return out


# ---------------------------------------------------------------------------
# pi_0 and bounded pi_1


class _DisjointSets:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _skeleton(space: Space):
    verts = tuple(v[0] for v in sorted(space.simplices[0])) if isinstance(space, SimplicialComplex) \
        else tuple(t[0] for t in sorted(space.tuples[0]))
    return verts, space.edges


@dataclass(frozen=True)
class Pi0Report:
    source_components: int
    target_components: int
    trivial: bool
    witness: Optional[tuple] = None
    component_map: tuple = ()


def pi0_induced_map(src: Space, tgt: Space) -> Pi0Report:
    """Union-find components on both sides; trivial iff all source components merge into one."""
    sverts, sedges = _skeleton(src)
    tverts, tedges = _skeleton(tgt)
    sdsu = _DisjointSets(src.ground.size)
    for a, b in sedges:
        sdsu.union(a, b)
    tdsu = _DisjointSets(tgt.ground.size)
    for a, b in tedges:
        tdsu.union(a, b)
    remap = {v: tgt.ground.index(src.ground.points[v]) for v in sverts}
    src_roots = sorted({sdsu.find(v) for v in sverts})
    tgt_roots = sorted({tdsu.find(v) for v in tverts})
    image_roots = {}
    for r in src_roots:
        image_roots[r] = tdsu.find(remap[r])
    distinct = sorted(set(image_roots.values()))
    witness = None
    if len(distinct) > 1:
        by_image = {}
        for r in src_roots:
            by_image.setdefault(image_roots[r], r)
        a, b = (by_image[distinct[0]], by_image[distinct[1]])
        witness = (src.ground.points[a], src.ground.points[b])
    component_map = tuple(
        (src.ground.points[r], tgt.ground.points[image_roots[r]]) for r in src_roots
    )
    return Pi0Report(
        source_components=len(src_roots),
        target_components=len(tgt_roots),
        trivial=len(distinct) <= 1,
        witness=witness,
        component_map=component_map,
    )


@dataclass(frozen=True)
class FillReport:
    status: str  # "found" | "budget-exhausted"
    moves: Optional[tuple]
    states_explored: int

    @property
    def found(self) -> bool:
        return self.status == "found"


def pi1_bounded_fill(loop: Sequence, tgt: SimplicialComplex, budget: int = 2000) -> FillReport:
    """Search for a combinatorial nullhomotopy of a closed edge path in ``tgt``.

    Moves: remove a backtrack, or replace two edges of a triangle of ``tgt``
    by the third.  Breadth-first with a cap on explored states; exhaustion is
    inconclusive, never a negative certificate.
    """
    try:
        idx = [tgt.ground.index(p) for p in loop]
    except KeyError as exc:
        raise PreconditionError(f"loop vertex {exc.args[0]!r} is not in the target") from exc
    if len(idx) > 1 and idx[0] != idx[-1]:
        raise PreconditionError("loop is not closed")
    path = [idx[0]]
    for v in idx[1:]:
        if v != path[-1]:
            path.append(v)
    if len(path) > 1 and path[0] != path[-1]:
        raise PreconditionError("loop is not closed")
    edges = set(tgt.edges)
    for a, b in zip(path, path[1:]):
        if tuple(sorted((a, b))) not in edges:
            raise PreconditionError(f"loop edge {(a, b)} is not in the target")
    triangles = tgt.simplices[2] if tgt.dim_cap >= 2 else frozenset()

    start = tuple(path)
    if len(start) <= 1:
        return FillReport("found", (), 0)
    from collections import deque

    seen = {start}
    queue = deque([(start, ())])
    explored = 0
    while queue:
        state, moves = queue.popleft()
        explored += 1
        if explored > budget:
            return FillReport("budget-exhausted", None, explored - 1)
        L = len(state) - 1
        for i in range(1, L):
            nxt = None
            move = None
            if state[i - 1] == state[i + 1]:
                nxt = state[:i] + state[i + 2:]
                move = ("backtrack", i)
            else:
                tri = tuple(sorted((state[i - 1], state[i], state[i + 1])))
                if len(set(tri)) == 3 and tri in triangles:
                    nxt = state[:i] + state[i + 1:]
                    move = ("triangle", i)
            if nxt is None or nxt in seen:
                continue
            if len(nxt) <= 1:
                return FillReport("found", moves + (move,), explored)
            seen.add(nxt)
            queue.append((nxt, moves + (move,)))
    return FillReport("budget-exhausted", None, explored)


def generating_loops(cx: SimplicialComplex) -> tuple:
    """Spanning-tree generators of the fundamental group of each component.

    One closed edge path (as ground tokens) per non-tree edge; their images
    generate the image of pi_1 under any map extending the identity on
    vertices.
    """
    verts = [v[0] for v in sorted(cx.simplices[0])]
    adj = {v: [] for v in verts}
    for a, b in cx.edges:
        adj[a].append(b)
        adj[b].append(a)
    for v in adj:
        adj[v].sort()
    seen = set()
    loops = []
    from collections import deque

    for root in verts:
        if root in seen:
            continue
        parent = {root: None}
        order = [root]
        seen.add(root)
        dq = deque([root])
        while dq:
            v = dq.popleft()
            for w in adj[v]:
                if w not in parent:
                    parent[w] = v
                    seen.add(w)
                    order.append(w)
                    dq.append(w)
        tree = {tuple(sorted((v, parent[v]))) for v in order if parent[v] is not None}

        def path_to(v):
            out = []
            while v is not None:
                out.append(v)
                v = parent[v]
            return out[::-1]

        comp = set(order)
        for a, b in cx.edges:
            if a not in comp:
                continue
            if tuple(sorted((a, b))) in tree:
                continue
            pa, pb = path_to(a), path_to(b)
            loop = pa + [b] + pb[::-1][1:]
            loops.append(tuple(cx.ground.points[v] for v in loop))
    return tuple(loops)

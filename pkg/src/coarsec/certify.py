"""Essential-connectivity certificates over entourage schedules.

For each stage i the engine scans j = i..m for the least stage such that the
inclusion of the stage-i complex (built on the margin-eroded window) into the
stage-j complex (on the full window) is trivial in every inspected degree:
degree 0 exactly by components, higher degrees by vanishing of the induced
homology map, with an optional bounded pi_1 filling upgrade in degree 1.

Negative results are never asserted: "none within schedule" only means no
stage of this schedule witnesses triviality.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coarse import (Entourage, EntourageSchedule, GroundSet, PointMap, RetractReport,
                     check_coarse_retract, compose_pair_matrices)
from .complexes import (CECH, VIETORIS_RIPS, SubsetFamilyFlavor, build_cech_complex,
                        build_simpset, build_vr_complex)
from .errors import CertifyError, PreconditionError
from .homology import (Coefficients, Echelon, IntegerHomology, SmithDecomposition, Z2,
                       chain_complex, compute_betti, generating_loops,
                       homology_generators_mod, pi1_bounded_fill)

FLAVORS = ("c-vr", "c-cech", "e-vr", "e-cech")

PI0_EXACT = "pi0-exact"
PI1_FILLED = "pi1-filled"
HK_ZERO = "Hk-zero"
FAILED = "failed"


def build_flavor_space(flavor: str, entourage: Entourage, dim_cap: int):
    if flavor == "c-vr":
        return build_vr_complex(entourage, dim_cap)
    if flavor == "c-cech":
        return build_cech_complex(entourage, dim_cap)
    if flavor == "e-vr":
        return build_simpset(SubsetFamilyFlavor(VIETORIS_RIPS, entourage), dim_cap)
    if flavor == "e-cech":
        return build_simpset(SubsetFamilyFlavor(CECH, entourage), dim_cap)
    raise CertifyError(f"unknown flavor {flavor!r}; choose one of {FLAVORS}")


@dataclass(frozen=True)
class StageVerdict:
    """Witness and per-degree methods for one schedule stage (1-based indices)."""

    stage: int
    witness: Optional[int]
    methods: tuple


@dataclass(frozen=True, eq=False)
class ConnectivityCertificate:
    schedule_id: str
    flavor: str
    degree_bound: int
    coeff: str
    margin: float
    window: dict
    labels: tuple
    stages: tuple

    @property
    def complete(self) -> bool:
        return all(s.witness is not None for s in self.stages)

    def witness(self, stage: int) -> Optional[int]:
        return self.stages[stage - 1].witness

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "kind": "connectivity_certificate",
            "schedule_id": self.schedule_id,
            "flavor": self.flavor,
            "degree_bound": self.degree_bound,
            "coeff": self.coeff,
            "margin": self.margin,
            "window": dict(self.window),
            "stage_labels": list(self.labels),
            "complete": self.complete,
            "stages": [
                {
                    "stage": s.stage,
                    "witness": s.witness if s.witness is not None else "none within schedule",
                    "methods": list(s.methods),
                }
                for s in self.stages
            ],
        }


def _interior_tokens(ground: GroundSet, margin, depth) -> tuple:
    if margin < 0:
        raise CertifyError("margin must be nonnegative")
    if margin == 0:
        return ground.points
    if depth is None:
        raise CertifyError("margin > 0 requires a window with boundary depth metadata")
    if isinstance(depth, dict):
        values = [depth[p] for p in ground.points]
    else:
        values = list(depth)
        if len(values) != ground.size:
            raise CertifyError("depth must assign one value per point")
    keep = tuple(p for p, v in zip(ground.points, values) if v >= margin)
    if not keep:
        raise CertifyError("margin erodes the window to nothing")
    return keep


class _Certifier:
    """Caches the (stage, degree) grid for one flavor over one schedule."""

    def __init__(self, schedule: EntourageSchedule, n: int, flavor: str,
                 coeff: Coefficients, margin=0, depth=None, dim_cap: Optional[int] = None,
                 pi1_budget: int = 2000):
        if n < 1:
            raise CertifyError("degree bound must be at least 1")
        if flavor not in FLAVORS:
            raise CertifyError(f"unknown flavor {flavor!r}; choose one of {FLAVORS}")
        self.schedule = schedule
        self.n = n
        self.flavor = flavor
        self.coeff = coeff
        self.margin = margin
        self.dim_cap = n if dim_cap is None else dim_cap
        if self.dim_cap < n:
            raise CertifyError(f"dim_cap {self.dim_cap} insufficient for degree bound {n}")
        self.pi1_budget = pi1_budget
        ground = schedule.ground
        interior = _interior_tokens(ground, margin, depth)
        self.interior_ground = ground.restrict(interior) if margin else ground
        self.src_schedule = schedule.restrict(self.interior_ground) if margin else schedule
        self._src_space = {}
        self._tgt_space = {}
        self._src_cc = {}
        self._tgt_cc = {}
        self._src_reps = {}
        self._tgt_membership = {}
        self._tgt_basis_index = {}
        self._tgt_components = {}
        self._src_to_tgt_vertex = np.array(
            [ground.index(p) for p in self.interior_ground.points], dtype=int
        )

    # -- cached builders -------------------------------------------------------

    def src_space(self, i: int):
        if i not in self._src_space:
            self._src_space[i] = build_flavor_space(
                self.flavor, self.src_schedule.stage(i), self.dim_cap)
        return self._src_space[i]

    def tgt_space(self, j: int):
        if j not in self._tgt_space:
            self._tgt_space[j] = build_flavor_space(
                self.flavor, self.schedule.stage(j), self.dim_cap)
        return self._tgt_space[j]

    def src_cc(self, i: int):
        if i not in self._src_cc:
            self._src_cc[i] = chain_complex(self.src_space(i), self.coeff)
        return self._src_cc[i]

    def tgt_cc(self, j: int):
        if j not in self._tgt_cc:
            self._tgt_cc[j] = chain_complex(self.tgt_space(j), self.coeff)
        return self._tgt_cc[j]

    def src_representatives(self, i: int, k: int):
        key = (i, k)
        if key not in self._src_reps:
            cc = self.src_cc(i)
            if self.coeff.is_field:
                reps, _ = homology_generators_mod(cc, k, self.coeff.p)
            else:
                reps = IntegerHomology(cc, k).generators
            self._src_reps[key] = reps
        return self._src_reps[key]

    def tgt_boundary_membership(self, j: int, k: int):
        """Callable deciding whether a degree-k target chain bounds."""
        key = (j, k)
        if key not in self._tgt_membership:
            cc = self.tgt_cc(j)
            boundary = cc.boundaries[k + 1] if k + 1 <= cc.dim_cap else \
                np.zeros((cc.degree_size(k), 0), dtype=np.int8)
            if self.coeff.is_field:
                ech = Echelon(self.coeff.p)
                for col in boundary.T:
                    ech.add(col, generator=False)
                self._tgt_membership[key] = ech.in_span
            else:
                snf = SmithDecomposition.of(boundary.astype(np.int64))
                self._tgt_membership[key] = lambda v, _snf=snf: _snf.solve([int(x) for x in v]) is not None
        return self._tgt_membership[key]

    def tgt_basis_index(self, j: int, k: int) -> dict:
        key = (j, k)
        if key not in self._tgt_basis_index:
            self._tgt_basis_index[key] = self.tgt_cc(j).basis_index(k)
        return self._tgt_basis_index[key]

    def tgt_component_roots(self, j: int) -> np.ndarray:
        if j not in self._tgt_components:
            space = self.tgt_space(j)
            n = space.ground.size
            parent = np.arange(n)

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for a, b in space.edges:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            self._tgt_components[j] = np.array([find(v) for v in range(n)])
        return self._tgt_components[j]

    # -- verdict grid ----------------------------------------------------------

    def pi0_trivial(self, j: int) -> bool:
        roots = self.tgt_component_roots(j)
        return len(set(roots[self._src_to_tgt_vertex].tolist())) <= 1

    def _push_chain(self, i: int, j: int, k: int, vec) -> np.ndarray:
        """Re-express a source degree-k chain in the stage-j target basis."""
        src_basis = self.src_cc(i).bases[k]
        tgt_index = self.tgt_basis_index(j, k)
        out = np.zeros(self.tgt_cc(j).degree_size(k), dtype=np.int64)
        remap = self._src_to_tgt_vertex
        for col, coefficient in enumerate(vec):
            c = int(coefficient)
            if not c:
                continue
            image = tuple(int(remap[v]) for v in src_basis[col])
            out[tgt_index[image]] += c
        return out

    def homology_trivial(self, i: int, j: int, k: int) -> bool:
        reps = self.src_representatives(i, k)
        if not reps:
            return True
        bounds = self.tgt_boundary_membership(j, k)
        return all(bounds(self._push_chain(i, j, k, rep)) for rep in reps)

    def degree_passes(self, i: int, j: int, k: int) -> bool:
        if k == 0:
            return self.pi0_trivial(j)
        return self.homology_trivial(i, j, k)

    def methods_at(self, i: int, j: int) -> tuple:
        out = []
        for k in range(self.n):
            if not self.degree_passes(i, j, k):
                out.append(FAILED)
            elif k == 0:
                out.append(PI0_EXACT)
            elif k == 1 and self._pi1_upgrade(i, j):
                out.append(PI1_FILLED)
            else:
                out.append(HK_ZERO)
        return tuple(out)

    def _pi1_upgrade(self, i: int, j: int) -> bool:
        if self.pi1_budget <= 0 or self.flavor not in ("c-vr", "c-cech"):
            return False
        loops = generating_loops(self.src_space(i))
        tgt = self.tgt_space(j)
        return all(pi1_bounded_fill(loop, tgt, self.pi1_budget).found for loop in loops)

    def stage_verdict(self, i: int) -> StageVerdict:
        m = len(self.schedule)
        for j in range(i, m + 1):
            if all(self.degree_passes(i, j, k) for k in range(self.n)):
                return StageVerdict(i, j, self.methods_at(i, j))
        return StageVerdict(i, None, self.methods_at(i, m))

    def run(self) -> ConnectivityCertificate:
        stages = []
        self.stage_seconds = []
        for i in range(1, len(self.schedule) + 1):
            started = time.perf_counter()
            stages.append(self.stage_verdict(i))
            self.stage_seconds.append(time.perf_counter() - started)
        stages = tuple(stages)
        return ConnectivityCertificate(
            schedule_id=self.schedule.digest(),
            flavor=self.flavor,
            degree_bound=self.n,
            coeff=str(self.coeff),
            margin=self.margin,
            window={
                "points": self.schedule.ground.size,
                "interior_points": self.interior_ground.size,
            },
            labels=self.schedule.labels,
            stages=stages,
        )

    # -- barcode support --------------------------------------------------------

    def class_bars(self) -> tuple:
        """Bars (degree, birth stage, death stage or None) for every interior class."""
        bars = []
        m = len(self.schedule)
        for i in range(1, m + 1):
            roots = sorted(set(
                self._component_root_src(i, v) for v in range(self.interior_ground.size)
            ))
            base = roots[0] if roots else None
            for r in roots[1:]:
                death = None
                for j in range(i, m + 1):
                    troots = self.tgt_component_roots(j)
                    if troots[self._src_to_tgt_vertex[r]] == troots[self._src_to_tgt_vertex[base]]:
                        death = j
                        break
                bars.append((0, i, death))
            for k in range(1, self.n):
                for rep in self.src_representatives(i, k):
                    death = None
                    for j in range(i, m + 1):
                        if self.tgt_boundary_membership(j, k)(self._push_chain(i, j, k, rep)):
                            death = j
                            break
                    bars.append((k, i, death))
        return tuple(bars)

    def _component_root_src(self, i: int, v: int) -> int:
        key = ("src_roots", i)
        if key not in self._tgt_components:
            space = self.src_space(i)
            n = space.ground.size
            parent = list(range(n))

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for a, b in space.edges:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            self._tgt_components[key] = [find(x) for x in range(n)]
        return self._tgt_components[key][v]


def certify_essential_connectivity(
    schedule: EntourageSchedule,
    n: int,
    flavor: str = "c-vr",
    coeff: Coefficients = Z2,
    margin=0,
    depth=None,
    dim_cap: Optional[int] = None,
    pi1_budget: int = 2000,
) -> ConnectivityCertificate:
    """Certificate of essential (n-1)-connectedness on the schedule window.

    For each stage i, the least stage j >= i is recorded such that the
    inclusion of the stage-i complex (sources drawn from the margin-eroded
    window) into the stage-j complex kills components (exactly), H_1
    (upgraded to a pi_1 filling certificate when the bounded search succeeds)
    and H_k for 2 <= k < n.  The verdict labels record the method per degree
    and never claim more than the method justifies.
    """
    return _Certifier(schedule, n, flavor, coeff, margin, depth, dim_cap, pi1_budget).run()


def certify_with_timings(*args, **kwargs):
    """Like :func:`certify_essential_connectivity`, also returning per-stage seconds."""
    engine = _Certifier(*args, **kwargs)
    cert = engine.run()
    timings = {
        "per_stage_seconds": [round(s, 6) for s in engine.stage_seconds],
        "total_seconds": round(sum(engine.stage_seconds), 6),
    }
    return cert, timings


def stage_betti_table(schedule: EntourageSchedule, n: int, flavor: str,
                      coeff: Coefficients = Z2, dim_cap: Optional[int] = None) -> tuple:
    """Rows (stage, degree, betti) for the full-window complex of every stage."""
    cap = n if dim_cap is None else dim_cap
    rows = []
    for j in range(1, len(schedule) + 1):
        space = build_flavor_space(flavor, schedule.stage(j), cap)
        betti = compute_betti(space, coeff)
        for k in range(min(n, len(betti))):
            rows.append((j, k, betti[k]))
        for k in range(len(betti), n):
            rows.append((j, k, 0))
    return tuple(rows)


# ---------------------------------------------------------------------------
# flavor comparison


@dataclass(frozen=True)
class SandwichCheck:
    direction: str
    stage: int
    predicted_bound: Optional[int]
    actual: Optional[int]
    ok: Optional[bool]
    note: str = ""


@dataclass(frozen=True, eq=False)
class FlavorComparison:
    certificates: dict
    checks: tuple
    warnings: tuple
    bars: dict

    @property
    def consistent(self) -> bool:
        return all(c.ok is not False for c in self.checks)


def _composite_stage(schedule: EntourageSchedule, j: int) -> Optional[int]:
    u = schedule.stage(j)
    return schedule.least_stage_containing(
        compose_pair_matrices(u.pairs, u.pairs), start=j)


def _sandwich_checks(schedule, cech_cert, vr_cert, prefix: str):
    checks = []
    warnings = []
    m = len(schedule)
    for i in range(1, m + 1):
        j_cech = cech_cert.witness(i)
        if j_cech is not None:
            s = _composite_stage(schedule, j_cech)
            if s is None:
                warnings.append(
                    f"{prefix}: no composite stage available above stage {j_cech}; "
                    f"cannot push the Cech witness of stage {i}")
            else:
                actual = vr_cert.witness(i)
                checks.append(SandwichCheck(
                    f"{prefix}:cech->vr", i, s, actual,
                    actual is not None and actual <= s))
        s_i = _composite_stage(schedule, i)
        if s_i is None:
            warnings.append(
                f"{prefix}: no composite stage available above stage {i}; "
                f"cannot bound the Cech witness of stage {i}")
            continue
        w = vr_cert.witness(s_i)
        if w is None:
            continue
        actual = cech_cert.witness(i)
        checks.append(SandwichCheck(
            f"{prefix}:vr->cech", i, w, actual,
            actual is not None and actual <= w))
    return checks, warnings


def compare_flavors(
    schedule: EntourageSchedule,
    n: int,
    coeff: Coefficients = Z2,
    margin=0,
    depth=None,
    dim_cap: Optional[int] = None,
    pi1_budget: int = 2000,
    threads: int = 1,
) -> FlavorComparison:
    """Certify all four flavors and assert the cross-flavor sandwich bounds.

    A Cech witness at stage j pushes to a Vietoris-Rips witness at the least
    stage containing the composed entourage, and conversely through the other
    inclusion; stages whose composite scale is absent from the schedule are
    reported as warnings, never errors.
    """
    engines = {
        flavor: _Certifier(schedule, n, flavor, coeff, margin, depth, dim_cap, pi1_budget)
        for flavor in FLAVORS
    }
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {flavor: pool.submit(engine.run) for flavor, engine in engines.items()}
            certificates = {flavor: futures[flavor].result() for flavor in FLAVORS}
    else:
        certificates = {flavor: engine.run() for flavor, engine in engines.items()}
    checks = []
    warnings = []
    for cech_key, vr_key, prefix in (("c-cech", "c-vr", "c"), ("e-cech", "e-vr", "e")):
        c, w = _sandwich_checks(schedule, certificates[cech_key], certificates[vr_key], prefix)
        checks.extend(c)
        warnings.extend(w)
    bars = {flavor: engines[flavor].class_bars() for flavor in FLAVORS}
    return FlavorComparison(certificates, tuple(checks), tuple(warnings), bars)


# ---------------------------------------------------------------------------
# coarse-retract transfer


@dataclass(frozen=True)
class TransferStage:
    stage: int
    pushed_stage: Optional[int]
    x_witness: Optional[int]
    predicted_bound: Optional[int]
    actual: Optional[int]
    ok: Optional[bool]
    note: str = ""


@dataclass(frozen=True, eq=False)
class RetractTransferReport:
    retract: RetractReport
    x_certificate: ConnectivityCertificate
    y_certificate: ConnectivityCertificate
    stages: tuple
    implication_holds: bool
    explanation: str


def retract_transfer_experiment(
    inclusion: PointMap,
    retraction: PointMap,
    xs: EntourageSchedule,
    ys: EntourageSchedule,
    n: int,
    coeff: Coefficients = Z2,
    flavor: str = "c-vr",
    dim_cap: Optional[int] = None,
    pi1_budget: int = 2000,
) -> RetractTransferReport:
    """Check the retract transfer at the certificate level, on the window.

    Certifies X and Y and bounds each Y witness by pushing the X witness
    through the retraction and composing with the closeness stage.  A failed
    bound indicates a window artifact or an implementation fault, never a
    refutation of the transfer statement itself; stages whose pushed scales
    escape the schedule are reported without a verdict.
    """
    rr = check_coarse_retract(inclusion, retraction, xs, ys)
    if not rr.retract:
        raise PreconditionError(
            "the pair is not a coarse retract on this window "
            f"(inclusion stage witnesses {rr.inclusion_bornologous.table}, "
            f"retraction stage witnesses {rr.retraction_bornologous.table}, "
            f"closeness stage {rr.closeness_stage}); a growing or missing witness "
            "table means the retract hypothesis fails at the needed stages"
        )
    cert_x = certify_essential_connectivity(
        xs, n, flavor=flavor, coeff=coeff, dim_cap=dim_cap, pi1_budget=pi1_budget)
    cert_y = certify_essential_connectivity(
        ys, n, flavor=flavor, coeff=coeff, dim_cap=dim_cap, pi1_budget=pi1_budget)
    closeness = ys.stage(rr.closeness_stage)
    stages = []
    violations = 0
    for i in range(1, len(ys) + 1):
        pushed = rr.inclusion_bornologous.table[i - 1]
        if pushed is None:
            stages.append(TransferStage(i, None, None, None, cert_y.witness(i), None,
                                        "inclusion image escapes the X schedule"))
            continue
        jx = cert_x.witness(pushed)
        if jx is None:
            stages.append(TransferStage(i, pushed, None, None, cert_y.witness(i), None,
                                        "X certificate incomplete at the pushed stage"))
            continue
        pushed_back = retraction.push_entourage(xs.stage(jx))
        bound_pairs = compose_pair_matrices(pushed_back, closeness.pairs)
        s = ys.least_stage_containing(bound_pairs, start=i)
        actual = cert_y.witness(i)
        if s is None:
            stages.append(TransferStage(i, pushed, jx, None, actual, None,
                                        "pushed witness escapes the Y schedule"))
            continue
        ok = actual is not None and actual <= s
        if not ok:
            violations += 1
        stages.append(TransferStage(i, pushed, jx, s, actual, ok))
    implication = violations == 0
    explanation = (
        "Y witnesses are bounded by the pushed X witnesses wherever the pushed "
        "scales stay inside the schedule."
        if implication else
        "bound violated on-window; this indicates a window artifact or a bug, "
        "never a refutation of the retract transfer statement."
    )
    return RetractTransferReport(rr, cert_x, cert_y, tuple(stages), implication, explanation)

"""Space, map, and certificate files, plus the emitted tables and plots.

All structured documents are JSON with a ``format: 1`` field.  Certificate
files are written canonically (sorted keys, fixed separators) so identical
inputs produce byte-identical files; wall-clock timings go to a sidecar file
to keep the certificate itself reproducible.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._version import __version__
from .certify import ConnectivityCertificate
from .coarse import Entourage, EntourageSchedule, GroundSet, PointMap, normalize_entourage
from .errors import FormatError, ScheduleError
from .spaces import (GroupSpec, MetricWindow, build_word_ball, load_distance_matrix,
                     make_synthetic, threshold_schedule, validate_metric)

SPACE_KINDS = ("distance_matrix", "group_ball", "synthetic", "entourage_schedule")


def decode_token(obj):
    """JSON value to point token: lists become tuples, recursively."""
    if isinstance(obj, list):
        return tuple(decode_token(v) for v in obj)
    return obj


def encode_token(tok):
    if isinstance(tok, tuple):
        return [encode_token(v) for v in tok]
    if isinstance(tok, (np.integer,)):
        return int(tok)
    return tok


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True, eq=False)
class SpaceBundle:
    """A loaded space file: window or explicit schedule, plus provenance."""

    kind: str
    window: Optional[MetricWindow]
    schedule: Optional[EntourageSchedule]
    thresholds: Optional[tuple]
    digest: str
    path: str


def _group_from_json(doc: dict) -> GroupSpec:
    kind = doc.get("kind")
    if kind == "free_abelian":
        return GroupSpec.free_abelian(int(doc["rank"]))
    if kind == "free":
        return GroupSpec.free(int(doc["rank"]))
    if kind == "permutation":
        return GroupSpec.permutation(doc["generators"], doc.get("degree"))
    if kind == "cyclic_product":
        return GroupSpec.cyclic_product(doc["moduli"])
    raise FormatError(f"unknown group kind {kind!r}")


def load_space(path) -> SpaceBundle:
    """Parse a .space JSON document into a window or an explicit schedule."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if doc.get("format") != 1:
        raise FormatError(f"{path}: missing or unsupported format field")
    kind = doc.get("kind")
    if kind not in SPACE_KINDS:
        raise FormatError(f"{path}: kind must be one of {SPACE_KINDS}")
    thresholds = tuple(doc["schedule"]) if "schedule" in doc else None
    if thresholds is not None and any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise FormatError(f"{path}: schedule thresholds must be strictly increasing")
    digest = sha256_hex(raw)
    window = None
    schedule = None
    try:
        if kind == "group_ball":
            window = build_word_ball(_group_from_json(doc["group"]), int(doc["radius"]))
        elif kind == "synthetic":
            params = {k: v for k, v in doc.items()
                      if k not in ("format", "kind", "family", "schedule")}
            window = make_synthetic(doc["family"], **params)
        elif kind == "distance_matrix":
            if "path" in doc:
                window = load_distance_matrix(path.parent / doc["path"])
            else:
                rows = doc["matrix"]
                points = tuple(decode_token(p) for p in doc.get("points", range(len(rows))))
                integral = all(float(v).is_integer() for r in rows for v in r)
                d = np.array(rows, dtype=np.int64 if integral else np.float64)
                validate_metric(d, points)
                window = MetricWindow(GroundSet(points), d,
                                      {"kind": "distance_matrix", "path": str(path)})
        else:
            points = tuple(decode_token(p) for p in doc["points"])
            ground = GroundSet(points)
            stages = []
            for stage_pairs in doc["stages"]:
                raw_ent = Entourage.from_pairs(
                    ground, [(decode_token(a), decode_token(b)) for a, b in stage_pairs])
                stages.append(raw_ent if raw_ent.normalized else normalize_entourage(raw_ent))
            if thresholds is not None:
                raise FormatError(f"{path}: entourage_schedule carries its stages; "
                                  "a threshold schedule does not apply")
            schedule = EntourageSchedule.from_entourages(stages)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed {kind} payload: {exc!r}") from exc
    return SpaceBundle(kind, window, schedule, thresholds, digest, str(path))


def parse_schedule_spec(text: str) -> tuple:
    """Parse a --schedule value: 'a:b' (integer range) or a comma list."""
    text = text.strip()
    if ":" in text:
        lo_text, hi_text = text.split(":", 1)
        try:
            lo, hi = int(lo_text), int(hi_text)
        except ValueError as exc:
            raise FormatError(f"bad schedule range {text!r}") from exc
        if hi < lo:
            raise FormatError(f"empty schedule range {text!r}")
        return tuple(range(lo, hi + 1))
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError as exc:
                raise FormatError(f"bad schedule entry {tok!r}") from exc
    if not out:
        raise FormatError("empty schedule")
    return tuple(out)


def resolve_schedule(bundle: SpaceBundle, spec_text: Optional[str]) -> EntourageSchedule:
    """Schedule for a loaded space: explicit stages, CLI thresholds, or file thresholds."""
    if bundle.schedule is not None:
        if spec_text:
            raise FormatError("this space carries explicit entourage stages; "
                              "--schedule does not apply")
        return bundle.schedule
    thresholds = parse_schedule_spec(spec_text) if spec_text else bundle.thresholds
    if thresholds is None:
        raise ScheduleError("no schedule: pass --schedule or embed one in the space file")
    return threshold_schedule(bundle.window, thresholds)


# ---------------------------------------------------------------------------
# certificate files


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def certificate_document(cert: ConnectivityCertificate, input_digest: Optional[str]) -> dict:
    doc = cert.to_dict()
    doc["tool"] = {"name": "coarsec", "version": __version__}
    if input_digest is not None:
        doc["input_digest"] = f"sha256:{input_digest}"
    return doc


def write_certificate(cert: ConnectivityCertificate, path, input_digest: Optional[str] = None,
                      timings: Optional[dict] = None) -> Path:
    """Write the canonical certificate file; timings go to a sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_canonical(certificate_document(cert, input_digest)), encoding="utf-8")
    if timings is not None:
        sidecar = path.with_name(path.name + ".timings.json")
        sidecar.write_text(dumps_canonical(timings), encoding="utf-8")
    return path


def validate_certificate_file(cert_path, space_path) -> bool:
    """Re-validate a certificate against the bytes of its input space file."""
    doc = json.loads(Path(cert_path).read_text(encoding="utf-8"))
    recorded = doc.get("input_digest", "")
    actual = "sha256:" + sha256_hex(Path(space_path).read_bytes())
    return recorded == actual


def write_betti_csv(path, rows: Sequence[tuple], coeff: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["stage,degree,betti,coeff"]
    for stage, degree, betti in rows:
        lines.append(f"{stage},{degree},{betti},{coeff}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# barcode plot


_DEGREE_COLORS = ("#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085")


def write_barcode_svg(path, bars_by_flavor: dict, stage_count: int) -> Path:
    """Static coarse barcode: one bar per class, birth stage to death stage.

    Bars without a recorded death extend to the right edge (the class's image
    survives every stage of the schedule).
    """
    left, right, top = 120.0, 40.0, 30.0
    lane_gap, bar_h = 24.0, 5.0
    width = 760.0
    scale = (width - left - right) / max(stage_count, 1)

    def x_at(stage: float) -> float:
        return left + (stage - 1) * scale

    parts = []
    y = top
    for flavor in sorted(bars_by_flavor):
        bars = sorted(bars_by_flavor[flavor],
                      key=lambda b: (b[0], b[1], b[2] if b[2] is not None else float("inf")))
        parts.append(
            f'<text x="10" y="{y + 10:.1f}" font-size="12" font-family="monospace">{flavor}</text>'
        )
        for degree, birth, death in bars:
            color = _DEGREE_COLORS[degree % len(_DEGREE_COLORS)]
            x0 = x_at(birth)
            x1 = x_at(death) if death is not None else x_at(stage_count) + scale * 0.45
            if x1 <= x0:
                x1 = x0 + 2.0
            parts.append(
                f'<rect x="{x0:.1f}" y="{y:.1f}" width="{x1 - x0:.1f}" height="{bar_h:.1f}" '
                f'fill="{color}" fill-opacity="0.85"><title>degree {degree}: stage {birth} to '
                f'{death if death is not None else "beyond schedule"}</title></rect>'
            )
            y += bar_h + 2.0
        if not bars:
            parts.append(
                f'<text x="{left:.1f}" y="{y + 10:.1f}" font-size="10" '
                f'font-family="monospace">no classes</text>'
            )
            y += bar_h + 8.0
        y += lane_gap
    for stage in range(1, stage_count + 1):
        parts.append(
            f'<line x1="{x_at(stage):.1f}" y1="{top - 12:.1f}" x2="{x_at(stage):.1f}" '
            f'y2="{y:.1f}" stroke="#cccccc" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{x_at(stage) - 3:.1f}" y="{top - 16:.1f}" font-size="10" '
            f'font-family="monospace">{stage}</text>'
        )
    height = y + 20.0
    body = "\n".join(parts)
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">\n<rect width="100%" height="100%" '
        f'fill="white"/>\n{body}\n</svg>\n'
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# point-map files


def load_point_map(path, source: GroundSet, target: GroundSet) -> PointMap:
    """Map file: {"format": 1, "images": [token, ...]} aligned with the source order."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: cannot parse map file: {exc}") from exc
    if doc.get("format") != 1:
        raise FormatError(f"{path}: missing or unsupported format field")
    images = [decode_token(t) for t in doc["images"]]
    if len(images) != source.size:
        raise FormatError(f"{path}: expected {source.size} images, found {len(images)}")
    return PointMap(source, target, tuple(images))

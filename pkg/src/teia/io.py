"""Reading and writing every file this package touches.

Formats (all deterministic: identical inputs serialize to identical bytes):

* detections: JSON Lines, one object per candidate human-object pair;
* regions and session meta: JSON;
* annotations, alarms, fixations, exported intervals, labeled corpus:
  comma-separated tables with a fixed header row;
* score series, calibration results, reports: JSON keyed by "kind";
* reports additionally render as aligned table text.

Seconds are written as exact decimals when the value terminates (``10.28``)
and as a ``numerator/denominator`` string otherwise (``1/3``), so parsing
a written file always reproduces the original rational exactly.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import asdict
from decimal import ROUND_DOWN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .assessment import AssessmentReport, CtaNode
from .errors import ParseError, ValidationError
from .evaluation import EquipmentEval, EvalReport
from .labeling import PartitionResult, SkeletonFrame
from .mapping import MappedHoi, ScoreSeries
from .segmentation import CalibrationResult, SmoothingParams
from .synth import SynthSpec
from .types import (
    AlarmEvent,
    AnnotationInterval,
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
    FixationEvent,
    Interval,
    SessionBundle,
    SessionMeta,
    as_fps,
    as_seconds,
)

PathLike = Union[str, Path]

_LABEL_DISPLAY = {"IV": "IV Equipment", "MV": "MV", "ProPaq": "ProPaq",
                  "patient": "Patient"}
_LABEL_ORDER = {"IV": 0, "MV": 1, "ProPaq": 2, "patient": 3}


# ---------------------------------------------------------------------------
# scalar formatting

def fmt_seconds(value: Fraction) -> str:
    """Exact text for a rational number of seconds."""
    value = Fraction(value)
    num, den = value.numerator, value.denominator
    if den == 1:
        return str(num)
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    digits = max(twos, fives)
    scaled = num * 10 ** digits // den
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    whole, frac = text[:-digits], text[-digits:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def parse_seconds(text: str, field: str = "seconds") -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"cannot parse {text!r}", field)


def fmt_fps(fps: Fraction) -> str:
    return str(Fraction(fps))


def truncate1(value: float) -> str:
    """One-decimal truncation of a float's shortest decimal form."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.1"), rounding=ROUND_DOWN))


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()


def _jsonl_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _read_text(path: PathLike) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_json(path: PathLike):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", str(path), exc.lineno)


# ---------------------------------------------------------------------------
# session meta and regions

def meta_to_dict(meta: SessionMeta) -> dict:
    return {"session_id": meta.session_id, "camera_id": meta.camera_id,
            "fps": fmt_fps(meta.fps), "frame_count": meta.frame_count}


def meta_from_dict(data: Mapping, where: str = "meta") -> SessionMeta:
    try:
        return SessionMeta(
            session_id=data["session_id"], camera_id=data["camera_id"],
            fps=as_fps(data["fps"]), frame_count=int(data["frame_count"]))
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}", where)


def read_meta(path: PathLike) -> SessionMeta:
    return meta_from_dict(_load_json(path), str(path))


def write_meta(meta: SessionMeta, path: PathLike) -> None:
    Path(path).write_bytes(_json_bytes(meta_to_dict(meta)))


def _box_list(box: Optional[BoundingBox]):
    return None if box is None else [box.x1, box.y1, box.x2, box.y2]


def _box_from(data, field: str) -> BoundingBox:
    if not isinstance(data, (list, tuple)) or len(data) != 4:
        raise ValidationError("expected [x1, y1, x2, y2]", field)
    return BoundingBox(*data)


def regions_to_dict(regions: Sequence[EquipmentRegion]) -> dict:
    return {"regions": [
        {"equipment_id": r.equipment_id, "label": r.label,
         "box": _box_list(r.box), "camera_id": r.camera_id,
         "fov_box": _box_list(r.fov_box)}
        for r in regions]}


def read_regions(path: PathLike) -> list[EquipmentRegion]:
    data = _load_json(path)
    out = []
    for entry in data.get("regions", []):
        fov = entry.get("fov_box")
        out.append(EquipmentRegion(
            equipment_id=entry["equipment_id"], label=entry["label"],
            box=_box_from(entry["box"], "box"), camera_id=entry["camera_id"],
            fov_box=None if fov is None else _box_from(fov, "fov_box")))
    return out


def write_regions(regions: Sequence[EquipmentRegion], path: PathLike) -> None:
    Path(path).write_bytes(_json_bytes(regions_to_dict(regions)))


# ---------------------------------------------------------------------------
# detection stream (JSON Lines)

def detection_to_dict(d: DetectionRecord) -> dict:
    out = {"frame": d.frame,
           "human_box": _box_list(d.human_box),
           "object_box": _box_list(d.object_box),
           "object_class": d.object_class,
           "object_conf": d.object_conf,
           "verbs": dict(sorted(d.verbs.items())),
           "human_conf": d.human_conf}
    if d.trainee_id is not None:
        out["trainee_id"] = d.trainee_id
    return out


def detection_from_dict(data: Mapping) -> DetectionRecord:
    return DetectionRecord(
        frame=data["frame"],
        human_box=_box_from(data["human_box"], "human_box"),
        object_box=_box_from(data["object_box"], "object_box"),
        object_class=data["object_class"],
        object_conf=data["object_conf"],
        verbs=data["verbs"],
        human_conf=data.get("human_conf", 1.0),
        trainee_id=data.get("trainee_id"),
    )


def read_detections(path: PathLike) -> list[DetectionRecord]:
    out = []
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", str(path), lineno)
        if not isinstance(data, dict):
            raise ParseError("expected a JSON object", str(path), lineno)
        try:
            out.append(detection_from_dict(data))
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", str(path), lineno)
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), str(path), lineno)
        except ValidationError as exc:
            raise ValidationError(f"{exc.message} (at {path}:{lineno})", exc.field)
    return out


def write_detections(detections: Iterable[DetectionRecord], path: PathLike) -> None:
    lines = [_jsonl_line(detection_to_dict(d)) for d in detections]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


# ---------------------------------------------------------------------------
# tabular event files

_ANNOTATION_HEADER = ["equipment_id", "start_s", "end_s", "trainee_id"]
_ALARM_HEADER = ["alarm_id", "equipment_id", "onset_s", "resolved_s", "false_alarm"]
_FIXATION_HEADER = ["start_s", "end_s", "target", "trainee_id"]


def _read_table(path: PathLike, header: list[str]) -> list[tuple[int, list[str]]]:
    text = _read_text(path)
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise ParseError(f"missing header row {header!r}", str(path), 1)
    if rows[0] != header:
        raise ParseError(f"expected header {header!r}, got {rows[0]!r}", str(path), 1)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}",
                             str(path), lineno)
        out.append((lineno, row))
    return out


def _row_seconds(text: str, field: str, path: str, lineno: int,
                 optional: bool = False) -> Optional[Fraction]:
    if optional and text == "":
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{field}: cannot parse {text!r} as seconds", path, lineno)


def _reraise_at(exc: ValidationError, path: str, lineno: int):
    raise ValidationError(f"{exc.message} (at {path}:{lineno})", exc.field)


def read_annotations(path: PathLike) -> list[AnnotationInterval]:
    out = []
    for lineno, row in _read_table(path, _ANNOTATION_HEADER):
        eq, start, end, trainee = row
        try:
            out.append(AnnotationInterval(
                eq,
                _row_seconds(start, "start_s", str(path), lineno),
                _row_seconds(end, "end_s", str(path), lineno),
                trainee or None))
        except ValidationError as exc:
            _reraise_at(exc, str(path), lineno)
    return out


def write_annotations(annotations: Iterable[AnnotationInterval], path: PathLike) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_ANNOTATION_HEADER)
    for ann in annotations:
        writer.writerow([ann.equipment_id, fmt_seconds(ann.start_s),
                         fmt_seconds(ann.end_s), ann.trainee_id or ""])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_intervals(intervals: Iterable[Interval], path: PathLike) -> None:
    """Export predictions in the annotation schema so they can be re-ingested
    as annotations; peak scores are not part of that schema."""
    write_annotations(
        (AnnotationInterval(iv.equipment_id, iv.start_s, iv.end_s) for iv in intervals),
        path)


def read_intervals(path: PathLike) -> list[Interval]:
    return [Interval(a.equipment_id, a.start_s, a.end_s)
            for a in read_annotations(path)]


def read_alarms(path: PathLike) -> list[AlarmEvent]:
    out = []
    for lineno, row in _read_table(path, _ALARM_HEADER):
        alarm_id, eq, onset, resolved, false_alarm = row
        if false_alarm not in ("true", "false", ""):
            raise ParseError(f"false_alarm: expected true/false, got {false_alarm!r}",
                             str(path), lineno)
        try:
            out.append(AlarmEvent(
                alarm_id, eq,
                _row_seconds(onset, "onset_s", str(path), lineno),
                _row_seconds(resolved, "resolved_s", str(path), lineno, optional=True),
                false_alarm == "true"))
        except ValidationError as exc:
            _reraise_at(exc, str(path), lineno)
    return out


def write_alarms(alarms: Iterable[AlarmEvent], path: PathLike) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_ALARM_HEADER)
    for a in alarms:
        writer.writerow([
            a.alarm_id, a.equipment_id, fmt_seconds(a.onset_s),
            "" if a.resolved_s is None else fmt_seconds(a.resolved_s),
            "true" if a.false_alarm else "false"])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_fixations(path: PathLike) -> list[FixationEvent]:
    out = []
    for lineno, row in _read_table(path, _FIXATION_HEADER):
        start, end, target, trainee = row
        try:
            out.append(FixationEvent(
                _row_seconds(start, "start_s", str(path), lineno),
                _row_seconds(end, "end_s", str(path), lineno),
                target, trainee or None))
        except ValidationError as exc:
            _reraise_at(exc, str(path), lineno)
    return out


def write_fixations(fixations: Iterable[FixationEvent], path: PathLike) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_FIXATION_HEADER)
    for f in fixations:
        writer.writerow([fmt_seconds(f.start_s), fmt_seconds(f.end_s),
                         f.target, f.trainee_id or ""])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# session bundles

def load_session(*, detections: PathLike, regions: PathLike,
                 meta: Optional[PathLike] = None,
                 annotations: Optional[PathLike] = None,
                 alarms: Optional[PathLike] = None,
                 fixations: Optional[PathLike] = None,
                 meta_override: Optional[SessionMeta] = None) -> SessionBundle:
    """Parse and cross-validate all inputs for one session.

    The frame rate is never guessed: session meta must come from a file or
    from `meta_override` (which wins when both are given).  The region file
    may hold several cameras' regions; only those for the session's camera
    are kept.
    """
    if meta_override is not None:
        session_meta = meta_override
    elif meta is not None:
        session_meta = read_meta(meta)
    else:
        raise ValidationError("session meta required (file or override)", "meta")

    all_regions = read_regions(regions)
    for_camera = [r for r in all_regions if r.camera_id == session_meta.camera_id]
    if not for_camera:
        raise ValidationError(
            f"no regions configured for camera {session_meta.camera_id!r}", "regions")

    dets = sorted(read_detections(detections), key=lambda d: d.frame)
    return SessionBundle(
        meta=session_meta,
        detections=tuple(dets),
        regions=tuple(for_camera),
        annotations=None if annotations is None else tuple(read_annotations(annotations)),
        alarms=None if alarms is None else tuple(read_alarms(alarms)),
        fixations=None if fixations is None else tuple(read_fixations(fixations)),
    )


def write_session(bundle: SessionBundle, out_dir: PathLike) -> dict[str, str]:
    """Write a bundle as its constituent files; returns role -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"meta": out / "meta.json",
             "detections": out / "detections.jsonl",
             "regions": out / "regions.json"}
    write_meta(bundle.meta, paths["meta"])
    write_detections(bundle.detections, paths["detections"])
    write_regions(bundle.regions, paths["regions"])
    if bundle.annotations is not None:
        paths["annotations"] = out / "annotations.csv"
        write_annotations(bundle.annotations, paths["annotations"])
    if bundle.alarms is not None:
        paths["alarms"] = out / "alarms.csv"
        write_alarms(bundle.alarms, paths["alarms"])
    if bundle.fixations is not None:
        paths["fixations"] = out / "fixations.csv"
        write_fixations(bundle.fixations, paths["fixations"])
    return {role: str(p) for role, p in paths.items()}


def load_session_from_dir(session_dir: PathLike) -> SessionBundle:
    d = Path(session_dir)
    optional = {role: d / name for role, name in
                [("annotations", "annotations.csv"), ("alarms", "alarms.csv"),
                 ("fixations", "fixations.csv")]}
    return load_session(
        detections=d / "detections.jsonl", regions=d / "regions.json",
        meta=d / "meta.json",
        **{role: path for role, path in optional.items() if path.exists()})


def read_manifest(path: PathLike) -> list[dict[str, str]]:
    """Session manifest: {"sessions": [{role: relative-path, ...}, ...]}."""
    data = _load_json(path)
    base = Path(path).parent
    sessions = []
    for i, entry in enumerate(data.get("sessions", [])):
        resolved = {}
        for role in ("meta", "detections", "regions", "annotations", "alarms",
                     "fixations"):
            if role in entry:
                resolved[role] = str(base / entry[role])
        if not {"meta", "detections", "regions"} <= set(resolved):
            raise ParseError(f"session {i}: needs meta, detections and regions",
                             str(path))
        sessions.append(resolved)
    return sessions


# ---------------------------------------------------------------------------
# score series, mapped HOIs, labeled corpus

def write_score_series(series_by_eq: Mapping[str, ScoreSeries],
                       meta: SessionMeta, path: PathLike) -> None:
    payload = {
        "kind": "score_series",
        "session_id": meta.session_id,
        "camera_id": meta.camera_id,
        "fps": fmt_fps(meta.fps),
        "frame_count": meta.frame_count,
        "series": {eq: [float(v) for v in s.values]
                   for eq, s in sorted(series_by_eq.items())},
    }
    Path(path).write_bytes(_json_bytes(payload))


def read_score_series(path: PathLike) -> tuple[dict[str, ScoreSeries], SessionMeta]:
    data = _load_json(path)
    if data.get("kind") != "score_series":
        raise ParseError("not a score_series file", str(path))
    meta = SessionMeta(data["session_id"], data["camera_id"],
                       as_fps(data["fps"]), int(data["frame_count"]))
    series = {eq: ScoreSeries(eq, values, meta.fps)
              for eq, values in data["series"].items()}
    return series, meta


def write_hoi_debug(hois: Iterable[MappedHoi], path: PathLike) -> None:
    lines = []
    for h in hois:
        lines.append(_jsonl_line({
            "frame": h.frame, "equipment_id": h.equipment_id, "label": h.label,
            "score": h.score, "iou": h.iou,
            "object_class": h.source.object_class,
            "trainee_id": h.source.trainee_id}))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


_CORPUS_HEADER = ["frame", "equipment_id", "label", "provenance", "score"]


def write_labeled_corpus(result: PartitionResult, path: PathLike) -> None:
    """Labeled rows plus review warnings in one table; warning rows carry
    an empty label and their reason in the provenance column."""
    rows: list[tuple[int, list[str]]] = []
    for r in result.records:
        rows.append((r.frame, [str(r.frame), r.equipment_id, r.label,
                               r.provenance, repr(r.score)]))
    for w in result.warnings:
        rows.append((w.frame, [str(w.frame), w.equipment_id, "",
                               w.reason, repr(w.score)]))
    rows.sort(key=lambda item: item[0])
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CORPUS_HEADER)
    for _, row in rows:
        writer.writerow(row)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# hand-skeleton stream (JSON Lines)

def read_skeletons(path: PathLike) -> list[SkeletonFrame]:
    out = []
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", str(path), lineno)
        try:
            out.append(SkeletonFrame(
                frame=int(data["frame"]),
                hand_points=tuple(tuple(p) for p in data.get("hand_points", [])),
                trainee_hint=data.get("trainee_hint")))
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", str(path), lineno)
        except ValidationError as exc:
            raise ValidationError(f"{exc.message} (at {path}:{lineno})", exc.field)
    return out


def write_skeletons(skeletons: Iterable[SkeletonFrame], path: PathLike) -> None:
    lines = []
    for sk in skeletons:
        record = {"frame": sk.frame,
                  "hand_points": [list(p) for p in sk.hand_points]}
        if sk.trainee_hint is not None:
            record["trainee_hint"] = sk.trainee_hint
        lines.append(_jsonl_line(record))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


# ---------------------------------------------------------------------------
# synthetic-session specs

def read_synth_spec(path: PathLike) -> SynthSpec:
    data = _load_json(path)
    try:
        return SynthSpec(
            frame_count=int(data["frame_count"]),
            fps=as_fps(data["fps"]),
            equipment=tuple(data["equipment"]),
            gt_intervals={eq: tuple((int(s), int(e)) for s, e in spans)
                          for eq, spans in data.get("gt_intervals", {}).items()},
            base_score=float(data.get("base_score", 0.1)),
            active_boost=float(data.get("active_boost", 0.7)),
            noise_sigma=float(data.get("noise_sigma", 0.0)),
            seed=int(data.get("seed", 0)))
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}", str(path))


def write_synth_spec(spec: SynthSpec, path: PathLike) -> None:
    payload = {
        "frame_count": spec.frame_count,
        "fps": fmt_fps(spec.fps),
        "equipment": list(spec.equipment),
        "gt_intervals": {eq: [[s, e] for s, e in spans]
                         for eq, spans in sorted(spec.gt_intervals.items())},
        "base_score": spec.base_score,
        "active_boost": spec.active_boost,
        "noise_sigma": spec.noise_sigma,
        "seed": spec.seed,
    }
    Path(path).write_bytes(_json_bytes(payload))


# ---------------------------------------------------------------------------
# calibration results

def _params_to_dict(params: SmoothingParams) -> dict:
    return {"sigma": params.sigma, "threshold": params.threshold,
            "radius": params.radius,
            "min_len_s": fmt_seconds(params.min_len_s),
            "gap_merge_s": fmt_seconds(params.gap_merge_s)}


def _params_from_dict(data: Mapping) -> SmoothingParams:
    return SmoothingParams(
        sigma=data["sigma"], threshold=data["threshold"], radius=data.get("radius"),
        min_len_s=as_seconds(data.get("min_len_s", 0), "min_len_s"),
        gap_merge_s=as_seconds(data.get("gap_merge_s", 0), "gap_merge_s"))


def write_calibration(result: CalibrationResult, path: PathLike) -> None:
    payload = {
        "kind": "calibration_result",
        "best": _params_to_dict(result.best),
        "objective": result.objective,
        "grid": [[_params_to_dict(p), score] for p, score in result.grid],
    }
    Path(path).write_bytes(_json_bytes(payload))


def read_calibration(path: PathLike) -> CalibrationResult:
    data = _load_json(path)
    if data.get("kind") != "calibration_result":
        raise ParseError("not a calibration_result file", str(path))
    return CalibrationResult(
        best=_params_from_dict(data["best"]),
        objective=data["objective"],
        grid=tuple((_params_from_dict(p), score) for p, score in data["grid"]),
    )


# ---------------------------------------------------------------------------
# reports

def _equipment_display(equipment_id: str) -> str:
    return _LABEL_DISPLAY.get(equipment_id, equipment_id)


def _equipment_sort_key(equipment_id: str):
    return (_LABEL_ORDER.get(equipment_id, len(_LABEL_ORDER)), equipment_id)


def render_f1_table(columns: Mapping[str, Mapping[str, float]]) -> str:
    """Tab-separated F1 table: one row per equipment plus the macro average.

    `columns` maps column title -> {equipment_id: f1 percent}; values print
    truncated to one decimal.
    """
    titles = list(columns)
    equipment = sorted({eq for col in columns.values() for eq in col},
                       key=_equipment_sort_key)
    lines = ["\t".join(["Equipment"] + titles)]
    for eq in equipment:
        cells = [truncate1(columns[t][eq]) if eq in columns[t] else "-"
                 for t in titles]
        lines.append("\t".join([_equipment_display(eq)] + cells))
    avg_cells = []
    for t in titles:
        values = [columns[t][eq] for eq in equipment if eq in columns[t]]
        avg_cells.append(truncate1(math.fsum(values) / len(values)) if values else "-")
    lines.append("\t".join(["Avg."] + avg_cells))
    return "\n".join(lines) + "\n"


def render_temporal_table(per_equipment: Mapping[str, EquipmentEval]) -> str:
    """Tab-separated temporal-metric table, one row per equipment."""
    header = ["Equipment", "Overlap Ratio", "False Intervals (avg)",
              "Start Latency (s)", "False Duration (%)"]
    lines = ["\t".join(header)]
    for eq in sorted(per_equipment, key=_equipment_sort_key):
        m = per_equipment[eq]
        lines.append("\t".join([
            _equipment_display(eq),
            "-" if m.overlap_ratio is None else f"{m.overlap_ratio * 100:.2f}%",
            f"{m.false_count:.2f}",
            "-" if m.start_latency_s is None else f"{m.start_latency_s:.2f}",
            f"{m.false_duration_pct:.2f}%",
        ]))
    return "\n".join(lines) + "\n"


def _eval_report_to_dict(report: EvalReport) -> dict:
    def eq_dict(m: EquipmentEval) -> dict:
        return asdict(m)

    return {
        "kind": "eval_report",
        "per_equipment": {eq: eq_dict(m) for eq, m in report.per_equipment.items()},
        "macro_f1": report.macro_f1,
        "per_session": {sid: {eq: eq_dict(m) for eq, m in by_eq.items()}
                        for sid, by_eq in report.per_session.items()},
    }


def _eval_report_from_dict(data: Mapping) -> EvalReport:
    def eq_from(d: Mapping) -> EquipmentEval:
        return EquipmentEval(**d)

    return EvalReport(
        per_equipment={eq: eq_from(m) for eq, m in data["per_equipment"].items()},
        macro_f1=data["macro_f1"],
        per_session={sid: {eq: eq_from(m) for eq, m in by_eq.items()}
                     for sid, by_eq in data.get("per_session", {}).items()},
    )


def _render_eval_text(report: EvalReport) -> str:
    f1_column = {eq: m.f1 for eq, m in report.per_equipment.items()}
    parts = [render_f1_table({"F1": f1_column}),
             render_temporal_table(report.per_equipment)]
    return "\n".join(parts)


def _assessment_to_dict(report: AssessmentReport) -> dict:
    return {
        "kind": "assessment_report",
        "session_id": report.session_id,
        "metrics": report.metrics,
        "grouped": report.grouped,
        "warnings": list(report.warnings),
    }


def _assessment_from_dict(data: Mapping) -> AssessmentReport:
    return AssessmentReport(
        session_id=data["session_id"],
        metrics=data["metrics"],
        grouped=data["grouped"],
        warnings=tuple(data.get("warnings", [])),
    )


def _render_metric_value(value) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


def _render_assessment_text(report: AssessmentReport) -> str:
    lines = [f"Session: {report.session_id}"]

    def walk(node: dict, depth: int):
        lines.append("  " * depth + f"[L{node['level']}] {node['label']}")
        for key, metric in node.get("metrics", {}).items():
            value = _render_metric_value(metric["value"])
            lines.append("  " * (depth + 1) + f"- {key} ({metric['unit']}): {value}")
        for child in node.get("children", []):
            walk(child, depth + 1)

    walk(report.grouped, 0)
    if report.warnings:
        lines.append("Warnings:")
        lines.extend(f"  - {w}" for w in report.warnings)
    return "\n".join(lines) + "\n"


Report = Union[EvalReport, AssessmentReport]


def write_report(report: Report, format: str = "structured") -> bytes:
    """Serialize a report; identical reports always produce identical bytes.

    `format` is "structured" (JSON) or "table-text" (aligned tables shaped
    like the per-equipment F1 / temporal-metric summaries).
    """
    if format == "structured":
        if isinstance(report, EvalReport):
            return _json_bytes(_eval_report_to_dict(report))
        return _json_bytes(_assessment_to_dict(report))
    if format == "table-text":
        if isinstance(report, EvalReport):
            return _render_eval_text(report).encode()
        return _render_assessment_text(report).encode()
    raise ValidationError(f"unknown format {format!r}", "format")


def read_report(source: Union[PathLike, bytes]) -> Report:
    if isinstance(source, bytes):
        data = json.loads(source.decode("utf-8"))
    else:
        data = _load_json(source)
    kind = data.get("kind")
    if kind == "eval_report":
        return _eval_report_from_dict(data)
    if kind == "assessment_report":
        return _assessment_from_dict(data)
    raise ParseError(f"unknown report kind {kind!r}")


# ---------------------------------------------------------------------------
# taxonomy config

def read_taxonomy(path: PathLike) -> tuple[CtaNode, ...]:
    data = _load_json(path)
    nodes = []
    for entry in data.get("nodes", []):
        nodes.append(CtaNode(
            id=entry["id"], level=int(entry["level"]), label=entry["label"],
            parent=entry.get("parent"),
            metric_keys=frozenset(entry.get("metric_keys", []))))
    return tuple(nodes)


def write_taxonomy(nodes: Sequence[CtaNode], path: PathLike) -> None:
    payload = {"nodes": [
        {"id": n.id, "level": n.level, "label": n.label, "parent": n.parent,
         "metric_keys": sorted(n.metric_keys)}
        for n in nodes]}
    Path(path).write_bytes(_json_bytes(payload))

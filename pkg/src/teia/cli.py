"""Command-line surface for batch session processing.

Subcommands mirror the pipeline stages (map, segment, calibrate, evaluate,
assess, label-assist, simulate) plus `pipeline`, which chains
map -> smooth -> segment -> evaluate -> assess over one session or a
manifest of sessions.  Every stage reads and writes plain text files, so
stages can be run separately and inspected; chaining them by hand produces
byte-identical outputs to one `pipeline` run.

Exit codes: 0 success, 1 bad usage or invalid input, 2 processing error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from . import io as tio
from .assessment import build_assessment, default_taxonomy
from .config import EngineConfig, default_config, load_config
from .errors import EngineError
from .evaluation import evaluate_session, pooled_report
from .labeling import partition_labels, sample_review_rows
from .mapping import build_score_series, map_detections
from .segmentation import SmoothingParams, calibrate, smooth_and_segment
from .synth import generate_session
from .types import SessionBundle


@dataclass(frozen=True)
class CommandOutcome:
    exit_code: int
    artifacts: tuple[str, ...] = ()


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="teia", description=__doc__.splitlines()[0])
    parser.add_argument("--diag-json", action="store_true",
                        help="emit a machine-readable diagnostic on error")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="engine config file (JSON)")

    p = sub.add_parser("map", help="detections -> per-equipment score series")
    add_config(p)
    p.add_argument("--detections", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--iou-min", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--hoi-debug", help="also write the mapped-HOI debug stream")

    p = sub.add_parser("segment", help="score series -> interaction intervals")
    add_config(p)
    p.add_argument("--series", required=True)
    p.add_argument("--sigma", type=float)
    p.add_argument("--threshold", type=float)
    p.add_argument("--radius", type=int)
    p.add_argument("--min-len", dest="min_len")
    p.add_argument("--gap-merge", dest="gap_merge")
    p.add_argument("--out", required=True)

    p = sub.add_parser("calibrate", help="grid-search (sigma, threshold) on a validation set")
    add_config(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--iou-min", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="intervals + annotations -> evaluation report")
    add_config(p)
    p.add_argument("--intervals", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--table", help="also write the table-text rendering")

    p = sub.add_parser("assess", help="bundle + intervals -> assessment report")
    add_config(p)
    p.add_argument("--intervals", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--alarms")
    p.add_argument("--fixations")
    p.add_argument("--taxonomy")
    p.add_argument("--out", required=True)
    p.add_argument("--table", help="also write the table-text rendering")

    p = sub.add_parser("label-assist", help="detections + skeletons -> labeled corpus")
    add_config(p)
    p.add_argument("--detections", required=True)
    p.add_argument("--skeletons", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--review", help="also write sampled rows for manual review")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="synthetic-session spec -> session files")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("pipeline", help="end-to-end: map, smooth, segment, evaluate, assess")
    add_config(p)
    p.add_argument("--manifest")
    p.add_argument("--detections")
    p.add_argument("--regions")
    p.add_argument("--meta")
    p.add_argument("--annotations")
    p.add_argument("--alarms")
    p.add_argument("--fixations")
    p.add_argument("--params", help="calibration result whose best params to apply")
    p.add_argument("--iou-min", type=float)
    p.add_argument("--out-dir", required=True)
    return parser


def _load_engine_config(args) -> EngineConfig:
    config = load_config(args.config) if getattr(args, "config", None) else default_config()
    if getattr(args, "iou_min", None) is not None:
        config = replace(config, iou_min=args.iou_min)
    return config


def _smoothing_overrides(config: EngineConfig, args) -> SmoothingParams:
    params = config.smoothing
    updates = {}
    if getattr(args, "sigma", None) is not None:
        updates["sigma"] = args.sigma
    if getattr(args, "threshold", None) is not None:
        updates["threshold"] = args.threshold
    if getattr(args, "radius", None) is not None:
        updates["radius"] = args.radius
    if getattr(args, "min_len", None) is not None:
        updates["min_len_s"] = args.min_len
    if getattr(args, "gap_merge", None) is not None:
        updates["gap_merge_s"] = args.gap_merge
    return replace(params, **updates) if updates else params


def _cmd_map(args) -> list[str]:
    config = _load_engine_config(args)
    bundle = tio.load_session(detections=args.detections, regions=args.regions,
                              meta=args.meta)
    series = build_score_series(bundle, config.verb_mapping, config.iou_min)
    tio.write_score_series(series, bundle.meta, args.out)
    written = [args.out]
    if args.hoi_debug:
        tio.write_hoi_debug(map_detections(bundle, config.verb_mapping, config.iou_min),
                            args.hoi_debug)
        written.append(args.hoi_debug)
    return written


def _cmd_segment(args) -> list[str]:
    config = _load_engine_config(args)
    params = _smoothing_overrides(config, args)
    series, _ = tio.read_score_series(args.series)
    intervals_by_eq = smooth_and_segment(series, params)
    flat = [iv for eq in sorted(intervals_by_eq) for iv in intervals_by_eq[eq]]
    tio.write_intervals(flat, args.out)
    return [args.out]


def _load_manifest_sessions(path: str) -> list[SessionBundle]:
    return [tio.load_session(**entry) for entry in tio.read_manifest(path)]


def _cmd_calibrate(args) -> list[str]:
    config = _load_engine_config(args)
    bundles = _load_manifest_sessions(args.manifest)
    sessions = []
    for bundle in bundles:
        series = build_score_series(bundle, config.verb_mapping, config.iou_min)
        sessions.append((series, list(bundle.annotations or ())))
    result = calibrate(
        sessions,
        config.calibration.sigma_grid,
        config.calibration.threshold_grid,
        radius=config.smoothing.radius,
        min_len_s=config.smoothing.min_len_s,
        gap_merge_s=config.smoothing.gap_merge_s,
        objective=config.calibration.objective,
        workers=args.workers,
    )
    tio.write_calibration(result, args.out)
    return [args.out]


def _group_by_equipment(items):
    out: dict[str, list] = {}
    for item in items:
        out.setdefault(item.equipment_id, []).append(item)
    return out


def _cmd_evaluate(args) -> list[str]:
    config = _load_engine_config(args)
    meta = tio.read_meta(args.meta)
    pred = _group_by_equipment(tio.read_intervals(args.intervals))
    gt = _group_by_equipment(tio.read_annotations(args.annotations))
    report = evaluate_session(meta, pred, gt,
                              overlap_cutoff=config.eval.false_overlap_cutoff)
    Path(args.out).write_bytes(tio.write_report(report, "structured"))
    written = [args.out]
    if args.table:
        Path(args.table).write_bytes(tio.write_report(report, "table-text"))
        written.append(args.table)
    return written


def _cmd_assess(args) -> list[str]:
    config = _load_engine_config(args)
    bundle = tio.load_session(
        detections=args.detections, regions=args.regions, meta=args.meta,
        alarms=args.alarms, fixations=args.fixations)
    intervals = tio.read_intervals(args.intervals)
    taxonomy_path = args.taxonomy or config.taxonomy_path
    taxonomy = tio.read_taxonomy(taxonomy_path) if taxonomy_path else default_taxonomy()
    report = build_assessment(
        bundle, intervals, taxonomy=taxonomy,
        grace_s=config.assessment.grace_s,
        lookahead_s=config.assessment.lookahead_s,
        dwell_gap_s=config.assessment.dwell_gap_s,
        fov_bridge_s=config.assessment.fov_bridge_s,
        iou_min=config.iou_min)
    Path(args.out).write_bytes(tio.write_report(report, "structured"))
    written = [args.out]
    if args.table:
        Path(args.table).write_bytes(tio.write_report(report, "table-text"))
        written.append(args.table)
    return written


def _cmd_label_assist(args) -> list[str]:
    config = _load_engine_config(args)
    la = config.label_assist
    bundle = tio.load_session(detections=args.detections, regions=args.regions,
                              meta=args.meta)
    skeletons = tio.read_skeletons(args.skeletons)
    result = partition_labels(
        bundle.detections, skeletons, la.hi_score, config.verb_mapping,
        bundle.regions, iou_min=config.iou_min, margin_px=la.margin_px,
        conf_min=la.conf_min, conf_min_refute=la.conf_min_refute)
    tio.write_labeled_corpus(result, args.out)
    written = [args.out]
    if args.review:
        rows = sample_review_rows(result, la.review_sample_n, la.hi_score, args.seed)
        lines = ["frame,equipment_id,reason_or_provenance,score"]
        for row in rows:
            tag = getattr(row, "reason", None) or getattr(row, "provenance", "")
            lines.append(f"{row.frame},{row.equipment_id},{tag},{row.score!r}")
        Path(args.review).write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(args.review)
    return written


def _cmd_simulate(args) -> list[str]:
    spec = tio.read_synth_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    bundle = generate_session(spec)
    paths = tio.write_session(bundle, args.out_dir)
    manifest = {"sessions": [{role: Path(p).name for role, p in sorted(paths.items())}]}
    manifest_path = Path(args.out_dir) / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                             encoding="utf-8")
    return sorted(paths.values()) + [str(manifest_path)]


def _pipeline_one(bundle: SessionBundle, config: EngineConfig,
                  params: SmoothingParams, out_dir: Path) -> tuple[list[str], tuple]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    series = build_score_series(bundle, config.verb_mapping, config.iou_min)
    series_path = out_dir / "series.json"
    tio.write_score_series(series, bundle.meta, series_path)
    written.append(str(series_path))

    intervals_by_eq = smooth_and_segment(series, params)
    flat = [iv for eq in sorted(intervals_by_eq) for iv in intervals_by_eq[eq]]
    intervals_path = out_dir / "intervals.csv"
    tio.write_intervals(flat, intervals_path)
    written.append(str(intervals_path))

    gt_by_eq = _group_by_equipment(bundle.annotations or ())
    if bundle.annotations is not None:
        report = evaluate_session(bundle.meta, intervals_by_eq, gt_by_eq,
                                  overlap_cutoff=config.eval.false_overlap_cutoff)
        report_path = out_dir / "eval_report.json"
        report_path.write_bytes(tio.write_report(report, "structured"))
        table_path = out_dir / "eval_report.txt"
        table_path.write_bytes(tio.write_report(report, "table-text"))
        written.extend([str(report_path), str(table_path)])

    taxonomy = (tio.read_taxonomy(config.taxonomy_path)
                if config.taxonomy_path else default_taxonomy())
    assessment = build_assessment(
        bundle, flat, taxonomy=taxonomy,
        grace_s=config.assessment.grace_s,
        lookahead_s=config.assessment.lookahead_s,
        dwell_gap_s=config.assessment.dwell_gap_s,
        fov_bridge_s=config.assessment.fov_bridge_s,
        iou_min=config.iou_min)
    assessment_path = out_dir / "assessment.json"
    assessment_path.write_bytes(tio.write_report(assessment, "structured"))
    written.append(str(assessment_path))

    session_eval = (bundle.meta.frame_count, bundle.meta.fps, intervals_by_eq, gt_by_eq)
    return written, session_eval


def _cmd_pipeline(args) -> list[str]:
    config = _load_engine_config(args)
    params = config.smoothing
    if args.params:
        params = tio.read_calibration(args.params).best

    if args.manifest:
        bundles = _load_manifest_sessions(args.manifest)
    else:
        if not (args.detections and args.regions and args.meta):
            raise _UsageError("pipeline needs --manifest or --detections/--regions/--meta")
        bundles = [tio.load_session(
            detections=args.detections, regions=args.regions, meta=args.meta,
            annotations=args.annotations, alarms=args.alarms,
            fixations=args.fixations)]

    out_root = Path(args.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    pooled_inputs = []
    annotated_ids = []
    for bundle in bundles:
        session_written, session_eval = _pipeline_one(
            bundle, config, params, out_root / bundle.meta.session_id)
        written.extend(session_written)
        if bundle.annotations is not None:
            pooled_inputs.append(session_eval)
            annotated_ids.append(bundle.meta.session_id)

    if pooled_inputs:
        combined = pooled_report(pooled_inputs, session_ids=annotated_ids,
                                 overlap_cutoff=config.eval.false_overlap_cutoff)
        combined_path = out_root / "eval_report.json"
        combined_path.write_bytes(tio.write_report(combined, "structured"))
        table_path = out_root / "eval_report.txt"
        table_path.write_bytes(tio.write_report(combined, "table-text"))
        written.extend([str(combined_path), str(table_path)])
    return written


_COMMANDS = {
    "map": _cmd_map,
    "segment": _cmd_segment,
    "calibrate": _cmd_calibrate,
    "evaluate": _cmd_evaluate,
    "assess": _cmd_assess,
    "label-assist": _cmd_label_assist,
    "simulate": _cmd_simulate,
    "pipeline": _cmd_pipeline,
}


def run(argv: Sequence[str]) -> CommandOutcome:
    """Parse argv, dispatch, and map failures to exit codes."""
    parser = _build_parser()
    diag_json = "--diag-json" in argv
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _diagnose(exc, "usage", diag_json)
        return CommandOutcome(1)
    except SystemExit as exc:  # --help
        return CommandOutcome(0 if exc.code in (0, None) else 1)
    try:
        artifacts = _COMMANDS[args.command](args)
        return CommandOutcome(0, tuple(artifacts))
    except _UsageError as exc:
        _diagnose(exc, "usage", diag_json)
        return CommandOutcome(1)
    except (EngineError, FileNotFoundError) as exc:
        _diagnose(exc, "validation", diag_json)
        return CommandOutcome(1)
    except Exception as exc:
        _diagnose(exc, "processing", diag_json)
        return CommandOutcome(2)


def _diagnose(exc: BaseException, kind: str, diag_json: bool) -> None:
    if diag_json:
        payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
        field = getattr(exc, "field", None)
        if field:
            payload["field"] = field
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    else:
        print(f"teia: {kind} error: {exc}", file=sys.stderr)


def main() -> None:
    sys.exit(run(sys.argv[1:]).exit_code)


if __name__ == "__main__":
    main()

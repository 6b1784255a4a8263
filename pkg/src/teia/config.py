"""One validated configuration surface for the whole pipeline.

Every tunable the pipeline exposes lives here, with the documented
defaults; the CLI layers flag overrides on top (flag > file > default).
The file format is JSON mirroring the dataclass structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from .errors import ConfigError, ValidationError
from .mapping import VerbMapping
from .segmentation import SmoothingParams
from .types import as_seconds

PathLike = Union[str, Path]


@dataclass(frozen=True)
class CalibrationConfig:
    sigma_grid: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    threshold_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    objective: str = "macro_f1"

    def __post_init__(self):
        object.__setattr__(self, "sigma_grid", tuple(float(s) for s in self.sigma_grid))
        object.__setattr__(self, "threshold_grid",
                           tuple(float(t) for t in self.threshold_grid))
        if not self.sigma_grid or not self.threshold_grid:
            raise ValidationError("grids must be nonempty", "calibration")
        if self.objective not in ("macro_f1", "overlap"):
            raise ValidationError(f"unknown objective {self.objective!r}", "objective")


@dataclass(frozen=True)
class EvalConfig:
    false_overlap_cutoff: float = 0.0
    table_decimals: int = 1

    def __post_init__(self):
        if not 0.0 <= self.false_overlap_cutoff < 1.0:
            raise ValidationError("must be in [0, 1)", "false_overlap_cutoff")
        if self.table_decimals < 0:
            raise ValidationError("must be >= 0", "table_decimals")


@dataclass(frozen=True)
class AssessmentConfig:
    grace_s: float = 5.0
    lookahead_s: float = 30.0
    dwell_gap_s: float = 0.2
    fov_bridge_s: float = 1.0

    def __post_init__(self):
        for name in ("grace_s", "lookahead_s", "dwell_gap_s", "fov_bridge_s"):
            if as_seconds(getattr(self, name), name) < 0:
                raise ValidationError("must be >= 0", name)


@dataclass(frozen=True)
class LabelAssistConfig:
    hi_score: float = 0.8
    iou_cluster: float = 0.7
    iou_dup: float = 0.5
    margin_px: float = 10.0
    conf_min: float = 0.5
    conf_min_refute: float = 0.3
    review_sample_n: int = 5

    def __post_init__(self):
        if not 0.0 < self.hi_score < 1.0:
            raise ValidationError("must be in (0, 1)", "hi_score")
        for name in ("iou_cluster", "iou_dup"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValidationError("must be in (0, 1)", name)
        if self.margin_px < 0:
            raise ValidationError("must be >= 0", "margin_px")
        for name in ("conf_min", "conf_min_refute"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError("must be in [0, 1]", name)
        if self.review_sample_n < 0:
            raise ValidationError("must be >= 0", "review_sample_n")


@dataclass(frozen=True)
class EngineConfig:
    verb_mapping: VerbMapping = field(default_factory=VerbMapping)
    iou_min: float = 0.5
    smoothing: SmoothingParams = field(
        default_factory=lambda: SmoothingParams(sigma=1.0, threshold=0.5))
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    assessment: AssessmentConfig = field(default_factory=AssessmentConfig)
    label_assist: LabelAssistConfig = field(default_factory=LabelAssistConfig)
    taxonomy_path: Optional[str] = None

    def __post_init__(self):
        if not 0.0 < self.iou_min <= 1.0:
            raise ValidationError("must be in (0, 1]", "iou_min")


def default_config() -> EngineConfig:
    return EngineConfig()


def config_to_dict(config: EngineConfig) -> dict:
    from .io import fmt_seconds  # local import avoids a cycle

    return {
        "verb_mapping": {
            "valid_verbs": sorted(config.verb_mapping.valid_verbs),
            "none_verbs": sorted(config.verb_mapping.none_verbs),
        },
        "iou_min": config.iou_min,
        "smoothing": {
            "sigma": config.smoothing.sigma,
            "threshold": config.smoothing.threshold,
            "radius": config.smoothing.radius,
            "min_len_s": fmt_seconds(config.smoothing.min_len_s),
            "gap_merge_s": fmt_seconds(config.smoothing.gap_merge_s),
        },
        "calibration": {
            "sigma_grid": list(config.calibration.sigma_grid),
            "threshold_grid": list(config.calibration.threshold_grid),
            "objective": config.calibration.objective,
        },
        "eval": {
            "false_overlap_cutoff": config.eval.false_overlap_cutoff,
            "table_decimals": config.eval.table_decimals,
        },
        "assessment": {
            "grace_s": config.assessment.grace_s,
            "lookahead_s": config.assessment.lookahead_s,
            "dwell_gap_s": config.assessment.dwell_gap_s,
            "fov_bridge_s": config.assessment.fov_bridge_s,
        },
        "label_assist": {
            "hi_score": config.label_assist.hi_score,
            "iou_cluster": config.label_assist.iou_cluster,
            "iou_dup": config.label_assist.iou_dup,
            "margin_px": config.label_assist.margin_px,
            "conf_min": config.label_assist.conf_min,
            "conf_min_refute": config.label_assist.conf_min_refute,
            "review_sample_n": config.label_assist.review_sample_n,
        },
        "taxonomy_path": config.taxonomy_path,
    }


def _build_section(cls, data: dict, section: str):
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(str(exc), section)
    except ValidationError as exc:
        raise ConfigError(exc.message, f"{section}.{exc.field}" if exc.field else section)


def config_from_dict(data: dict) -> EngineConfig:
    defaults = default_config()
    kwargs = {}
    if "verb_mapping" in data:
        vm = data["verb_mapping"]
        kwargs["verb_mapping"] = _build_section(
            VerbMapping,
            {"valid_verbs": frozenset(vm.get("valid_verbs", [])),
             "none_verbs": frozenset(vm.get("none_verbs", []))},
            "verb_mapping")
    if "iou_min" in data:
        kwargs["iou_min"] = data["iou_min"]
    if "smoothing" in data:
        kwargs["smoothing"] = _build_section(SmoothingParams, data["smoothing"],
                                             "smoothing")
    if "calibration" in data:
        kwargs["calibration"] = _build_section(CalibrationConfig, data["calibration"],
                                               "calibration")
    if "eval" in data:
        kwargs["eval"] = _build_section(EvalConfig, data["eval"], "eval")
    if "assessment" in data:
        kwargs["assessment"] = _build_section(AssessmentConfig, data["assessment"],
                                              "assessment")
    if "label_assist" in data:
        kwargs["label_assist"] = _build_section(LabelAssistConfig, data["label_assist"],
                                                "label_assist")
    if "taxonomy_path" in data:
        kwargs["taxonomy_path"] = data["taxonomy_path"]
    try:
        return replace(defaults, **kwargs)
    except ValidationError as exc:
        raise ConfigError(exc.message, exc.field)


def load_config(path: PathLike) -> EngineConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})", str(path))
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object", str(path))
    return config_from_dict(data)


def write_config(config: EngineConfig, path: PathLike) -> None:
    payload = json.dumps(config_to_dict(config), sort_keys=True, indent=2) + "\n"
    Path(path).write_text(payload, encoding="utf-8")

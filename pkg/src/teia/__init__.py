"""Trainee-equipment interaction analytics.

Turns per-frame human-object interaction detections from training-session
video into temporally segmented trainee-equipment interaction intervals,
scores them against expert annotations, and derives cognitive-task-aligned
performance metrics for after-action review.
"""

from .assessment import (
    AssessmentReport,
    CtaNode,
    METRIC_KEYS,
    alarm_reaction_time,
    build_assessment,
    default_taxonomy,
    fov_entries,
    gaze_metrics,
    interaction_timestamps,
    non_optimal_interactions,
    resolution_success_rate,
    response_time,
    validate_taxonomy,
)
from .config import EngineConfig, default_config, load_config, write_config
from .evaluation import (
    Confusion,
    EvalReport,
    evaluate_session,
    f1,
    false_interval_stats,
    frame_confusion,
    macro_f1,
    overlap_ratio,
    pooled_report,
    start_latency,
)
from .labeling import (
    PartitionResult,
    SkeletonFrame,
    cluster_dedup,
    merge_aux_humans,
    partition_labels,
    skeleton_verify,
)
from .mapping import (
    MappedHoi,
    ScoreSeries,
    VerbMapping,
    assign_equipment,
    build_score_series,
    iou,
    map_detections,
    select_best_hoi,
)
from .segmentation import (
    CalibrationResult,
    SmoothingParams,
    calibrate,
    gaussian_kernel,
    segment,
    smooth,
    smooth_and_segment,
)
from .synth import SynthSpec, generate_session, oracle_confusion, oracle_segment, oracle_smooth
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
    frame_time,
)

__version__ = "0.1.0"

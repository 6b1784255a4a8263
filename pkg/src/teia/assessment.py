"""Training-performance metrics derived from interaction intervals, alarm
logs, gaze fixations, and detections, grouped under an editable cognitive
task taxonomy for after-action review.

Every metric is a straightforward scan over its input events.  All time
arithmetic is exact (rational seconds), so shifting a whole session by a
constant shifts timestamp outputs by exactly that constant and leaves
every duration and rate untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import TaxonomyError
from .mapping import iou
from .types import (
    AlarmEvent,
    DetectionRecord,
    EquipmentRegion,
    FixationEvent,
    Interval,
    SessionBundle,
    as_seconds,
    frame_time,
)

# Metric keys a taxonomy can reference, one per performance indicator.
METRIC_KEYS = (
    "fov_entries",
    "fixation_duration_per_min",
    "time_to_first_fixation",
    "alarm_reaction_time",
    "response_time",
    "resolution_success_rate",
    "non_optimal_interactions",
    "patient_interaction_timestamps",
    "fixation_transitions",
    "gaze_dwell_time",
    "equipment_interaction_timestamps",
)


def _mean(values: Sequence[Fraction]) -> Optional[float]:
    if not values:
        return None
    return float(sum(values, Fraction(0)) / len(values))


def alarm_reaction_time(alarms: Sequence[AlarmEvent],
                        intervals: Sequence[Interval],
                        ) -> tuple[dict[str, Optional[float]], Optional[float]]:
    """Seconds from each alarm onset to the first physical interaction with
    the alarm's equipment.

    An interval already spanning the onset gives 0.  Otherwise the earliest
    interval starting at or after onset counts, provided it starts before
    the alarm resolves; alarms with no qualifying interval map to None.
    Returns (per-alarm values, mean of the known values).
    """
    per_alarm: dict[str, Optional[float]] = {}
    known: list[Fraction] = []
    for alarm in alarms:
        candidates = [iv for iv in intervals if iv.equipment_id == alarm.equipment_id]
        value: Optional[Fraction] = None
        if any(iv.start_s <= alarm.onset_s < iv.end_s for iv in candidates):
            value = Fraction(0)
        else:
            horizon = alarm.resolved_s
            starts = [iv.start_s for iv in candidates
                      if iv.start_s >= alarm.onset_s
                      and (horizon is None or iv.start_s < horizon)]
            if starts:
                value = min(starts) - alarm.onset_s
        per_alarm[alarm.alarm_id] = None if value is None else float(value)
        if value is not None:
            known.append(value)
    return per_alarm, _mean(known)


def response_time(alarms: Sequence[AlarmEvent]) -> dict[str, Optional[float]]:
    """Seconds from alarm onset to resolution; None for unresolved alarms."""
    return {a.alarm_id: (None if a.resolved_s is None
                         else float(a.resolved_s - a.onset_s))
            for a in alarms}


def _alarm_window_end(alarm: AlarmEvent, session_end_s: Fraction) -> Fraction:
    return alarm.resolved_s if alarm.resolved_s is not None else session_end_s


def _overlapping_intervals(alarm: AlarmEvent, intervals: Sequence[Interval],
                           session_end_s: Fraction) -> list[Interval]:
    end = _alarm_window_end(alarm, session_end_s)
    return [iv for iv in intervals
            if iv.equipment_id == alarm.equipment_id
            and iv.start_s < end and iv.end_s > alarm.onset_s]


def _resolves(alarm: AlarmEvent, iv: Interval, grace_s: Fraction) -> bool:
    return (alarm.resolved_s is not None
            and iv.start_s <= alarm.resolved_s <= iv.end_s + grace_s)


def resolution_success_rate(alarms: Sequence[AlarmEvent],
                            intervals: Sequence[Interval],
                            grace_s, session_end_s) -> Optional[float]:
    """Percent of alarm-overlapping interactions during which (or within
    `grace_s` after which) the alarm resolved.

    An interaction overlapping several alarms is counted once per alarm.
    The window of an unresolved alarm runs to `session_end_s` (the session's
    closing timestamp).  None when no interaction overlaps any alarm.
    """
    grace_s = as_seconds(grace_s, "grace_s")
    session_end_s = as_seconds(session_end_s, "session_end_s")
    total = 0
    successes = 0
    for alarm in alarms:
        for iv in _overlapping_intervals(alarm, intervals, session_end_s):
            total += 1
            if _resolves(alarm, iv, grace_s):
                successes += 1
    if total == 0:
        return None
    return successes / total * 100.0


def per_alarm_resolution_rate(alarms: Sequence[AlarmEvent],
                              intervals: Sequence[Interval],
                              grace_s, session_end_s) -> Optional[float]:
    """Percent of alarms resolved during (or within grace of) an overlapping
    interaction; a per-alarm companion to resolution_success_rate."""
    grace_s = as_seconds(grace_s, "grace_s")
    session_end_s = as_seconds(session_end_s, "session_end_s")
    if not alarms:
        return None
    resolved = 0
    for alarm in alarms:
        if any(_resolves(alarm, iv, grace_s)
               for iv in _overlapping_intervals(alarm, intervals, session_end_s)):
            resolved += 1
    return resolved / len(alarms) * 100.0


def non_optimal_interactions(alarms: Sequence[AlarmEvent],
                             intervals: Sequence[Interval],
                             grace_s, lookahead_s, session_end_s) -> int:
    """Count interactions that were ineffective or caused a false alarm.

    Ineffective: the interaction overlaps an alarm on its equipment that is
    still unresolved `grace_s` past the interaction's end.  Caused: a
    false-flagged alarm on the same equipment fires during the interaction
    or within `lookahead_s` after it ends.  An interaction matching both
    rules counts once.
    """
    grace_s = as_seconds(grace_s, "grace_s")
    lookahead_s = as_seconds(lookahead_s, "lookahead_s")
    session_end_s = as_seconds(session_end_s, "session_end_s")
    count = 0
    for iv in intervals:
        ineffective = False
        caused_false = False
        for alarm in alarms:
            if alarm.equipment_id != iv.equipment_id:
                continue
            window_end = _alarm_window_end(alarm, session_end_s)
            overlaps = iv.start_s < window_end and iv.end_s > alarm.onset_s
            if overlaps and (alarm.resolved_s is None
                             or alarm.resolved_s > iv.end_s + grace_s):
                ineffective = True
            if alarm.false_alarm and iv.start_s <= alarm.onset_s <= iv.end_s + lookahead_s:
                caused_false = True
        if ineffective or caused_false:
            count += 1
    return count


def interaction_timestamps(intervals: Sequence[Interval], label: str,
                           regions: Sequence[EquipmentRegion],
                           ) -> list[tuple[float, float]]:
    """Sorted (start, end) pairs for intervals on regions with this label."""
    wanted = {r.equipment_id for r in regions if r.label == label}
    pairs = sorted((iv.start_s, iv.end_s) for iv in intervals
                   if iv.equipment_id in wanted)
    return [(float(a), float(b)) for a, b in pairs]


def fov_entries(detections: Sequence[DetectionRecord], region: EquipmentRegion,
                iou_min: float, fps, bridge_s=1.0) -> int:
    """How many times a trainee enters the equipment's field-of-view zone.

    A frame counts as present when some human box either overlaps the zone
    with IoU >= iou_min or has its center inside the zone.  Absences
    shorter than `bridge_s` do not end a presence run.
    """
    fps = as_seconds(fps, "fps")
    bridge_s = as_seconds(bridge_s, "bridge_s")
    fov = region.effective_fov
    present = sorted({d.frame for d in detections
                      if iou(d.human_box, fov) >= iou_min
                      or fov.contains(*d.human_box.center)})
    entries = 0
    prev = None
    for frame in present:
        if prev is None or Fraction(frame - prev - 1) / fps >= bridge_s:
            entries += 1
        prev = frame
    return entries


@dataclass(frozen=True)
class GazeMetrics:
    fixation_s_per_min: dict[str, float]
    time_to_first_fixation_s: dict[str, Optional[float]]
    mean_time_to_first_fixation_s: Optional[float]
    dwell_runs: tuple[tuple[str, float], ...]
    transition_sequences: dict[str, tuple[str, ...]]
    transition_counts: dict[str, int]


def gaze_metrics(fixations: Sequence[FixationEvent],
                 alarms: Sequence[AlarmEvent],
                 session_len_s, dwell_gap_s=0.2) -> GazeMetrics:
    """Fixation rate per target, time to first fixation per alarm, dwell
    runs, and gaze transition patterns.

    A dwell run is a maximal chain of same-target fixations (per trainee)
    whose inter-fixation gaps stay below `dwell_gap_s`; its duration spans
    from the first fixation's start to the last one's end.  The transition
    sequence lists run targets in order with consecutive repeats collapsed.
    """
    session_len_s = as_seconds(session_len_s, "session_len_s")
    dwell_gap_s = as_seconds(dwell_gap_s, "dwell_gap_s")

    per_target: dict[str, Fraction] = {}
    for fix in fixations:
        per_target[fix.target] = per_target.get(fix.target, Fraction(0)) + (fix.end_s - fix.start_s)
    minutes = session_len_s / 60
    rate = {t: float(d / minutes) for t, d in sorted(per_target.items())} if minutes else {}

    first_fix: dict[str, Optional[float]] = {}
    known: list[Fraction] = []
    for alarm in alarms:
        starts = [f.start_s for f in fixations
                  if f.target == alarm.equipment_id and f.start_s >= alarm.onset_s]
        if starts:
            delta = min(starts) - alarm.onset_s
            first_fix[alarm.alarm_id] = float(delta)
            known.append(delta)
        else:
            first_fix[alarm.alarm_id] = None

    by_trainee: dict[str, list[FixationEvent]] = {}
    for fix in fixations:
        by_trainee.setdefault(fix.trainee_id or "", []).append(fix)

    dwell_runs: list[tuple[str, float]] = []
    sequences: dict[str, tuple[str, ...]] = {}
    counts: dict[str, int] = {}
    for trainee in sorted(by_trainee):
        fixes = sorted(by_trainee[trainee], key=lambda f: f.start_s)
        runs: list[tuple[str, Fraction, Fraction]] = []
        for fix in fixes:
            if (runs and runs[-1][0] == fix.target
                    and fix.start_s - runs[-1][2] < dwell_gap_s):
                runs[-1] = (fix.target, runs[-1][1], fix.end_s)
            else:
                runs.append((fix.target, fix.start_s, fix.end_s))
        dwell_runs.extend((t, float(e - s)) for t, s, e in runs)
        seq = [t for i, (t, _, _) in enumerate(runs)
               if i == 0 or runs[i - 1][0] != t]
        sequences[trainee] = tuple(seq)
        for a, b in zip(seq, seq[1:]):
            key = f"{a}->{b}"
            counts[key] = counts.get(key, 0) + 1

    return GazeMetrics(
        fixation_s_per_min=rate,
        time_to_first_fixation_s=first_fix,
        mean_time_to_first_fixation_s=_mean(known),
        dwell_runs=tuple(dwell_runs),
        transition_sequences=sequences,
        transition_counts=dict(sorted(counts.items())),
    )


@dataclass(frozen=True)
class CtaNode:
    """One node of the cognitive task taxonomy; metric keys live on
    level-5 leaves only."""

    id: str
    level: int
    label: str
    parent: Optional[str] = None
    metric_keys: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "metric_keys", frozenset(self.metric_keys))


def validate_taxonomy(nodes: Sequence[CtaNode]) -> dict[str, str]:
    """Check tree shape and metric-key uniqueness.

    Returns the metric-key -> leaf-id mapping.
    """
    by_id = {}
    for node in nodes:
        if node.id in by_id:
            raise TaxonomyError(f"duplicate node id {node.id!r}")
        if not 1 <= node.level <= 5:
            raise TaxonomyError(f"node {node.id!r} has level {node.level}, expected 1-5")
        by_id[node.id] = node
    roots = [n for n in nodes if n.parent is None]
    if len(roots) != 1 or roots[0].id != "mission":
        raise TaxonomyError("taxonomy must have exactly one root named 'mission'")
    children: dict[str, list[CtaNode]] = {}
    for node in nodes:
        if node.parent is not None:
            parent = by_id.get(node.parent)
            if parent is None:
                raise TaxonomyError(f"node {node.id!r} references unknown parent {node.parent!r}")
            if node.level <= parent.level:
                raise TaxonomyError(
                    f"node {node.id!r} level must exceed its parent's level")
            children.setdefault(node.parent, []).append(node)
    key_map: dict[str, str] = {}
    for node in nodes:
        if node.metric_keys:
            if node.level != 5 or children.get(node.id):
                raise TaxonomyError(
                    f"metric keys are only allowed on level-5 leaves, not {node.id!r}")
            for key in sorted(node.metric_keys):
                if key in key_map:
                    raise TaxonomyError(f"metric key {key!r} appears in multiple leaves")
                key_map[key] = node.id
    return key_map


def default_taxonomy() -> tuple[CtaNode, ...]:
    """Editable default: mission root, three operational tasks, the three
    cognitive constructs, observable actions, and metric leaves.

    Every metric lives in a single leaf, so equipment-agnostic metrics are
    homed under the branch that most directly exercises them; edit the
    taxonomy config to regroup them.
    """
    n = CtaNode
    return (
        n("mission", 1, "Mission"),
        n("keep_patient_sedated", 2, "Keep the Patient Sedated", "mission"),
        n("manage_airways_breathing", 2, "Manage Airways and Breathing", "mission"),
        n("stabilize_patient_conditions", 2, "Stabilize Patient Condition(s)", "mission"),
        n("situational_awareness", 3, "Situational Awareness", "stabilize_patient_conditions"),
        n("monitor_equipment", 4, "Monitor equipment and alarms", "situational_awareness"),
        n("gaze_attention", 5, "Gaze attention on equipment", "monitor_equipment",
          frozenset({"fixation_duration_per_min", "time_to_first_fixation", "fov_entries"})),
        n("gaze_patterns", 5, "Gaze movement patterns", "monitor_equipment",
          frozenset({"gaze_dwell_time", "fixation_transitions"})),
        n("decision_making", 3, "Decision-Making", "stabilize_patient_conditions"),
        n("respond_to_alarms", 4, "Respond to equipment alarms", "decision_making"),
        n("alarm_response", 5, "Alarm response timing", "respond_to_alarms",
          frozenset({"alarm_reaction_time", "response_time"})),
        n("task_execution", 3, "Task Execution", "stabilize_patient_conditions"),
        n("operate_equipment", 4, "Operate medical equipment", "task_execution"),
        n("equipment_handling", 5, "Equipment handling outcomes", "operate_equipment",
          frozenset({"equipment_interaction_timestamps", "resolution_success_rate",
                     "non_optimal_interactions"})),
        n("treat_patient", 4, "Attend to the patient", "task_execution"),
        n("patient_contact", 5, "Physical patient contact", "treat_patient",
          frozenset({"patient_interaction_timestamps"})),
    )


@dataclass(frozen=True)
class AssessmentReport:
    """Computed metrics plus their taxonomy grouping for one session."""

    session_id: str
    metrics: dict[str, dict]
    grouped: dict
    warnings: tuple[str, ...] = ()


def _grouped_tree(nodes: Sequence[CtaNode], metrics: Mapping[str, dict]) -> dict:
    children: dict[Optional[str], list[CtaNode]] = {}
    for node in nodes:
        children.setdefault(node.parent, []).append(node)

    def render(node: CtaNode) -> dict:
        out: dict = {"id": node.id, "level": node.level, "label": node.label}
        attached = {k: metrics[k] for k in sorted(node.metric_keys) if k in metrics}
        if attached:
            out["metrics"] = attached
        kids = [render(c) for c in children.get(node.id, [])]
        if kids:
            out["children"] = kids
        return out

    return render(children[None][0])


def build_assessment(bundle: SessionBundle, intervals: Sequence[Interval],
                     *, taxonomy: Optional[Sequence[CtaNode]] = None,
                     grace_s=5, lookahead_s=30, dwell_gap_s=0.2,
                     fov_bridge_s=1, iou_min: float = 0.5) -> AssessmentReport:
    """Compute every metric whose inputs are present and group the values
    under the taxonomy; skipped metrics produce a warning, never a
    fabricated value."""
    nodes = tuple(taxonomy) if taxonomy is not None else default_taxonomy()
    key_map = validate_taxonomy(nodes)

    meta = bundle.meta
    session_len = meta.duration_s
    regions = bundle.regions
    warnings: list[str] = []
    metrics: dict[str, dict] = {}

    def put(key: str, value, unit: str):
        if key not in key_map:
            raise TaxonomyError(f"metric key {key!r} is not mapped to any taxonomy leaf")
        metrics[key] = {"value": value, "unit": unit}

    equipment_ts = {
        r.equipment_id: [[a, b] for a, b in
                         interaction_timestamps(intervals, r.label, [r])]
        for r in sorted(regions, key=lambda r: r.equipment_id)
        if r.label != "patient"
    }
    put("equipment_interaction_timestamps", equipment_ts, "s")

    if any(r.label == "patient" for r in regions):
        pairs = interaction_timestamps(intervals, "patient", regions)
        put("patient_interaction_timestamps", [[a, b] for a, b in pairs], "s")
    else:
        warnings.append("patient_interaction_timestamps skipped: no patient region configured")

    if bundle.alarms is not None:
        per_alarm_rt, mean_rt = alarm_reaction_time(bundle.alarms, intervals)
        put("alarm_reaction_time", {"per_alarm_s": per_alarm_rt, "mean_s": mean_rt}, "s")
        put("response_time", {"per_alarm_s": response_time(bundle.alarms)}, "s")
        put("resolution_success_rate", {
            "per_interaction_pct": resolution_success_rate(
                bundle.alarms, intervals, grace_s, session_len),
            "per_alarm_pct": per_alarm_resolution_rate(
                bundle.alarms, intervals, grace_s, session_len),
        }, "percent")
        put("non_optimal_interactions", non_optimal_interactions(
            bundle.alarms, intervals, grace_s, lookahead_s, session_len), "count")
    else:
        warnings.append("alarm metrics skipped: no alarm log supplied")

    if bundle.detections:
        entries = {r.equipment_id: fov_entries(bundle.detections, r, iou_min,
                                               meta.fps, fov_bridge_s)
                   for r in sorted(regions, key=lambda r: r.equipment_id)}
        put("fov_entries", entries, "count")
    else:
        warnings.append("fov_entries skipped: no detections supplied")

    if bundle.fixations is not None:
        gaze = gaze_metrics(bundle.fixations, bundle.alarms or (),
                            session_len, dwell_gap_s)
        put("fixation_duration_per_min", gaze.fixation_s_per_min, "s/min")
        put("time_to_first_fixation", {
            "per_alarm_s": gaze.time_to_first_fixation_s,
            "mean_s": gaze.mean_time_to_first_fixation_s,
        }, "s")
        put("gaze_dwell_time", [[t, d] for t, d in gaze.dwell_runs], "s")
        put("fixation_transitions", {
            "sequences": {k: list(v) for k, v in gaze.transition_sequences.items()},
            "counts": gaze.transition_counts,
        }, "transitions")
    else:
        warnings.append("gaze metrics skipped: no fixation log supplied")

    return AssessmentReport(
        session_id=meta.session_id,
        metrics=metrics,
        grouped=_grouped_tree(nodes, metrics),
        warnings=tuple(warnings),
    )

from __future__ import annotations

from fractions import Fraction

import pytest

from teia.types import (
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
    SessionBundle,
    SessionMeta,
)


def box(x1=0.0, y1=0.0, x2=10.0, y2=10.0) -> BoundingBox:
    return BoundingBox(x1, y1, x2, y2)


def region(equipment_id="iv1", label="IV", x0=0.0, camera_id="cam-1",
           fov_box=None) -> EquipmentRegion:
    return EquipmentRegion(equipment_id, label,
                           BoundingBox(x0, 0.0, x0 + 100.0, 100.0),
                           camera_id, fov_box)


def detection(frame=0, object_box=None, verbs=None, object_conf=1.0,
              human_box=None, object_class="thing", trainee_id=None,
              human_conf=1.0) -> DetectionRecord:
    return DetectionRecord(
        frame=frame,
        human_box=human_box or BoundingBox(0, 0, 50, 50),
        object_box=object_box or BoundingBox(0, 0, 100, 100),
        object_class=object_class,
        object_conf=object_conf,
        verbs={"hold": 0.9} if verbs is None else verbs,
        human_conf=human_conf,
        trainee_id=trainee_id,
    )


def meta(session_id="s1", camera_id="cam-1", fps=10, frame_count=100) -> SessionMeta:
    return SessionMeta(session_id, camera_id, Fraction(fps), frame_count)


def bundle(detections=(), regions=None, annotations=None, alarms=None,
           fixations=None, **meta_kwargs) -> SessionBundle:
    return SessionBundle(
        meta=meta(**meta_kwargs),
        detections=tuple(sorted(detections, key=lambda d: d.frame)),
        regions=tuple(regions if regions is not None else [region()]),
        annotations=annotations,
        alarms=alarms,
        fixations=fixations,
    )


@pytest.fixture
def iv_region():
    return region()

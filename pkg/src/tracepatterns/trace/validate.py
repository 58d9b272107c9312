"""Trace well-formedness checks. Violations are data, not exceptions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (
    ACTION_RADIUS_MAX,
    ACTION_RADIUS_MIN,
    SCENE_EXTENT,
    Trace,
    Vec2,
)

COORD_BOUND = 1024.0


@dataclass(frozen=True)
class Violation:
    field: str
    index: int | None
    rule: str

    def __str__(self) -> str:
        where = f"{self.field}[{self.index}]" if self.index is not None else self.field
        return f"{where}: {self.rule}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, fieldname: str, index: int | None, rule: str) -> None:
        self.violations.append(Violation(fieldname, index, rule))


def _check_vec(report: ValidationReport, v: Vec2, fieldname: str, index: int | None) -> None:
    for comp in (v.x, v.y):
        if not math.isfinite(comp):
            report.add(fieldname, index, "non-finite component")
            return
        if not -COORD_BOUND <= comp <= COORD_BOUND:
            report.add(fieldname, index, f"component {comp} outside [-1024, 1024]")
            return


def validate_trace(trace: Trace) -> ValidationReport:
    report = ValidationReport()

    # Action bounds.
    pos = trace.action.position
    if not (0.0 <= pos.x <= SCENE_EXTENT and 0.0 <= pos.y <= SCENE_EXTENT):
        report.add("action.position", None, "outside [0, 256]")
    if not ACTION_RADIUS_MIN <= trace.action.radius <= ACTION_RADIUS_MAX:
        report.add("action.radius", None, "outside [4, 32]")

    # Scene objects.
    seen_ids: dict[int, int] = {}
    for i, obj in enumerate(trace.scene):
        if obj.id in seen_ids:
            report.add("scene.objects", i, f"duplicate id {obj.id} (also at {seen_ids[obj.id]})")
        seen_ids[obj.id] = i
        expected_desc = f"{obj.color}-{obj.type}-{obj.id}"
        if obj.description != expected_desc:
            report.add("scene.objects", i, f"description {obj.description!r} != {expected_desc!r}")
        _check_vec(report, obj.velocity, "scene.objects.velocity", i)
        if obj.type == "circle":
            if "center" not in obj.obj_params or "radius" not in obj.obj_params:
                report.add("scene.objects", i, "circle missing center/radius")
        else:
            polys = obj.polygons()
            if not polys:
                report.add("scene.objects", i, f"{obj.type} has no polygons")
            for poly in polys:
                if len(poly) < 3:
                    report.add("scene.objects", i, "polygon with <3 vertices")

    dynamic_ids = {obj.id for obj in trace.scene if not obj.static}

    # Frame ordering and membership.
    n = len(trace.frames)
    if n < 2:
        report.add("frames", None, "trace must contain at least 2 frames")
    else:
        if trace.frames[0].time != 0.0:
            report.add("frames", 0, f"first frame time {trace.frames[0].time} != 0")
        if trace.frames[-1].time != 1.0:
            report.add("frames", n - 1, f"last frame time {trace.frames[-1].time} != 1")
    for i in range(1, n):
        if trace.frames[i].time < trace.frames[i - 1].time:
            report.add("frames", i, f"non-monotone frame time at index {i}")
    for i, frame in enumerate(trace.frames):
        for obj in frame.objects:
            if obj.id not in dynamic_ids:
                report.add("frames.objects", i, f"object {obj.id} not a dynamic scene object")
            _check_vec(report, obj.center(), "frames.objects.center", i)
            _check_vec(report, obj.velocity, "frames.objects.velocity", i)

    # Event stream.
    if not trace.events:
        report.add("events", None, "final event must be TaskComplete (event list empty)")
    else:
        if trace.events[-1].uid != "TaskComplete":
            report.add("events", len(trace.events) - 1, "final event must be TaskComplete")
    open_contacts: set[tuple[int, int]] = set()
    for i, event in enumerate(trace.events):
        if i and event.time < trace.events[i - 1].time:
            report.add("events", i, f"non-monotone event time at index {i}")
        if event.uid in ("CollisionStart", "CollisionEnd"):
            missing = [k for k in ("a_id", "b_id", "contact_points") if k not in event.parameters]
            if missing:
                report.add("events", i, f"{event.uid} missing parameters {missing}")
                continue
            pair = (event.parameters["a_id"], event.parameters["b_id"])
            pair = (min(pair), max(pair))
            if event.uid == "CollisionStart":
                if pair in open_contacts:
                    report.add("events", i, f"CollisionStart for already-open pair {pair}")
                open_contacts.add(pair)
            else:
                if pair not in open_contacts:
                    report.add("events", i, f"CollisionEnd without open CollisionStart for {pair}")
                open_contacts.discard(pair)
        elif event.uid == "TaskComplete":
            if not isinstance(event.parameters.get("success"), bool):
                report.add("events", i, "TaskComplete missing boolean success parameter")

    return report

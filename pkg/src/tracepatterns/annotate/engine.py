"""Annotation: run a library over a trace, producing the activation matrix
and the emitted event tuples."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..detector.interp import (
    DEFAULT_STEP_BUDGET,
    AnnotationContext,
    ContextEvent,
    DetectorRuntimeError,
    run_detector,
)
from ..trace.index import TraceIndex
from ..trace.jsonio import dumps_canonical
from ..trace.model import Trace
from .library import PatternLibrary, resolve_order


class AnnotationError(RuntimeError):
    def __init__(self, uid: str, cause: Exception):
        super().__init__(f"detector {uid!r} failed during annotation: {cause}")
        self.uid = uid
        self.cause = cause


@dataclass(frozen=True)
class AnnotationEvent:
    uid: str
    label: str
    time: float
    frame_index: int
    parameters: dict[str, Any]


@dataclass
class AnnotationMatrix:
    """Sparse N x J activation matrix plus the emitted event tuples."""

    n: int
    uids: list[str]
    columns: dict[str, list[int]]
    events: list[AnnotationEvent]
    pattern_index: dict[str, int] = field(default_factory=dict)
    detector_steps: dict[str, int] = field(default_factory=dict)
    detector_seconds: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.pattern_index:
            self.pattern_index = {uid: j for j, uid in enumerate(self.uids)}

    # metrics.AnnotationLike protocol
    @property
    def pattern_columns(self) -> Mapping[str, list[int]]:
        return self.columns

    @property
    def n_frames(self) -> int:
        return self.n

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, len(self.uids)), dtype=np.uint8)
        for uid, j in self.pattern_index.items():
            for i in self.columns.get(uid, ()):
                dense[i, j] = 1
        return dense


def annotate(trace: Trace | TraceIndex, library: PatternLibrary, strict: bool = True,
             step_budget: int = DEFAULT_STEP_BUDGET) -> AnnotationMatrix:
    """Run detectors in dependency order; each sees built-in events plus the
    events emitted by earlier detectors.

    strict=True propagates detector failures (evolution); strict=False fails
    only that column and records a warning (CLI robustness).
    """
    index = trace if isinstance(trace, TraceIndex) else TraceIndex(trace)
    order = resolve_order(library)
    ctx = AnnotationContext.from_trace(index.trace, index)
    for det in library:
        ctx.declare(det.uid, det.label)

    columns: dict[str, list[int]] = {}
    events: list[AnnotationEvent] = []
    steps: dict[str, int] = {}
    seconds: dict[str, float] = {}
    warnings: list[str] = []

    for uid in order:
        det = library.get(uid)
        try:
            emitted, elapsed, used = run_detector(det.program, index, ctx, step_budget)
        except DetectorRuntimeError as exc:
            if strict:
                raise AnnotationError(uid, exc) from exc
            warnings.append(f"{uid}: {exc}")
            columns[uid] = []
            continue
        steps[uid] = used
        seconds[uid] = elapsed
        frames = set()
        for ev in emitted:
            fi = index.frame_index(ev.time)
            frames.add(fi)
            events.append(AnnotationEvent(
                uid=uid, label=det.label, time=ev.time, frame_index=fi,
                parameters=ev.parameters))
            ctx.add(ContextEvent(ev.time, uid, det.label, ev.parameters), index)
        columns[uid] = sorted(frames)

    events.sort(key=lambda e: (e.time, e.label, dumps_canonical(e.parameters)))
    return AnnotationMatrix(
        n=index.n,
        uids=library.uids(),
        columns=columns,
        events=events,
        detector_steps=steps,
        detector_seconds=seconds,
        warnings=warnings,
    )


def render_annotations(matrix: AnnotationMatrix, library: PatternLibrary) -> str:
    """One line per emitted event, the serialization embedded in prompts."""
    lines = []
    for ev in sorted(matrix.events, key=lambda e: (e.time, e.label)):
        lines.append(f"t={ev.time:.3f} {ev.label} {dumps_canonical(ev.parameters)}")
    return "\n".join(lines)


def _rle(column: list[int]) -> list[list[int]]:
    runs = []
    for i in sorted(column):
        if runs and i == runs[-1][0] + runs[-1][1]:
            runs[-1][1] += 1
        else:
            runs.append([i, 1])
    return runs


def ast_to_json(matrix: AnnotationMatrix, trace_ref: str) -> str:
    """Annotated-trace export: events plus run-length-encoded columns."""
    doc = {
        "trace_ref": trace_ref,
        "n_frames": matrix.n,
        "events": [
            {
                "uid": ev.uid,
                "label": ev.label,
                "time": ev.time,
                "frame_index": ev.frame_index,
                "parameters": ev.parameters,
            }
            for ev in matrix.events
        ],
        "matrix": {uid: _rle(col) for uid, col in matrix.columns.items()},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def ast_from_json(document: str | bytes) -> AnnotationMatrix:
    doc = json.loads(document)
    columns = {
        uid: [i for start, length in runs for i in range(start, start + length)]
        for uid, runs in doc["matrix"].items()
    }
    events = [
        AnnotationEvent(
            uid=e["uid"], label=e["label"], time=e["time"],
            frame_index=e["frame_index"], parameters=e["parameters"])
        for e in doc["events"]
    ]
    return AnnotationMatrix(
        n=doc["n_frames"],
        uids=sorted(columns),
        columns=columns,
        events=events,
    )

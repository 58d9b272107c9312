"""Reward DSL evaluation: boolean satisfaction and dense partial credit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from ..annotate.engine import AnnotationMatrix
from ..annotate.library import PatternLibrary
from ..matching import identifier_matches, params_match
from ..trace.index import TraceIndex
from ..trace.model import (
    BUILTIN_EVENT_UIDS,
    SCENE_EXTENT,
    ObjectNotFoundError,
    Trace,
    object_lookup,
)
from .ast import (
    AfterNode,
    AndNode,
    CountNode,
    EventNode,
    NearbyAtNode,
    NotNode,
    ObjectIdNode,
    OrNode,
    RewardNode,
    render,
)

COUNT_SHAPING_CAP = 10.0


class RewardValidationError(ValueError):
    """Unknown identifier or unresolvable object reference; repair-friendly."""

    def __init__(self, message: str, known: list[str] | None = None):
        if known:
            message += f"\nknown identifiers: {', '.join(known)}"
        super().__init__(message)
        self.known = known or []


@dataclass(frozen=True)
class RewardEvent:
    time: float
    uid: str
    label: str | None
    parameters: dict[str, Any]


@dataclass
class EvalContext:
    """An annotated simulation trace as seen by reward programs."""

    trace: Trace
    index: TraceIndex
    events: list[RewardEvent]
    library: PatternLibrary = field(default_factory=PatternLibrary)
    after_swapped: bool = False
    _match_cache: dict = field(default_factory=dict)
    _present: tuple | None = None

    @classmethod
    def build(cls, trace: Trace, library: PatternLibrary | None = None,
              matrix: AnnotationMatrix | None = None,
              after_swapped: bool = False) -> "EvalContext":
        index = TraceIndex(trace)
        events = [RewardEvent(e.time, e.uid, None, e.parameters) for e in trace.events]
        if matrix is not None:
            for ev in matrix.events:
                events.append(RewardEvent(ev.time, ev.uid, ev.label, ev.parameters))
        events.sort(key=lambda e: e.time)
        return cls(trace=trace, index=index, events=events,
                   library=library or PatternLibrary(), after_swapped=after_swapped)

    def known_identifiers(self) -> list[str]:
        known = list(BUILTIN_EVENT_UIDS)
        for det in self.library:
            known.append(det.uid)
            known.append(det.label)
        return known

    def knows(self, identifier: str) -> bool:
        if identifier in BUILTIN_EVENT_UIDS:
            return True
        for det in self.library:
            if identifier == det.uid or identifier.lower() == det.label.lower():
                return True
        return False

    def matches(self, identifier: str, params: dict[str, Any] | None) -> list[RewardEvent]:
        key = (identifier, _freeze(params))
        cached = self._match_cache.get(key)
        if cached is not None:
            return cached
        resolved = _resolve_params(params, self.trace)
        out = [e for e in self.events
               if identifier_matches(identifier, e.uid, e.label)
               and params_match(resolved, e.parameters)]
        self._match_cache[key] = out
        return out

    def has_event(self, identifier: str) -> bool:
        """Fast path for parameterless EVENT queries."""
        present = self._present
        if present is None:
            uids = set()
            labels = set()
            for e in self.events:
                uids.add(e.uid)
                if e.label:
                    labels.add(e.label.lower())
            present = (uids, labels)
            self._present = present
        return identifier in present[0] or identifier.lower() in present[1]


def _freeze(value: Any) -> Any:
    if isinstance(value, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in value.items()))
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _resolve_params(params: dict[str, Any] | None, trace: Trace) -> dict[str, Any] | None:
    if not params:
        return params
    resolved = {}
    for key, value in params.items():
        if isinstance(value, ObjectIdNode):
            resolved[key] = _resolve_object(value, trace)
        else:
            resolved[key] = value
    return resolved


def _resolve_object(node: ObjectIdNode, trace: Trace) -> int:
    try:
        return object_lookup(trace.scene, node.color, node.shape)
    except ObjectNotFoundError as exc:
        raise RewardValidationError(
            f"OBJECT_ID: {exc}",
            known=[f"{o.color}/{o.type} (id {o.id})" for o in trace.scene]) from exc


def validate_program(node: RewardNode, ctx: EvalContext) -> None:
    """Check every referenced identifier and object against the context."""
    if isinstance(node, (AndNode, OrNode)):
        for child in node.children:
            validate_program(child, ctx)
        return
    if isinstance(node, NotNode):
        validate_program(node.child, ctx)
        return
    idents: list[str] = []
    if isinstance(node, EventNode):
        idents = [node.identifier]
        _resolve_params(node.params, ctx.trace)
    elif isinstance(node, AfterNode):
        idents = [node.first, node.second]
        _resolve_params(node.first_params, ctx.trace)
        _resolve_params(node.second_params, ctx.trace)
    elif isinstance(node, CountNode):
        idents = [node.identifier]
        _resolve_params(node.params, ctx.trace)
    elif isinstance(node, NearbyAtNode):
        if isinstance(node.obj, ObjectIdNode):
            _resolve_object(node.obj, ctx.trace)
    for ident in idents:
        if not ctx.knows(ident):
            raise RewardValidationError(
                f"unknown event identifier {ident!r}", known=ctx.known_identifiers())


def match_event(event: RewardEvent, identifier: str,
                params: dict[str, Any] | None = None) -> bool:
    """uid exact / label case-insensitive, all provided params must match."""
    return identifier_matches(identifier, event.uid, event.label) and params_match(
        params, event.parameters)


# --- boolean semantics -------------------------------------------------------


def _after_holds(node: AfterNode, ctx: EvalContext) -> bool:
    first, second = node.first, node.second
    first_params, second_params = node.first_params, node.second_params
    if ctx.after_swapped:
        first, second = second, first
        first_params, second_params = second_params, first_params
    later = ctx.matches(first, first_params)
    earlier = ctx.matches(second, second_params)
    for e_a in later:
        for e_b in earlier:
            delta = e_a.time - e_b.time
            if delta <= 0:
                continue
            if node.min_delta is not None and delta < node.min_delta:
                continue
            if node.max_delta is not None and delta > node.max_delta:
                continue
            return True
    return False


def _nearby_distance(node: NearbyAtNode, ctx: EvalContext) -> float:
    obj_id = node.obj
    if isinstance(obj_id, ObjectIdNode):
        obj_id = _resolve_object(obj_id, ctx.trace)
    pos = ctx.index.position_at_time(obj_id, node.t)
    if pos is None:
        raise RewardValidationError(
            f"NEARBY_AT references object id {obj_id}, not present in the scene",
            known=[f"{o.color}/{o.type} (id {o.id})" for o in ctx.trace.scene])
    return math.hypot(pos[0] - node.x, pos[1] - node.y)


def _count_actual(node: CountNode, ctx: EvalContext) -> int:
    return len(ctx.matches(node.identifier, node.params))


def eval_bool(node: RewardNode, ctx: EvalContext, _validated: bool = False) -> bool:
    if not _validated:
        validate_program(node, ctx)
    return _eval_bool(node, ctx)


def _eval_bool(node: RewardNode, ctx: EvalContext) -> bool:
    if isinstance(node, EventNode):
        if node.params is None:
            return ctx.has_event(node.identifier)
        return bool(ctx.matches(node.identifier, node.params))
    if isinstance(node, AndNode):
        return all(_eval_bool(c, ctx) for c in node.children)
    if isinstance(node, OrNode):
        return any(_eval_bool(c, ctx) for c in node.children)
    if isinstance(node, NotNode):
        return not _eval_bool(node.child, ctx)
    if isinstance(node, AfterNode):
        return _after_holds(node, ctx)
    if isinstance(node, CountNode):
        actual = _count_actual(node, ctx)
        if node.kind == "count":
            return actual == node.count
        if node.kind == "gt":
            return actual > node.count
        return actual < node.count
    if isinstance(node, NearbyAtNode):
        return _nearby_distance(node, ctx) <= node.threshold_strength * SCENE_EXTENT
    raise TypeError(f"not a boolean expression: {node!r}")


# --- dense partial credit ----------------------------------------------------


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def _nearby_grade(node: NearbyAtNode, ctx: EvalContext) -> float:
    distance = _nearby_distance(node, ctx)
    threshold = node.threshold_strength * SCENE_EXTENT
    excess = max(0.0, distance - threshold)
    return _clamp01(1.0 - math.log1p(excess) / math.log1p(SCENE_EXTENT))


def _count_grade(node: CountNode, ctx: EvalContext) -> float:
    actual = _count_actual(node, ctx)
    if node.kind == "count":
        deviation = abs(actual - node.count)
    elif node.kind == "gt":
        deviation = 0 if actual > node.count else node.count + 1 - actual
    else:
        deviation = 0 if actual < node.count else actual - (node.count - 1)
    return _clamp01(1.0 - math.log1p(deviation) / math.log1p(COUNT_SHAPING_CAP))


def _clause_score(node: RewardNode, ctx: EvalContext) -> float:
    if isinstance(node, NearbyAtNode):
        return _nearby_grade(node, ctx)
    if isinstance(node, CountNode):
        return _count_grade(node, ctx)
    return 1.0 if _eval_bool(node, ctx) else 0.0


@dataclass(frozen=True)
class ClauseReport:
    clause: str
    satisfied: bool
    score: float


@dataclass(frozen=True)
class RewardResult:
    satisfied: bool
    score: float
    per_clause: tuple[ClauseReport, ...]


def eval_partial(node: RewardNode, ctx: EvalContext, _validated: bool = False) -> float:
    return evaluate(node, ctx, _validated=_validated).score


def evaluate(node: RewardNode, ctx: EvalContext, _validated: bool = False) -> RewardResult:
    """Boolean satisfaction plus the dense score: a top-level AND averages
    its subclauses, graded leaves (NEARBY_AT, COUNT/GT/LT) contribute their
    shaped score, every other clause contributes 0/1."""
    if not _validated:
        validate_program(node, ctx)
    clauses = node.children if isinstance(node, AndNode) else (node,)
    reports = []
    for clause in clauses:
        reports.append(ClauseReport(
            clause=render(clause),
            satisfied=_eval_bool(clause, ctx),
            score=_clause_score(clause, ctx),
        ))
    score = sum(r.score for r in reports) / len(reports)
    satisfied = all(r.satisfied for r in reports)
    return RewardResult(satisfied=satisfied, score=score, per_clause=tuple(reports))

"""DetectorScript interpreter.

Total, sandboxed, deterministic: every parseable program terminates on every
valid trace (step budget), performs no I/O, and references to absent objects
evaluate to 0/false. Closed subexpressions are memoized per frame so the
temporal operators stay within budget.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Any

from ..matching import identifier_matches, params_match
from ..trace.index import TraceIndex
from ..trace.model import BUILTIN_EVENT_UIDS, SCENE_EXTENT, Trace
from .ast import (
    BinOp,
    Call,
    DetectorProgram,
    Literal,
    Name,
    Node,
    ParamMap,
    Quantifier,
    UnOp,
    iter_children,
)

DEFAULT_STEP_BUDGET = 1_000_000


class DetectorRuntimeError(RuntimeError):
    pass


class StepBudgetExceededError(DetectorRuntimeError):
    pass


class MissingDependencyError(DetectorRuntimeError):
    pass


@dataclass(frozen=True)
class EmittedEvent:
    time: float
    description: str
    parameters: dict[str, Any]


@dataclass
class ContextEvent:
    time: float
    uid: str
    label: str | None
    parameters: dict[str, Any]
    frame_index: int = -1


@dataclass
class AnnotationContext:
    """Events visible to a detector: built-ins plus previously evaluated
    library detectors' events, indexed by frame."""

    events: list[ContextEvent] = field(default_factory=list)
    by_frame: dict[int, list[ContextEvent]] = field(default_factory=dict)
    available_uids: set[str] = field(default_factory=set)
    available_labels: set[str] = field(default_factory=set)

    @classmethod
    def from_trace(cls, trace: Trace, index: TraceIndex | None = None) -> "AnnotationContext":
        index = index or TraceIndex(trace)
        ctx = cls()
        ctx.available_uids.update(BUILTIN_EVENT_UIDS)
        for event in trace.events:
            ctx.add(ContextEvent(event.time, event.uid, None, event.parameters), index)
        return ctx

    def add(self, event: ContextEvent, index: TraceIndex) -> None:
        event.frame_index = index.frame_index(event.time)
        self.events.append(event)
        self.by_frame.setdefault(event.frame_index, []).append(event)
        self.available_uids.add(event.uid)
        if event.label:
            self.available_labels.add(event.label.lower())

    def declare(self, uid: str, label: str | None = None) -> None:
        self.available_uids.add(uid)
        if label:
            self.available_labels.add(label.lower())

    def knows(self, identifier: str) -> bool:
        return identifier in self.available_uids or identifier.lower() in self.available_labels


def _closed_nodes(root: Node) -> set[int]:
    """ids of environment-independent subexpressions (safe to memoize per
    frame). A node qualifies when it has no free names at all: names bound
    by an enclosing quantifier still vary per witness, so any node that
    mentions one is excluded, while a quantifier that binds its own body is
    included."""
    closed: set[int] = set()

    def free(node: Node) -> set[str]:
        if isinstance(node, Name):
            return {node.ident}
        if isinstance(node, Quantifier):
            names = free(node.body) - {node.binding}
        else:
            names = set()
            for child in iter_children(node):
                names |= free(child)
        if not names:
            closed.add(id(node))
        return names

    free(root)
    return closed


class _Evaluator:
    def __init__(self, program: DetectorProgram, index: TraceIndex,
                 ctx: AnnotationContext, budget: int):
        self.program = program
        self.index = index
        self.ctx = ctx
        self.budget = budget
        self.steps = 0
        self.env: dict[str, int] = {}
        self.memo: dict[tuple[int, int], Any] = {}
        self.closed = _closed_nodes(program.where)
        for _, expr in program.emit:
            self.closed |= _closed_nodes(expr)

    def charge(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceededError(
                f"detector {self.program.name!r} exceeded step budget {self.budget}")

    def eval(self, node: Node, i: int) -> Any:
        key = None
        if id(node) in self.closed:
            key = (id(node), i)
            hit = self.memo.get(key, _MISS)
            if hit is not _MISS:
                return hit
        self.charge()
        value = self._eval(node, i)
        if key is not None:
            self.memo[key] = value
        return value

    def _eval(self, node: Node, i: int) -> Any:
        if isinstance(node, Literal):
            return node.value
        if isinstance(node, Name):
            return self.env.get(node.ident, _ABSENT_ID)
        if isinstance(node, UnOp):
            if node.op == "not":
                return not _truthy(self.eval(node.operand, i))
            return -_number(self.eval(node.operand, i))
        if isinstance(node, BinOp):
            return self._eval_binop(node, i)
        if isinstance(node, Quantifier):
            return self._eval_quantifier(node, i)
        if isinstance(node, ParamMap):
            return {k: self.eval(v, i) for k, v in node.entries}
        if isinstance(node, Call):
            return self._eval_call(node, i)
        raise DetectorRuntimeError(f"unhandled node {node!r}")

    def _eval_binop(self, node: BinOp, i: int) -> Any:
        op = node.op
        if op == "and":
            return _truthy(self.eval(node.left, i)) and _truthy(self.eval(node.right, i))
        if op == "or":
            return _truthy(self.eval(node.left, i)) or _truthy(self.eval(node.right, i))
        left = self.eval(node.left, i)
        right = self.eval(node.right, i)
        if op in ("==", "!="):
            eq = _loose_eq(left, right)
            return eq if op == "==" else not eq
        lf = _number(left)
        rf = _number(right)
        if op == "<":
            return lf < rf
        if op == "<=":
            return lf <= rf
        if op == ">":
            return lf > rf
        if op == ">=":
            return lf >= rf
        if op == "+":
            return lf + rf
        if op == "-":
            return lf - rf
        if op == "*":
            return lf * rf
        if op == "/":
            return lf / rf if rf != 0.0 else 0.0
        raise DetectorRuntimeError(f"unknown operator {op!r}")

    def _eval_quantifier(self, node: Quantifier, i: int) -> bool:
        candidates = self._filtered_objects(node.filter)
        saved = self.env.get(node.binding, _MISS)
        if node.kind == "exists":
            for oid in candidates:
                self.env[node.binding] = oid
                if _truthy(self.eval(node.body, i)):
                    # Keep the witness bound for later conjuncts / EMIT.
                    return True
            if saved is _MISS:
                self.env.pop(node.binding, None)
            else:
                self.env[node.binding] = saved
            return False
        result = True
        for oid in candidates:
            self.env[node.binding] = oid
            if not _truthy(self.eval(node.body, i)):
                result = False
                break
        if saved is _MISS:
            self.env.pop(node.binding, None)
        else:
            self.env[node.binding] = saved
        return result

    def _filtered_objects(self, filt: str) -> list[int]:
        scene = self.index.trace.scene
        if filt == "any":
            return [o.id for o in scene]
        if filt == "dynamic":
            return [o.id for o in scene if not o.static]
        if filt == "static":
            return [o.id for o in scene if o.static]
        if filt in ("red", "green", "blue", "black"):
            return [o.id for o in scene if o.color == filt]
        return [o.id for o in scene if o.type == filt]

    def _eval_call(self, node: Call, i: int) -> Any:
        func = node.func
        index = self.index
        if func == "contact":
            a = _obj_id(self.eval(node.args[0], i))
            b = _obj_id(self.eval(node.args[1], i))
            return index.in_contact(a, b, index.frame_time(i))
        if func == "speed":
            vx, vy = index.velocity_at_frame(_obj_id(self.eval(node.args[0], i)), i)
            return math.hypot(vx, vy)
        if func == "vel_x":
            return index.velocity_at_frame(_obj_id(self.eval(node.args[0], i)), i)[0]
        if func == "vel_y":
            return index.velocity_at_frame(_obj_id(self.eval(node.args[0], i)), i)[1]
        if func == "pos_x":
            return index.position_at_frame(_obj_id(self.eval(node.args[0], i)), i)[0]
        if func == "pos_y":
            return index.position_at_frame(_obj_id(self.eval(node.args[0], i)), i)[1]
        if func == "distance":
            pa = index.position_at_frame(_obj_id(self.eval(node.args[0], i)), i)
            pb = index.position_at_frame(_obj_id(self.eval(node.args[1], i)), i)
            return math.hypot(pa[0] - pb[0], pa[1] - pb[1])
        if func == "angle":
            return index.angle_at_frame(_obj_id(self.eval(node.args[0], i)), i)
        if func == "is_static":
            oid = _obj_id(self.eval(node.args[0], i))
            obj = index.scene_by_id.get(oid)
            return bool(obj.static) if obj is not None else False
        if func in ("grid_cell_x", "grid_cell_y"):
            oid = _obj_id(self.eval(node.args[0], i))
            g = max(1, int(_number(self.eval(node.args[1], i))))
            pos = index.position_at_frame(oid, i)
            coord = pos[0] if func == "grid_cell_x" else pos[1]
            cell = int(coord / (SCENE_EXTENT / g))
            return min(max(cell, 0), g - 1)
        if func == "event_active":
            uid = self.eval(node.args[0], i)
            filt = self.eval(node.args[1], i)
            for event in self.ctx.by_frame.get(i, ()):
                self.charge()
                if identifier_matches(uid, event.uid, event.label) and params_match(
                        filt, event.parameters):
                    return True
            return False
        if func == "delta":
            if i == 0:
                return 0.0
            return _number(self.eval(node.args[0], i)) - _number(self.eval(node.args[0], i - 1))
        if func == "sign_flip":
            if i == 0:
                return False
            return _number(self.eval(node.args[0], i)) * _number(self.eval(node.args[0], i - 1)) < 0.0
        if func == "rising_edge":
            now = _truthy(self.eval(node.args[0], i))
            if i == 0:
                return now
            return now and not _truthy(self.eval(node.args[0], i - 1))
        if func == "sustained":
            dur = _number(self.eval(node.args[1], i))
            k = max(1, round(dur * (index.n - 1)))
            if i + 1 < k:
                return False
            for j in range(i - k + 1, i + 1):
                if not _truthy(self.eval(node.args[0], j)):
                    return False
            return True
        if func == "within_after":
            if not _truthy(self.eval(node.args[0], i)):
                return False
            window = _number(self.eval(node.args[2], i))
            t_i = index.frame_time(i)
            for j in range(i, -1, -1):
                if t_i - index.frame_time(j) > window:
                    break
                if _truthy(self.eval(node.args[1], j)):
                    return True
            return False
        if func == "count_since":
            t0 = _number(self.eval(node.args[1], i))
            count = 0
            for j in range(0, i + 1):
                if index.frame_time(j) >= t0 and _truthy(self.eval(node.args[0], j)):
                    count += 1
            return count
        if func == "variance":
            window = _number(self.eval(node.args[1], i))
            k = max(2, round(window * (index.n - 1)))
            lo = max(0, i - k + 1)
            values = [_number(self.eval(node.args[0], j)) for j in range(lo, i + 1)]
            mean = sum(values) / len(values)
            return sum((v - mean) ** 2 for v in values) / len(values)
        raise DetectorRuntimeError(f"unknown primitive {func!r}")


_MISS = object()
_ABSENT_ID = -(10**9)  # names with no binding resolve to a never-present id


def _truthy(value: Any) -> bool:
    return bool(value)


def _number(value: Any) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, (int, float)):
        return float(value)
    return 0.0


def _obj_id(value: Any) -> int:
    if isinstance(value, bool):
        return _ABSENT_ID
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return _ABSENT_ID


def _loose_eq(a: Any, b: Any) -> bool:
    if isinstance(a, str) and isinstance(b, str):
        return a.lower() == b.lower()
    if isinstance(a, (int, float, bool)) and isinstance(b, (int, float, bool)):
        return _number(a) == _number(b)
    return a == b


def _canonical_param(value: Any) -> Any:
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def run_detector(
    program: DetectorProgram,
    trace: Trace | TraceIndex,
    context: AnnotationContext | None = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[list[EmittedEvent], float, int]:
    """Evaluate a detector over every frame.

    Returns (events, elapsed wall seconds, interpreter steps). Events are
    time-sorted and deduplicated on (time, parameters), keeping the first.
    """
    index = trace if isinstance(trace, TraceIndex) else TraceIndex(trace)
    ctx = context or AnnotationContext.from_trace(index.trace, index)
    for dep in program.depends_on:
        if not ctx.knows(dep):
            raise MissingDependencyError(
                f"detector {program.name!r} depends on unavailable event {dep!r}")
    started = time.perf_counter()
    ev = _Evaluator(program, index, ctx, step_budget)
    events: list[EmittedEvent] = []
    seen: set[tuple[float, str]] = set()
    for i in range(index.n):
        ev.env.clear()
        if _truthy(ev.eval(program.where, i)):
            params = {}
            for key, expr in program.emit:
                value = _canonical_param(ev.eval(expr, i))
                if value == _ABSENT_ID:
                    value = None
                params[key] = value
            t = index.frame_time(i)
            dedup_key = (t, json.dumps(params, sort_keys=True, default=str))
            if dedup_key in seen:
                continue
            seen.add(dedup_key)
            events.append(EmittedEvent(time=t, description=program.name, parameters=params))
    elapsed = time.perf_counter() - started
    return events, elapsed, ev.steps

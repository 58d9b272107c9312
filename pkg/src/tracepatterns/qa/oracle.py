"""Deterministic question templates over traces.

Each template computes its answer exactly from the recorded trace (and the
annotation matrix for the {PATTERN} templates). All times are normalized.
"moving" means speed above the shared MOVING_SPEED threshold; collision
questions between "moving objects" read as dynamic-vs-dynamic contacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

from ..annotate.engine import AnnotationMatrix
from ..trace.index import TraceIndex
from ..trace.model import FLOOR_ID, Trace, WALL_IDS

MOVING_SPEED = 0.5

WALLS_ONLY = (-2, -3, -4)


class TemplateArgumentError(ValueError):
    pass


@dataclass(frozen=True)
class QuestionInstance:
    template_id: str
    arguments: dict[str, Any]

    @property
    def answer_type(self) -> str:
        return TEMPLATES[self.template_id].answer_type

    def text(self) -> str:
        return TEMPLATES[self.template_id].text.format(**self.arguments)


@dataclass(frozen=True)
class Template:
    template_id: str
    answer_type: str  # count | object-id | percentage | yes-no | object-set
    text: str
    needs_ast: bool
    compute: Callable[[TraceIndex, AnnotationMatrix | None, dict[str, Any]], Any]
    arg_names: tuple[str, ...] = field(default=())


def _color_id(index: TraceIndex, color: str) -> int:
    ids = sorted(o.id for o in index.trace.scene if o.color == color)
    if not ids:
        raise TemplateArgumentError(f"no {color} object in scene")
    return ids[0]


def _percentage(count: int, n: int) -> float:
    return 100.0 * count / n


def _open_partners(index: TraceIndex, oid: int, t: float) -> list[int]:
    return index.contact_partners(oid, t)


def _frames_where(index: TraceIndex, predicate) -> int:
    return sum(1 for i in range(index.n) if predicate(index.frame_time(i), i))


def _moving_ids_at(index: TraceIndex, i: int) -> list[int]:
    out = []
    for oid in index.dynamic_ids:
        vx, vy = index.velocity_at_frame(oid, i)
        if math.hypot(vx, vy) > MOVING_SPEED:
            out.append(oid)
    return out


# --- template implementations ----------------------------------------------


def _c1(index, ast, args):
    oid = _color_id(index, args["color"])
    t0, t1 = args["t0"], args["t1"]
    partners = set()
    for (a, b), intervals in index.contact_intervals.items():
        if oid not in (a, b):
            continue
        other = b if a == oid else a
        for start, end in intervals:
            if start <= t1 and (end >= t0):
                partners.add(other)
                break
    return len(partners)


def _c2(index, ast, args):
    if ast is None:
        raise TemplateArgumentError("pattern templates require an annotation matrix")
    uid = args["pattern"]
    ids = set()
    for ev in ast.events:
        if ev.uid != uid:
            continue
        for value in ev.parameters.values():
            if isinstance(value, int) and not isinstance(value, bool):
                ids.add(value)
    return sorted(ids)


def _c3(index, ast, args):
    oid = _color_id(index, args["color"])
    me = index.position_at_frame(oid, 0) if index.is_dynamic(oid) else (
        index.static_center[oid].x, index.static_center[oid].y)
    best = None
    best_d = None
    for obj in sorted(index.trace.scene, key=lambda o: o.id):
        if obj.id == oid:
            continue
        c = obj.center()
        d = math.hypot(c.x - me[0], c.y - me[1])
        if best_d is None or d < best_d - 1e-12:
            best, best_d = obj.id, d
    if best is None:
        raise TemplateArgumentError("scene has a single object")
    return best


def _segment_blocked_by(obj, p1: tuple[float, float], p2: tuple[float, float]) -> bool:
    if obj.type == "circle":
        c = obj.obj_params["center"]
        r = obj.obj_params["radius"]
        return _segment_point_distance(p1, p2, (c[0], c[1])) <= r
    for poly in obj.polygons():
        n = len(poly)
        if _point_in_polygon(((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2), poly):
            return True
        for i in range(n):
            if _segments_intersect(p1, p2, poly[i], poly[(i + 1) % n]):
                return True
    return False


def _segment_point_distance(a, b, p) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    abx, aby = bx - ax, by - ay
    denom = abx * abx + aby * aby
    if denom < 1e-18:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * abx + (py - ay) * aby) / denom))
    return math.hypot(px - (ax + abx * t), py - (ay + aby * t))


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)

    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return False


def _point_in_polygon(p, poly) -> bool:
    inside = True
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0) < 0:
            inside = False
    return inside


def _c4(index, ast, args):
    a = _color_id(index, args["color_a"])
    b = _color_id(index, args["color_b"])
    pa = index.trace.scene_object(a).center()
    pb = index.trace.scene_object(b).center()
    for obj in sorted(index.trace.scene, key=lambda o: o.id):
        if obj.id in (a, b):
            continue
        if _segment_blocked_by(obj, (pa.x, pa.y), (pb.x, pb.y)):
            return obj.id
    return None


def _c5(index, ast, args):
    best, best_d = None, -1.0
    for obj in sorted(index.trace.scene, key=lambda o: o.id):
        total = 0.0
        if index.is_dynamic(obj.id):
            pos = index.pos[obj.id]
            for i in range(1, index.n):
                total += math.hypot(pos[i, 0] - pos[i - 1, 0], pos[i, 1] - pos[i - 1, 1])
        if total > best_d + 1e-12:
            best, best_d = obj.id, total
    return best


def _c6(index, ast, args):
    best, best_s = None, -1.0
    for obj in sorted(index.trace.scene, key=lambda o: o.id):
        top = 0.0
        if index.is_dynamic(obj.id):
            for i in range(index.n):
                vx, vy = index.velocity_at_frame(obj.id, i)
                top = max(top, math.hypot(vx, vy))
        if top > best_s + 1e-12:
            best, best_s = obj.id, top
    return best


def _c7(index, ast, args):
    oid = _color_id(index, args["color"])
    for event in index.trace.events:
        if event.uid != "CollisionStart":
            continue
        a, b = event.parameters["a_id"], event.parameters["b_id"]
        if oid == a:
            return b
        if oid == b:
            return a
    return None


def _c8(index, ast, args):
    oid = _color_id(index, args["color"])
    return _percentage(
        _frames_where(index, lambda t, i: bool(_open_partners(index, oid, t))), index.n)


def _c9(index, ast, args):
    oid = _color_id(index, args["color"])
    return _percentage(
        _frames_where(index, lambda t, i: any(
            p not in WALL_IDS for p in _open_partners(index, oid, t))), index.n)


def _c10(index, ast, args):
    oid = _color_id(index, args["color"])
    return _percentage(
        _frames_where(index, lambda t, i: index.in_contact(oid, FLOOR_ID, t)), index.n)


def _c11(index, ast, args):
    dyn = set(index.dynamic_ids)

    def any_dyn_contact(t, i):
        return any(a in dyn and b in dyn for a, b in index.contacts_at(t))

    return _percentage(_frames_where(index, any_dyn_contact), index.n)


def _c12(index, ast, args):
    oid = _color_id(index, args["color"])
    return _percentage(
        _frames_where(index, lambda t, i: not _open_partners(index, oid, t)), index.n)


def _c13(index, ast, args):
    return _percentage(
        _frames_where(index, lambda t, i: bool(_moving_ids_at(index, i))), index.n)


def _c14(index, ast, args):
    return _percentage(
        _frames_where(index, lambda t, i: not _moving_ids_at(index, i)), index.n)


def _c15(index, ast, args):
    a = _color_id(index, args["color_a"])
    b = _color_id(index, args["color_b"])
    return _percentage(
        _frames_where(index, lambda t, i: index.in_contact(a, b, t)), index.n)


def _c16(index, ast, args):
    oid = _color_id(index, args["color"])
    return _percentage(
        _frames_where(index, lambda t, i: any(
            index.in_contact(oid, w, t) for w in WALLS_ONLY)), index.n)


def _c17(index, ast, args):
    oid = _color_id(index, args["color"])
    statics = {o.id for o in index.trace.scene if o.static}

    def touching_static(t, i):
        return any(p in statics for p in _open_partners(index, oid, t))

    return _percentage(_frames_where(index, touching_static), index.n)


def _future_collision_events(index, split):
    for event in index.trace.events:
        if event.uid == "CollisionStart" and event.time > split:
            yield event.parameters["a_id"], event.parameters["b_id"]


def _c18(index, ast, args):
    a = _color_id(index, args["color_a"])
    b = _color_id(index, args["color_b"])
    return any({a, b} == {x, y} for x, y in _future_collision_events(index, args["split"]))


def _touches_in_future(index, a, b, split):
    intervals = index.contact_intervals.get((min(a, b), max(a, b)), ())
    for start, end in intervals:
        if end > split:
            return True
    return False


def _c19(index, ast, args):
    oid = _color_id(index, args["color"])
    green = _color_id(index, "green")
    if oid == green:
        raise TemplateArgumentError("ball color equals target color")
    return _touches_in_future(index, oid, green, args["split"])


def _c20(index, ast, args):
    oid = _color_id(index, args["color"])
    blue = _color_id(index, "blue")
    if oid == blue:
        raise TemplateArgumentError("ball color equals target color")
    return _touches_in_future(index, oid, blue, args["split"])


def _c21(index, ast, args):
    dyn = set(index.dynamic_ids)
    return any(a in dyn and b in dyn
               for a, b in _future_collision_events(index, args["split"]))


def _c22(index, ast, args):
    if ast is None:
        raise TemplateArgumentError("pattern templates require an annotation matrix")
    return any(ev.uid == args["pattern"] and ev.time > args["split"]
               for ev in ast.events)


def _c23(index, ast, args):
    oid = _color_id(index, args["color"])
    split = args["split"]
    intervals = index.contact_intervals.get((FLOOR_ID, oid), ())
    touched_before = any(start <= split for start, _ in intervals)
    touches_after = any(start > split for start, _ in intervals)
    return (not touched_before) and touches_after


def _c24(index, ast, args):
    oid = _color_id(index, args["color"])
    return any(oid in pair and (set(pair) & set(WALLS_ONLY))
               for pair in _future_collision_events(index, args["split"]))


def _crosses_line(index, oid, coord_index, level, split):
    if not index.is_dynamic(oid):
        return False
    pos = index.pos[oid]
    for i in range(1, index.n):
        if index.frame_time(i) <= split:
            continue
        a = pos[i - 1, coord_index] - level
        b = pos[i, coord_index] - level
        if a * b < 0 or (b == 0 and a != 0):
            return True
    return False


def _c25(index, ast, args):
    oid = _color_id(index, args["color"])
    green = index.trace.scene_object(_color_id(index, "green"))
    return _crosses_line(index, oid, 0, green.center().x, args["split"])


def _c26(index, ast, args):
    oid = _color_id(index, args["color"])
    blue = index.trace.scene_object(_color_id(index, "blue"))
    return _crosses_line(index, oid, 1, blue.center().y, args["split"])


def _c27(index, ast, args):
    return any(
        index.frame_time(i) > args["split"] and not _moving_ids_at(index, i)
        for i in range(index.n))


TEMPLATES: dict[str, Template] = {}


def _register(template_id, answer_type, text, compute, arg_names, needs_ast=False):
    TEMPLATES[template_id] = Template(
        template_id=template_id, answer_type=answer_type, text=text,
        needs_ast=needs_ast, compute=compute, arg_names=tuple(arg_names))


_register("C1", "count",
          "How many distinct objects does the {color} ball touch between {t0} and {t1}?",
          _c1, ("color", "t0", "t1"))
_register("C2", "object-set", "{pattern} happened with which object(s)?",
          _c2, ("pattern",), needs_ast=True)
_register("C3", "object-id", "Which object is closest to the {color} ball at the start?",
          _c3, ("color",))
_register("C4", "object-id",
          "Which object blocks the direct line between {color_a} and {color_b} (if any)?",
          _c4, ("color_a", "color_b"))
_register("C5", "object-id",
          "Which object travels the greatest total distance during the simulation?",
          _c5, ())
_register("C6", "object-id",
          "Which object reaches the highest maximum speed during the simulation?",
          _c6, ())
_register("C7", "object-id",
          "What is the first object that the {color} ball collides with?",
          _c7, ("color",))
_register("C8", "percentage",
          "What percentage of frames contain at least one collision involving the {color} "
          "ball (with any object or wall)?", _c8, ("color",))
_register("C9", "percentage",
          "What percentage of frames contain a collision between the {color} ball and any "
          "other object (excluding walls and ground)?", _c9, ("color",))
_register("C10", "percentage",
          "What percentage of frames contain a collision between the {color} ball and the "
          "ground?", _c10, ("color",))
_register("C11", "percentage",
          "What percentage of frames contain at least one collision between any two moving "
          "objects (excluding walls and ground)?", _c11, ())
_register("C12", "percentage",
          "What percentage of frames does the {color} ball spend in free fall (not touching "
          "any object or wall)?", _c12, ("color",))
_register("C13", "percentage",
          "What percentage of frames have at least one object moving in the scene?",
          _c13, ())
_register("C14", "percentage",
          "What percentage of frames have no objects moving in the scene?", _c14, ())
_register("C15", "percentage",
          "What percentage of frames do the {color_a} and {color_b} objects touch each "
          "other?", _c15, ("color_a", "color_b"))
_register("C16", "percentage",
          "What percentage of frames is the {color} ball in contact with any wall (left, "
          "right, or top boundary)?", _c16, ("color",))
_register("C17", "percentage",
          "What percentage of frames is the {color} ball in contact with any static "
          "obstacle (excluding ground and walls)?", _c17, ("color",))
_register("C18", "yes-no",
          "Given the first part of the video, will any collision between a {color_a} and "
          "{color_b} object occur in the future?", _c18, ("color_a", "color_b", "split"))
_register("C19", "yes-no",
          "Given the first part of the video, will the {color} ball ever touch the green "
          "object in the future?", _c19, ("color", "split"))
_register("C20", "yes-no",
          "Given the first part of the video, will the {color} ball ever touch the blue "
          "object in the future?", _c20, ("color", "split"))
_register("C21", "yes-no",
          "Given the first part of the video, will there be any collision at all between "
          "moving objects (excluding walls and ground) in the future?", _c21, ("split",))
_register("C22", "yes-no",
          "Given the first part of the video, will {pattern} happen in the second part?",
          _c22, ("pattern", "split"), needs_ast=True)
_register("C23", "yes-no",
          "Given the first part of the video, will the {color} ball touch the ground for "
          "the first time in the future?", _c23, ("color", "split"))
_register("C24", "yes-no",
          "Given the first part of the video, will the {color} ball collide with any wall "
          "in the future?", _c24, ("color", "split"))
_register("C25", "yes-no",
          "Given the first part of the video, will the {color} ball cross the vertical "
          "line through the green object's initial position in the future?",
          _c25, ("color", "split"))
_register("C26", "yes-no",
          "Given the first part of the video, will the {color} ball cross the horizontal "
          "line through the blue object's initial position in the future?",
          _c26, ("color", "split"))
_register("C27", "yes-no",
          "Given the first part of the video, will there be any frame in the future in "
          "which no objects are moving in the scene?", _c27, ("split",))


def answer(question: QuestionInstance, trace: Trace | TraceIndex,
           ast: AnnotationMatrix | None = None) -> Any:
    """Exact answer for a question instance; pure in (question, trace, ast)."""
    template = TEMPLATES.get(question.template_id)
    if template is None:
        raise TemplateArgumentError(f"unknown template {question.template_id!r}")
    missing = [a for a in template.arg_names if a not in question.arguments]
    if missing:
        raise TemplateArgumentError(
            f"{question.template_id} missing arguments {missing}")
    if template.needs_ast and ast is None:
        raise TemplateArgumentError(
            f"{question.template_id} requires an annotation matrix")
    index = trace if isinstance(trace, TraceIndex) else TraceIndex(trace)
    return template.compute(index, ast, question.arguments)

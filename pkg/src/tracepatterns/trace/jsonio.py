"""Trace JSON round-tripping.

The wire format is the contract between every module and the CLI:

    {"action": {"position": [x, y], "radius": r},
     "scene":  {"objects": [...]},
     "frames": [{"time": t, "objects": [...]}, ...],
     "events": [{"time": t, "uid": "...", "parameters": {...}}, ...]}

Serialization is canonical: keys sorted, floats printed with 9 significant
digits, no whitespace. Byte equality of two serialized traces therefore
means structural equality, which the determinism checks rely on.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .model import (
    COLORS,
    SHAPE_KINDS,
    Action,
    Frame,
    SceneObject,
    Trace,
    TraceEvent,
    Vec2,
)


class TraceParseError(ValueError):
    """Malformed JSON; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class TraceSchemaError(ValueError):
    """Structurally valid JSON that violates the trace schema."""

    def __init__(self, path: str, expected: str, found: Any):
        super().__init__(f"{path}: expected {expected}, found {found!r}")
        self.path = path
        self.expected = expected


def format_float(x: float) -> str:
    """Canonical 9-significant-digit rendering; always reads back as float."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite float in trace document: {x!r}")
    s = format(float(x), ".9g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def round9(x: float) -> float:
    """Quantize to the canonical 9-significant-digit grid."""
    return float(format(float(x), ".9g"))


def dumps_canonical(value: Any) -> str:
    """Canonical JSON for any trace-schema value (dict/list/str/num/bool/None)."""
    parts: list[str] = []
    _emit(value, parts)
    return "".join(parts)


def _emit(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, dict):
        out.append("{")
        first = True
        for key in sorted(value):
            if not isinstance(key, str):
                raise ValueError(f"non-string key in trace document: {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key))
            out.append(":")
            _emit(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise ValueError(f"unserializable value in trace document: {value!r}")


def canonicalize(document: str | bytes) -> str:
    """Re-serialize an arbitrary trace JSON document into canonical bytes."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TraceParseError(exc.msg, exc.pos) from exc
    return dumps_canonical(data)


# --- object <-> dict conversion -------------------------------------------


def normalize_scene_object(obj: SceneObject) -> SceneObject:
    """Quantize floats to the canonical 9-digit grid so the object survives
    serialize/parse byte-for-byte."""
    params: dict[str, Any] = {}
    for key, value in obj.obj_params.items():
        if key == "center":
            params[key] = [round9(value[0]), round9(value[1])]
        elif key == "radius":
            params[key] = round9(value)
        elif key.startswith("polygon_"):
            params[key] = [[round9(v[0]), round9(v[1])] for v in value]
        else:
            params[key] = value
    return SceneObject(
        description=obj.description,
        id=obj.id,
        type=obj.type,
        color=obj.color,
        velocity=Vec2(round9(obj.velocity.x), round9(obj.velocity.y)),
        angle=round9(obj.angle),
        static=obj.static,
        obj_params=params,
    )


def scene_object_to_dict(obj: SceneObject) -> dict[str, Any]:
    return {
        "description": obj.description,
        "id": obj.id,
        "type": obj.type,
        "color": obj.color,
        "velocity": [obj.velocity.x, obj.velocity.y],
        "angle": obj.angle,
        "static": obj.static,
        "obj_params": obj.obj_params,
    }


def trace_to_document(trace: Trace) -> dict[str, Any]:
    return {
        "action": {
            "position": [trace.action.position.x, trace.action.position.y],
            "radius": trace.action.radius,
        },
        "scene": {"objects": [scene_object_to_dict(o) for o in trace.scene]},
        "frames": [
            {"time": f.time, "objects": [scene_object_to_dict(o) for o in f.objects]}
            for f in trace.frames
        ],
        "events": [
            {"time": e.time, "uid": e.uid, "parameters": e.parameters} for e in trace.events
        ],
    }


def serialize_trace(trace: Trace) -> str:
    return dumps_canonical(trace_to_document(trace))


def _require(data: Any, key: str, path: str) -> Any:
    if not isinstance(data, dict):
        raise TraceSchemaError(path, "object", type(data).__name__)
    if key not in data:
        raise TraceSchemaError(f"{path}.{key}", "present", "missing")
    return data[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceSchemaError(path, "number", value)
    return float(value)


def _vec2(value: Any, path: str) -> Vec2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise TraceSchemaError(path, "[x, y]", value)
    return Vec2(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


def _parse_scene_object(data: Any, path: str) -> SceneObject:
    kind = _require(data, "type", path)
    if kind not in SHAPE_KINDS:
        raise TraceSchemaError(f"{path}.type", f"one of {SHAPE_KINDS}", kind)
    color = _require(data, "color", path)
    if color not in COLORS:
        raise TraceSchemaError(f"{path}.color", f"one of {COLORS}", color)
    obj_id = _require(data, "id", path)
    if isinstance(obj_id, bool) or not isinstance(obj_id, int):
        raise TraceSchemaError(f"{path}.id", "integer", obj_id)
    static = _require(data, "static", path)
    if not isinstance(static, bool):
        raise TraceSchemaError(f"{path}.static", "boolean", static)
    params = _require(data, "obj_params", path)
    if not isinstance(params, dict):
        raise TraceSchemaError(f"{path}.obj_params", "object", params)
    if kind == "circle":
        if "center" not in params or "radius" not in params:
            raise TraceSchemaError(f"{path}.obj_params", "center and radius", sorted(params))
        _vec2(params["center"], f"{path}.obj_params.center")
        _number(params["radius"], f"{path}.obj_params.radius")
    else:
        if "polygon_0" not in params:
            raise TraceSchemaError(f"{path}.obj_params", "polygon_0", sorted(params))
        for key, poly in params.items():
            if not key.startswith("polygon_"):
                continue
            if not isinstance(poly, list) or len(poly) < 3:
                raise TraceSchemaError(f"{path}.obj_params.{key}", ">=3 vertices", poly)
            for i, vert in enumerate(poly):
                _vec2(vert, f"{path}.obj_params.{key}[{i}]")
    return SceneObject(
        description=str(_require(data, "description", path)),
        id=obj_id,
        type=kind,
        color=color,
        velocity=_vec2(_require(data, "velocity", path), f"{path}.velocity"),
        angle=_number(_require(data, "angle", path), f"{path}.angle"),
        static=static,
        obj_params=params,
    )


def serialize_scene(scene: list[SceneObject]) -> str:
    return dumps_canonical({"objects": [scene_object_to_dict(o) for o in scene]})


def parse_scene(document: str | bytes) -> list[SceneObject]:
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TraceParseError(exc.msg, exc.pos) from exc
    objects = _require(data, "objects", "$")
    if not isinstance(objects, list):
        raise TraceSchemaError("$.objects", "array", objects)
    return [_parse_scene_object(o, f"$.objects[{i}]") for i, o in enumerate(objects)]


def parse_trace(document: str | bytes) -> Trace:
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TraceParseError(exc.msg, exc.pos) from exc

    action_data = _require(data, "action", "$")
    action = Action(
        position=_vec2(_require(action_data, "position", "$.action"), "$.action.position"),
        radius=_number(_require(action_data, "radius", "$.action"), "$.action.radius"),
    )

    scene_data = _require(data, "scene", "$")
    objects_data = _require(scene_data, "objects", "$.scene")
    if not isinstance(objects_data, list):
        raise TraceSchemaError("$.scene.objects", "array", objects_data)
    scene = [_parse_scene_object(o, f"$.scene.objects[{i}]") for i, o in enumerate(objects_data)]

    frames_data = _require(data, "frames", "$")
    if not isinstance(frames_data, list):
        raise TraceSchemaError("$.frames", "array", frames_data)
    frames = []
    for i, frame in enumerate(frames_data):
        objs = _require(frame, "objects", f"$.frames[{i}]")
        if not isinstance(objs, list):
            raise TraceSchemaError(f"$.frames[{i}].objects", "array", objs)
        frames.append(
            Frame(
                time=_number(_require(frame, "time", f"$.frames[{i}]"), f"$.frames[{i}].time"),
                objects=[
                    _parse_scene_object(o, f"$.frames[{i}].objects[{j}]")
                    for j, o in enumerate(objs)
                ],
            )
        )

    events_data = _require(data, "events", "$")
    if not isinstance(events_data, list):
        raise TraceSchemaError("$.events", "array", events_data)
    events = []
    for i, event in enumerate(events_data):
        params = _require(event, "parameters", f"$.events[{i}]")
        if not isinstance(params, dict):
            raise TraceSchemaError(f"$.events[{i}].parameters", "object", params)
        events.append(
            TraceEvent(
                time=_number(_require(event, "time", f"$.events[{i}]"), f"$.events[{i}].time"),
                uid=str(_require(event, "uid", f"$.events[{i}]")),
                parameters=params,
            )
        )

    return Trace(action=action, scene=scene, frames=frames, events=events)

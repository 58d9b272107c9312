from .model import (
    BUILTIN_EVENT_UIDS,
    COLORS,
    FLOOR_ID,
    LEFT_WALL_ID,
    RIGHT_WALL_ID,
    SCENE_EXTENT,
    SHAPE_KINDS,
    TOP_WALL_ID,
    WALL_IDS,
    Action,
    Frame,
    ObjectNotFoundError,
    SceneObject,
    Trace,
    TraceEvent,
    Vec2,
    make_description,
    object_lookup,
)
from .jsonio import (
    TraceParseError,
    TraceSchemaError,
    canonicalize,
    dumps_canonical,
    format_float,
    parse_trace,
    round9,
    serialize_trace,
)
from .validate import ValidationReport, Violation, validate_trace
from .index import TraceIndex

__all__ = [
    "Action",
    "BUILTIN_EVENT_UIDS",
    "COLORS",
    "FLOOR_ID",
    "Frame",
    "LEFT_WALL_ID",
    "ObjectNotFoundError",
    "RIGHT_WALL_ID",
    "SCENE_EXTENT",
    "SHAPE_KINDS",
    "SceneObject",
    "TOP_WALL_ID",
    "Trace",
    "TraceEvent",
    "TraceIndex",
    "TraceParseError",
    "TraceSchemaError",
    "ValidationReport",
    "Vec2",
    "Violation",
    "WALL_IDS",
    "canonicalize",
    "dumps_canonical",
    "format_float",
    "make_description",
    "object_lookup",
    "parse_trace",
    "round9",
    "serialize_trace",
    "validate_trace",
]

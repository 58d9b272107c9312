"""In-memory trace schema: scenes, frames, events and the trace itself.

All types are frozen dataclasses (or NamedTuples) and safe to share across
threads. Field names deliberately mirror the wire format, so a parsed JSON
document and the in-memory object read the same.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple

SCENE_EXTENT = 256.0
SHAPE_KINDS = ("circle", "bar", "jar", "standingsticks")
COLORS = ("red", "green", "blue", "black")

ACTION_RADIUS_MIN = 4.0
ACTION_RADIUS_MAX = 32.0

# Implicit static boundary bodies. They never appear in a scene's object
# list but may appear as collision partners in events.
FLOOR_ID = -1
LEFT_WALL_ID = -2
RIGHT_WALL_ID = -3
TOP_WALL_ID = -4
WALL_IDS = (FLOOR_ID, LEFT_WALL_ID, RIGHT_WALL_ID, TOP_WALL_ID)
WALL_NAMES = {
    FLOOR_ID: "floor",
    LEFT_WALL_ID: "left-wall",
    RIGHT_WALL_ID: "right-wall",
    TOP_WALL_ID: "top-wall",
}

BUILTIN_EVENT_UIDS = ("CollisionStart", "CollisionEnd", "TaskComplete")


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def scaled(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def distance_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other[0], self.y - other[1])


@dataclass(frozen=True)
class Action:
    """Placement of the red ball: position in scene units, radius in [4, 32]."""

    position: Vec2
    radius: float


@dataclass(frozen=True)
class SceneObject:
    """One body. Circles carry center+radius in obj_params; every other kind
    carries one or more convex polygons (polygon_0, polygon_1, ...) as vertex
    lists in world coordinates."""

    description: str
    id: int
    type: str
    color: str
    velocity: Vec2
    angle: float
    static: bool
    obj_params: dict[str, Any]

    def polygons(self) -> list[list[Vec2]]:
        polys = []
        for i in range(len(self.obj_params)):
            key = f"polygon_{i}"
            if key not in self.obj_params:
                break
            polys.append([Vec2(float(p[0]), float(p[1])) for p in self.obj_params[key]])
        return polys

    def center(self) -> Vec2:
        """Geometric center: circle center, or the area centroid of the
        compound polygon for every other kind."""
        if self.type == "circle":
            c = self.obj_params["center"]
            return Vec2(float(c[0]), float(c[1]))
        return compound_centroid(self.polygons())


@dataclass(frozen=True)
class Frame:
    """State snapshot at a normalized time in [0, 1]; dynamic objects only."""

    time: float
    objects: list[SceneObject] = field(default_factory=list)


@dataclass(frozen=True)
class TraceEvent:
    time: float
    uid: str
    parameters: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Trace:
    action: Action
    scene: list[SceneObject]
    frames: list[Frame]
    events: list[TraceEvent]

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    def scene_object(self, obj_id: int) -> SceneObject | None:
        for obj in self.scene:
            if obj.id == obj_id:
                return obj
        return None


class ObjectNotFoundError(LookupError):
    """No scene object matches the requested color/shape filters."""


def polygon_area_centroid(vertices: list[Vec2]) -> tuple[float, Vec2]:
    """Signed area and centroid of a simple polygon (shoelace)."""
    a = 0.0
    cx = 0.0
    cy = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    a *= 0.5
    if abs(a) < 1e-12:
        # Degenerate polygon: fall back to the vertex mean.
        mx = sum(v.x for v in vertices) / n
        my = sum(v.y for v in vertices) / n
        return 0.0, Vec2(mx, my)
    return a, Vec2(cx / (6.0 * a), cy / (6.0 * a))


def compound_centroid(polygons: list[list[Vec2]]) -> Vec2:
    total = 0.0
    sx = 0.0
    sy = 0.0
    for poly in polygons:
        a, c = polygon_area_centroid(poly)
        a = abs(a)
        total += a
        sx += c.x * a
        sy += c.y * a
    if total < 1e-12:
        verts = [v for poly in polygons for v in poly]
        return Vec2(sum(v.x for v in verts) / len(verts), sum(v.y for v in verts) / len(verts))
    return Vec2(sx / total, sy / total)


def object_lookup(scene: list[SceneObject], color: str, shape_kind: str) -> int:
    """Lowest object id matching both filters; "any" matches everything.

    Raises ObjectNotFoundError when nothing matches.
    """
    if not scene:
        raise ObjectNotFoundError("object lookup on empty scene")
    best: int | None = None
    for obj in scene:
        if color != "any" and obj.color != color:
            continue
        if shape_kind != "any" and obj.type != shape_kind:
            continue
        if best is None or obj.id < best:
            best = obj.id
    if best is None:
        raise ObjectNotFoundError(f"no object with color={color!r} shape={shape_kind!r}")
    return best


def make_description(color: str, shape_kind: str, obj_id: int) -> str:
    return f"{color}-{shape_kind}-{obj_id}"

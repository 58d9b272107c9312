"""Parameterized scene templates.

Each template instantiates a family of one-ball task scenes: exactly one
green object, exactly one blue object, any number of black bodies, no red
(red is added by the action). Instantiation is deterministic in
(template_id, parameters, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from ..trace.jsonio import normalize_scene_object
from ..trace.model import SceneObject, Vec2, make_description


class UnknownTemplateError(KeyError):
    pass


@dataclass(frozen=True)
class SceneTemplate:
    template_id: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0


def circle_obj(oid: int, color: str, cx: float, cy: float, r: float,
               static: bool = False) -> SceneObject:
    return SceneObject(
        description=make_description(color, "circle", oid),
        id=oid,
        type="circle",
        color=color,
        velocity=Vec2(0.0, 0.0),
        angle=0.0,
        static=static,
        obj_params={"center": [cx, cy], "radius": r},
    )


def _rect(cx: float, cy: float, hw: float, hh: float) -> list[list[float]]:
    return [[cx - hw, cy - hh], [cx + hw, cy - hh], [cx + hw, cy + hh], [cx - hw, cy + hh]]


def bar_obj(oid: int, color: str, cx: float, cy: float, hw: float, hh: float,
            static: bool = False) -> SceneObject:
    return SceneObject(
        description=make_description(color, "bar", oid),
        id=oid,
        type="bar",
        color=color,
        velocity=Vec2(0.0, 0.0),
        angle=0.0,
        static=static,
        obj_params={"polygon_0": _rect(cx, cy, hw, hh)},
    )


def jar_obj(oid: int, color: str, cx: float, base_y: float, width: float,
            height: float, thickness: float, static: bool = True) -> SceneObject:
    """Open-top container: a base slab and two vertical walls."""
    hw = width / 2.0
    t = thickness
    base = _rect(cx, base_y + t / 2.0, hw, t / 2.0)
    wall_y = base_y + t + (height - t) / 2.0
    wall_hh = (height - t) / 2.0
    left = _rect(cx - hw + t / 2.0, wall_y, t / 2.0, wall_hh)
    right = _rect(cx + hw - t / 2.0, wall_y, t / 2.0, wall_hh)
    return SceneObject(
        description=make_description(color, "jar", oid),
        id=oid,
        type="jar",
        color=color,
        velocity=Vec2(0.0, 0.0),
        angle=0.0,
        static=static,
        obj_params={"polygon_0": base, "polygon_1": left, "polygon_2": right},
    )


def sticks_obj(oid: int, color: str, cx: float, base_y: float, spread: float,
               height: float, thickness: float, static: bool = True) -> SceneObject:
    """Two slanted legs meeting near the top (an upside-down V)."""
    t = thickness
    left = [
        [cx - spread, base_y],
        [cx - spread + t, base_y],
        [cx + t / 2.0, base_y + height],
        [cx - t / 2.0, base_y + height],
    ]
    right = [
        [cx + spread - t, base_y],
        [cx + spread, base_y],
        [cx + t / 2.0, base_y + height],
        [cx - t / 2.0, base_y + height],
    ]
    return SceneObject(
        description=make_description(color, "standingsticks", oid),
        id=oid,
        type="standingsticks",
        color=color,
        velocity=Vec2(0.0, 0.0),
        angle=0.0,
        static=static,
        obj_params={"polygon_0": left, "polygon_1": right},
    )


def _merged(defaults: dict, overrides: dict) -> dict:
    merged = dict(defaults)
    merged.update(overrides)
    return merged


def _ball_on_bar(params: dict, rng: random.Random) -> list[SceneObject]:
    p = _merged(
        {
            "platform_y": 150.0,
            "platform_half_w": 48.0,
            "green_radius": 10.0,
            "blue_half_w": 40.0,
        },
        params,
    )
    platform_cx = 80.0 + rng.uniform(0.0, 40.0)
    platform_y = p["platform_y"] + rng.uniform(-15.0, 15.0)
    green_r = p["green_radius"] + rng.uniform(-2.0, 2.0)
    green_dx = rng.uniform(0.1, 0.4) * p["platform_half_w"]
    # Blue is a floor-level catch bar from just right of the platform to the
    # right wall: a green ball knocked off the right edge lands on it.
    blue_left = platform_cx + p["platform_half_w"] + rng.uniform(2.0, 8.0)
    blue_cx = (blue_left + 250.0) / 2.0
    blue_hw = (250.0 - blue_left) / 2.0
    return [
        bar_obj(1, "black", platform_cx, platform_y, p["platform_half_w"], 5.0, static=True),
        circle_obj(2, "green", platform_cx + green_dx, platform_y + 5.0 + green_r, green_r),
        bar_obj(3, "blue", blue_cx, 5.0, blue_hw, 5.0, static=True),
    ]


def _lever(params: dict, rng: random.Random) -> list[SceneObject]:
    p = _merged(
        {
            "lever_half_w": 55.0,
            "fulcrum_height": 26.0,
            "green_radius": 9.0,
        },
        params,
    )
    cx = 110.0 + rng.uniform(0.0, 36.0)
    fh = p["fulcrum_height"] + rng.uniform(-4.0, 4.0)
    lever_hh = 4.0
    green_r = p["green_radius"] + rng.uniform(-1.5, 1.5)
    lever_cy = fh + lever_hh
    return [
        sticks_obj(1, "black", cx, 0.0, 16.0, fh, 8.0, static=True),
        bar_obj(2, "black", cx, lever_cy, p["lever_half_w"], lever_hh),
        circle_obj(3, "green", cx - p["lever_half_w"] + green_r + 4.0,
                   lever_cy + lever_hh + green_r, green_r),
        bar_obj(4, "blue", 30.0 + rng.uniform(0.0, 20.0), 5.0, 26.0, 5.0, static=True),
    ]


def _buckets3(params: dict, rng: random.Random) -> list[SceneObject]:
    """Launcher scene: green ball on a narrow pedestal, a chimney bar that
    restricts the strike corridor, and a row of three open buckets. A red
    ball dropped through the corridor grazes the green ball and launches it
    toward the buckets."""
    p = _merged(
        {
            "pedestal_x": 62.0,
            "bucket_width": 40.0,
            "bucket_height": 26.0,
            "wall_thickness": 5.0,
            "green_radius": 9.0,
        },
        params,
    )
    px = p["pedestal_x"]
    jitter = rng.uniform(-3.0, 3.0)
    centers = [108.0 + jitter, 166.0 + jitter, 224.0 + jitter]
    return [
        bar_obj(1, "black", px, 186.0, 5.0, 8.0, static=True),
        circle_obj(2, "green", px, 194.0 + p["green_radius"], p["green_radius"]),
        jar_obj(3, "black", centers[0], 0.0, p["bucket_width"], p["bucket_height"],
                p["wall_thickness"]),
        jar_obj(4, "black", centers[1], 0.0, p["bucket_width"], p["bucket_height"],
                p["wall_thickness"]),
        jar_obj(5, "black", centers[2], 0.0, p["bucket_width"], p["bucket_height"],
                p["wall_thickness"]),
        bar_obj(6, "blue", 18.0 + rng.uniform(0.0, 4.0), 120.0, 5.0, 40.0, static=True),
        bar_obj(7, "black", px - 24.0, 215.0, 3.0, 24.0, static=True),
    ]


def _wall_bounce(params: dict, rng: random.Random) -> list[SceneObject]:
    p = _merged({"green_radius": 10.0}, params)
    green_r = p["green_radius"] + rng.uniform(-2.0, 2.0)
    green_cx = 50.0 + rng.uniform(0.0, 30.0)
    shield_y = 120.0 + rng.uniform(-10.0, 10.0)
    return [
        circle_obj(1, "green", green_cx, green_r, green_r),
        bar_obj(2, "black", green_cx, shield_y, 34.0, 4.0, static=True),
        bar_obj(3, "blue", 250.0, 40.0, 5.0, 40.0, static=True),
    ]


def _stack(params: dict, rng: random.Random) -> list[SceneObject]:
    p = _merged({"box_half": 12.0, "levels": 2, "green_radius": 9.0}, params)
    h = p["box_half"]
    cx = 120.0 + rng.uniform(0.0, 24.0)
    levels = int(p["levels"])
    scene = []
    oid = 1
    for lvl in range(levels):
        scene.append(bar_obj(oid, "black", cx, h + lvl * 2.0 * h, h, h))
        oid += 1
    green_r = p["green_radius"]
    scene.append(circle_obj(oid, "green", cx, levels * 2.0 * h + green_r, green_r))
    oid += 1
    scene.append(bar_obj(oid, "blue", cx + h + 50.0 + rng.uniform(0.0, 20.0), 4.0,
                         30.0, 4.0, static=True))
    return scene


_REGISTRY: dict[str, Callable[[dict, random.Random], list[SceneObject]]] = {
    "ball_on_bar": _ball_on_bar,
    "lever": _lever,
    "buckets3": _buckets3,
    "wall_bounce": _wall_bounce,
    "stack": _stack,
}


def register_template(template_id: str,
                      builder: Callable[[dict, random.Random], list[SceneObject]]) -> None:
    _REGISTRY[template_id] = builder


def list_templates() -> list[str]:
    return sorted(_REGISTRY)


def build_scene(template: SceneTemplate) -> list[SceneObject]:
    try:
        builder = _REGISTRY[template.template_id]
    except KeyError:
        raise UnknownTemplateError(
            f"unknown template {template.template_id!r}; known: {list_templates()}"
        ) from None
    rng = random.Random(template.seed)
    scene = builder(dict(template.parameters), rng)
    scene = [normalize_scene_object(obj) for obj in scene]
    greens = sum(1 for o in scene if o.color == "green")
    blues = sum(1 for o in scene if o.color == "blue")
    reds = sum(1 for o in scene if o.color == "red")
    if greens != 1 or blues != 1 or reds != 0:
        raise ValueError(
            f"template {template.template_id!r} produced {greens} green, "
            f"{blues} blue, {reds} red objects"
        )
    return scene


def bucket_targets(scene: list[SceneObject]) -> list[Vec2]:
    """Interior resting point of each jar, left to right."""
    targets = []
    for obj in scene:
        if obj.type != "jar":
            continue
        base = obj.obj_params["polygon_0"]
        xs = [v[0] for v in base]
        ys = [v[1] for v in base]
        targets.append(Vec2((min(xs) + max(xs)) / 2.0, max(ys) + 9.0))
    targets.sort(key=lambda v: v.x)
    return targets

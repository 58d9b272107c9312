"""Shared test fixtures: synthetic trace builders and independent oracles."""

from __future__ import annotations

import math
import random

from tracepatterns.trace.jsonio import round9
from tracepatterns.trace.model import (
    Action,
    Frame,
    SceneObject,
    Trace,
    TraceEvent,
    Vec2,
    make_description,
)


def ball(oid: int, color: str, x: float, y: float, vx: float = 0.0, vy: float = 0.0,
         r: float = 8.0, static: bool = False) -> SceneObject:
    return SceneObject(
        description=make_description(color, "circle", oid),
        id=oid,
        type="circle",
        color=color,
        velocity=Vec2(round9(vx), round9(vy)),
        angle=0.0,
        static=static,
        obj_params={"center": [round9(x), round9(y)], "radius": float(r)},
    )


def simple_trace(positions: dict[int, list[tuple[float, float]]],
                 events: list[TraceEvent] | None = None,
                 colors: dict[int, str] | None = None,
                 velocities: dict[int, list[tuple[float, float]]] | None = None) -> Trace:
    """Hand-built trace: one frame per entry of the position lists."""
    colors = colors or {}
    ids = sorted(positions)
    n = len(positions[ids[0]])
    frames = []
    for i in range(n):
        t = round9(i / (n - 1))
        objs = []
        for oid in ids:
            x, y = positions[oid][i]
            vx, vy = (velocities or {}).get(oid, [(0.0, 0.0)] * n)[i]
            objs.append(ball(oid, colors.get(oid, "green" if oid % 2 else "blue"),
                             x, y, vx, vy))
        frames.append(Frame(t, objs))
    scene = [obj for obj in frames[0].objects]
    evs = list(events or [])
    if not evs or evs[-1].uid != "TaskComplete":
        evs.append(TraceEvent(1.0, "TaskComplete", {"success": False}))
    return Trace(Action(Vec2(10.0, 10.0), 5.0), scene, frames, evs)


def planted_trace(collide: bool, jx: float, jv: float, n: int = 60) -> Trace:
    """Two balls: one travels right and either strikes the waiting ball at
    mid-trace (reflecting) or passes far below it."""
    x0 = 20.0 + jx
    speed = 200.0 * (1.0 + jv)
    y1 = 128.0
    b2x, b2y = 128.0, (128.0 if collide else 40.0)
    frames: list[Frame] = []
    events: list[TraceEvent] = []
    hit_t: float | None = None
    for i in range(n):
        t = i / (n - 1)
        if collide and hit_t is None:
            if x0 + speed * t >= b2x - 16.0:
                hit_t = t
        if hit_t is not None and t >= hit_t:
            x = (x0 + speed * hit_t) - speed * (t - hit_t)
            vx = -speed
        else:
            x = x0 + speed * t
            vx = speed
        frames.append(Frame(round9(t), [
            ball(1, "green", x, y1, vx, 0.0),
            ball(2, "blue", b2x, b2y, 0.0, 0.0),
        ]))
        if collide and hit_t is not None and not events:
            events.append(TraceEvent(round9(hit_t), "CollisionStart",
                                     {"a_id": 1, "b_id": 2,
                                      "contact_points": [[112.0, 128.0]]}))
            end_t = min(1.0, hit_t + 2.0 / (n - 1))
            events.append(TraceEvent(round9(end_t), "CollisionEnd",
                                     {"a_id": 1, "b_id": 2, "contact_points": []}))
    events.append(TraceEvent(1.0, "TaskComplete", {"success": False}))
    scene = [ball(1, "green", x0, y1, speed, 0.0), ball(2, "blue", b2x, b2y)]
    return Trace(Action(Vec2(10.0, 10.0), 5.0), scene, frames, events)


def planted_family(k: int = 8) -> list[Trace]:
    """Alternating collision / no-collision traces with small jitter."""
    return [
        planted_trace(i % 2 == 0, jx=(i * 1.7) % 5, jv=((i * 0.013) % 0.05))
        for i in range(k)
    ]


def random_mini_trace(rng: random.Random, n_frames: int = 12,
                      n_objects: int = 3) -> Trace:
    """Small randomized trace with a plausible contact-event stream."""
    colors = ["green", "blue", "red", "black"]
    ids = list(range(1, n_objects + 1))
    paths = {}
    vels = {}
    for oid in ids:
        x = rng.uniform(20, 236)
        y = rng.uniform(20, 236)
        vx = rng.uniform(-80, 80)
        vy = rng.uniform(-80, 80)
        pts = []
        vv = []
        for i in range(n_frames):
            t = i / (n_frames - 1)
            pts.append((round9(min(max(x + vx * t, 0.0), 256.0)),
                        round9(min(max(y + vy * t, 0.0), 256.0))))
            vv.append((round9(vx), round9(vy)))
        paths[oid] = pts
        vels[oid] = vv
    color_map = {oid: colors[(oid - 1) % len(colors)] for oid in ids}
    events = []
    t_cursor = 0.0
    for _ in range(rng.randrange(0, 4)):
        a, b = rng.sample(ids + [-1, -2], 2)
        start = round9(min(t_cursor + rng.uniform(0.0, 0.3), 0.9))
        events.append(TraceEvent(start, "CollisionStart",
                                 {"a_id": min(a, b), "b_id": max(a, b),
                                  "contact_points": [[100.0, 100.0]]}))
        if rng.random() < 0.7:
            end = round9(min(start + rng.uniform(0.05, 0.3), 1.0))
            events.append(TraceEvent(end, "CollisionEnd",
                                     {"a_id": min(a, b), "b_id": max(a, b),
                                      "contact_points": []}))
            t_cursor = end
        else:
            t_cursor = start
    events.sort(key=lambda e: e.time)
    events.append(TraceEvent(1.0, "TaskComplete", {"success": rng.random() < 0.5}))
    return simple_trace(paths, events, color_map, vels)


# --- independent oracle helpers ---------------------------------------------


def brute_force_intervals(trace: Trace) -> dict[tuple[int, int], list[tuple[float, float]]]:
    """Second, independent reconstruction of open-contact intervals."""
    opened: dict[tuple[int, int], float] = {}
    out: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for event in trace.events:
        if event.uid == "CollisionStart":
            key = tuple(sorted((event.parameters["a_id"], event.parameters["b_id"])))
            opened.setdefault(key, event.time)
        elif event.uid == "CollisionEnd":
            key = tuple(sorted((event.parameters["a_id"], event.parameters["b_id"])))
            if key in opened:
                out.setdefault(key, []).append((opened.pop(key), event.time))
    for key, start in opened.items():
        out.setdefault(key, []).append((start, math.inf))
    return out


def brute_force_touching(trace: Trace, a: int, b: int, t: float) -> bool:
    for start, end in brute_force_intervals(trace).get(tuple(sorted((a, b))), []):
        if start <= t < end or (end == math.inf and t >= start):
            return True
    return False

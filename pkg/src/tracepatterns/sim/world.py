"""Deterministic rigid-body rollouts producing traces.

A world is flat numpy arrays over body slots: the four implicit boundary
walls, the scene objects, then the red ball added by the action. The kernel
(compiled or pure) advances the state frame by frame; this module owns
construction, event assembly and trace emission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..trace.jsonio import round9
from ..trace.model import (
    FLOOR_ID,
    LEFT_WALL_ID,
    RIGHT_WALL_ID,
    SCENE_EXTENT,
    TOP_WALL_ID,
    Action,
    Frame,
    SceneObject,
    Trace,
    TraceEvent,
    Vec2,
    make_description,
)
from . import _kernel
from ._kernel import reference as _ref

DENSITY = 1.0


class PlacementError(ValueError):
    """Red ball placement overlaps static geometry or leaves the scene."""


class SimulationDivergedError(RuntimeError):
    """Non-finite state encountered during integration."""


@dataclass(frozen=True)
class SimConfig:
    """Integration constants. gravity is 9.8 m/s^2 at 100 scene units per
    metre, pointing down; frame_dt is the real duration of one frame."""

    gravity: float = 980.0
    timestep_count: int = 300
    restitution: float = 0.2
    friction: float = 0.4
    substeps: int = 8
    frame_dt: float = 1.0 / 60.0
    velocity_cap: float = 800.0
    contact_tol: float = 0.5
    rest_threshold: float = 1.0

    def __post_init__(self):
        if self.timestep_count < 2:
            raise ValueError("timestep_count must be >= 2")
        for name in ("gravity", "restitution", "friction", "frame_dt"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative")
        if self.restitution > 1.0:
            raise ValueError("restitution must be <= 1")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


def circle_mass(radius: float) -> tuple[float, float]:
    m = DENSITY * math.pi * radius * radius
    return m, 0.5 * m * radius * radius


def polygon_mass(verts: list[Vec2]) -> tuple[float, Vec2, float]:
    """Mass, centroid and inertia about the centroid of a CCW convex polygon."""
    area = 0.0
    cx = 0.0
    cy = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        area += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    area *= 0.5
    if abs(area) < 1e-12:
        raise ValueError("degenerate polygon")
    cx /= 6.0 * area
    cy /= 6.0 * area
    inertia = 0.0
    for i in range(n):
        x0, y0 = verts[i][0] - cx, verts[i][1] - cy
        x1, y1 = verts[(i + 1) % n][0] - cx, verts[(i + 1) % n][1] - cy
        cross = x0 * y1 - x1 * y0
        inertia += cross * (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1)
    m = DENSITY * abs(area)
    return m, Vec2(cx, cy), DENSITY * abs(inertia) / 12.0


_WALL_MARGIN = 64.0
_WALL_RECTS = {
    FLOOR_ID: (-_WALL_MARGIN, -_WALL_MARGIN, SCENE_EXTENT + _WALL_MARGIN, 0.0),
    LEFT_WALL_ID: (-_WALL_MARGIN, -_WALL_MARGIN, 0.0, SCENE_EXTENT + _WALL_MARGIN),
    RIGHT_WALL_ID: (SCENE_EXTENT, -_WALL_MARGIN, SCENE_EXTENT + _WALL_MARGIN, SCENE_EXTENT + _WALL_MARGIN),
    TOP_WALL_ID: (-_WALL_MARGIN, SCENE_EXTENT, SCENE_EXTENT + _WALL_MARGIN, SCENE_EXTENT + _WALL_MARGIN),
}


def _rect_verts(x0: float, y0: float, x1: float, y1: float) -> list[Vec2]:
    return [Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)]


class World:
    """Array-of-slots world built from a scene plus the action's red ball."""

    def __init__(self, scene: list[SceneObject], action: Action, config: SimConfig):
        self.config = config
        self.objects: list[SceneObject | None] = []
        body_geoms: list[dict] = []

        for wall_id, rect in _WALL_RECTS.items():
            self.objects.append(None)
            body_geoms.append(
                {
                    "id": wall_id,
                    "static": True,
                    "circle": None,
                    "polys": [_rect_verts(*rect)],
                    "pos": None,
                    "angle": 0.0,
                    "vel": Vec2(0.0, 0.0),
                }
            )

        max_id = 0
        for obj in sorted(scene, key=lambda o: o.id):
            max_id = max(max_id, obj.id)
            self.objects.append(obj)
            geom = {
                "id": obj.id,
                "static": obj.static,
                "angle": obj.angle,
                "vel": obj.velocity,
            }
            if obj.type == "circle":
                geom["circle"] = (obj.center(), float(obj.obj_params["radius"]))
                geom["polys"] = []
            else:
                geom["circle"] = None
                geom["polys"] = obj.polygons()
            geom["pos"] = None
            body_geoms.append(geom)

        red_id = max_id + 1
        self.red_id = red_id
        red = SceneObject(
            description=make_description("red", "circle", red_id),
            id=red_id,
            type="circle",
            color="red",
            velocity=Vec2(0.0, 0.0),
            angle=0.0,
            static=False,
            obj_params={
                "center": [round9(action.position.x), round9(action.position.y)],
                "radius": round9(action.radius),
            },
        )
        self.objects.append(red)
        body_geoms.append(
            {
                "id": red_id,
                "static": False,
                "circle": (Vec2(action.position.x, action.position.y), action.radius),
                "polys": [],
                "pos": None,
                "angle": 0.0,
                "vel": Vec2(0.0, 0.0),
            }
        )

        nb = len(body_geoms)
        self.nb = nb
        self.pos = np.zeros((nb, 2))
        self.vel = np.zeros((nb, 2))
        self.angle = np.zeros(nb)
        self.angvel = np.zeros(nb)
        self.inv_mass = np.zeros(nb)
        self.inv_inertia = np.zeros(nb)
        self.body_id = np.zeros(nb, dtype=np.int64)

        fix_body: list[int] = []
        fix_type: list[int] = []
        fix_radius: list[float] = []
        fix_vstart: list[int] = []
        fix_vcount: list[int] = []
        verts_local: list[tuple[float, float]] = []
        # Local circle offsets are always zero (the circle center is the COM),
        # so only polygons need local vertex storage.
        for slot, geom in enumerate(body_geoms):
            self.body_id[slot] = geom["id"]
            theta0 = geom["angle"]
            if geom["circle"] is not None:
                center, radius = geom["circle"]
                com = center
                m, inertia = circle_mass(radius)
                fix_body.append(slot)
                fix_type.append(0)
                fix_radius.append(radius)
                fix_vstart.append(0)
                fix_vcount.append(0)
            else:
                pieces = [polygon_mass(p) for p in geom["polys"]]
                m = sum(p[0] for p in pieces)
                com = Vec2(
                    sum(p[0] * p[1].x for p in pieces) / m,
                    sum(p[0] * p[1].y for p in pieces) / m,
                )
                inertia = 0.0
                for pm, pc, pi in pieces:
                    d2 = (pc.x - com.x) ** 2 + (pc.y - com.y) ** 2
                    inertia += pi + pm * d2
                cos_t = math.cos(-theta0)
                sin_t = math.sin(-theta0)
                for poly in geom["polys"]:
                    fix_body.append(slot)
                    fix_type.append(1)
                    fix_radius.append(0.0)
                    fix_vstart.append(len(verts_local))
                    fix_vcount.append(len(poly))
                    for v in poly:
                        wx = v.x - com.x
                        wy = v.y - com.y
                        verts_local.append((cos_t * wx - sin_t * wy, sin_t * wx + cos_t * wy))
            self.pos[slot] = (com.x, com.y)
            self.vel[slot] = (geom["vel"].x, geom["vel"].y)
            self.angle[slot] = theta0
            if not geom["static"]:
                self.inv_mass[slot] = 1.0 / m
                self.inv_inertia[slot] = 1.0 / inertia if inertia > 0 else 0.0

        self.fix_body = np.array(fix_body, dtype=np.int64)
        self.fix_type = np.array(fix_type, dtype=np.int64)
        self.fix_radius = np.array(fix_radius)
        self.fix_vstart = np.array(fix_vstart, dtype=np.int64)
        self.fix_vcount = np.array(fix_vcount, dtype=np.int64)
        nv = max(len(verts_local), 1)
        self.verts_local = np.zeros((nv, 2))
        for i, (x, y) in enumerate(verts_local):
            self.verts_local[i] = (x, y)
        self.verts_world = np.zeros((nv, 2))
        self.pair_sep = np.zeros((nb, nb))
        self.pair_data = np.zeros((nb, nb, 5))
        self.active = np.zeros((nb, nb), dtype=np.uint8)
        self.last_cp = np.zeros((nb, nb, 2))
        nf = len(fix_body)
        self.man_buf = np.zeros((max(nf * nf, 1), 10))

        self.dynamic_slots = [s for s in range(nb) if self.inv_mass[s] > 0]
        self.slot_of_id = {int(self.body_id[s]): s for s in range(nb)}

    def scan(self, kernel) -> list[tuple]:
        return kernel.scan_contacts(
            self.pos, self.vel, self.angle, self.angvel, self.inv_mass, self.inv_inertia,
            self.fix_body, self.fix_type, self.fix_radius, self.fix_vstart, self.fix_vcount,
            self.verts_local, self.verts_world, self.pair_sep, self.pair_data,
            self.man_buf, self.config.contact_tol,
        )

    def step(self, kernel) -> list[tuple]:
        return kernel.step_world(
            self.pos, self.vel, self.angle, self.angvel, self.inv_mass, self.inv_inertia,
            self.fix_body, self.fix_type, self.fix_radius, self.fix_vstart, self.fix_vcount,
            self.verts_local, self.verts_world, self.active, self.last_cp,
            self.config.frame_dt, self.config.substeps, self.config.gravity,
            self.config.restitution, self.config.friction, self.config.contact_tol,
            self.config.velocity_cap, self.config.rest_threshold,
            self.pair_sep, self.pair_data, self.man_buf,
        )

    def snapshot_object(self, slot: int) -> SceneObject:
        """Current state of a dynamic body as a frame object."""
        obj = self.objects[slot]
        assert obj is not None
        px = self.pos[slot, 0]
        py = self.pos[slot, 1]
        theta = self.angle[slot]
        if obj.type == "circle":
            params = {
                "center": [round9(px), round9(py)],
                "radius": obj.obj_params["radius"],
            }
        else:
            params = {}
            c = math.cos(theta)
            s = math.sin(theta)
            poly_idx = 0
            for f in range(len(self.fix_body)):
                if self.fix_body[f] != slot:
                    continue
                start = int(self.fix_vstart[f])
                count = int(self.fix_vcount[f])
                verts = []
                for k in range(start, start + count):
                    lx = self.verts_local[k, 0]
                    ly = self.verts_local[k, 1]
                    verts.append([round9(px + c * lx - s * ly), round9(py + s * lx + c * ly)])
                params[f"polygon_{poly_idx}"] = verts
                poly_idx += 1
        return SceneObject(
            description=obj.description,
            id=obj.id,
            type=obj.type,
            color=obj.color,
            velocity=Vec2(round9(self.vel[slot, 0]), round9(self.vel[slot, 1])),
            angle=round9(theta),
            static=False,
            obj_params=params,
        )


def _check_placement(world: World, config: SimConfig) -> None:
    """Reject red-ball placements overlapping static geometry."""
    red_slot = world.nb - 1
    cx = world.pos[red_slot, 0]
    cy = world.pos[red_slot, 1]
    r = world.fix_radius[-1]
    out = [0.0] * 8
    _ref._update_world_verts(
        world.pos, world.angle, world.fix_body, world.fix_type,
        world.fix_vstart, world.fix_vcount, world.verts_local, world.verts_world,
        len(world.fix_body),
    )
    for f in range(len(world.fix_body)):
        slot = int(world.fix_body[f])
        if slot == red_slot or world.inv_mass[slot] > 0:
            continue
        if world.fix_type[f] == 0:
            _ref._collide_circle_circle(
                cx, cy, r, world.pos[slot, 0], world.pos[slot, 1], world.fix_radius[f], out)
        else:
            _ref._collide_circle_polygon(
                cx, cy, r, world.verts_world, int(world.fix_vstart[f]), int(world.fix_vcount[f]), out)
        if out[0] < 0.0:
            obj = world.objects[slot]
            name = obj.description if obj is not None else f"wall {int(world.body_id[slot])}"
            raise PlacementError(f"red ball at ({cx}, {cy}) r={r} overlaps {name}")


from ..trace.jsonio import normalize_scene_object as _normalize_scene_object


def simulate(scene: list[SceneObject], action: Action, config: SimConfig | None = None,
             kernel=None) -> Trace:
    """Roll out the scene with the red ball placed by `action`.

    Pure function of its inputs: repeated calls produce byte-identical
    serialized traces.
    """
    config = config or SimConfig()
    kernel = kernel or _kernel
    if not (0.0 <= action.position.x <= SCENE_EXTENT and 0.0 <= action.position.y <= SCENE_EXTENT):
        raise PlacementError(f"action position {action.position} outside [0, 256]")
    if not 4.0 <= action.radius <= 32.0:
        raise PlacementError(f"action radius {action.radius} outside [4, 32]")

    # Quantize scene floats up front so frames and the echoed scene agree
    # with the serialized form byte-for-byte.
    scene = [_normalize_scene_object(o) for o in scene]
    world = World(scene, action, config)
    _check_placement(world, config)

    n = config.timestep_count
    steps = n - 1
    sub_total = config.substeps

    events: list[TraceEvent] = []

    def emit(kind: int, a_slot: int, b_slot: int, t: float, npts: int,
             p1x: float, p1y: float, p2x: float, p2y: float,
             pose_a: tuple | None, pose_b: tuple | None) -> None:
        id_a = int(world.body_id[a_slot])
        id_b = int(world.body_id[b_slot])
        if id_a > id_b:
            id_a, id_b = id_b, id_a
            pose_a, pose_b = pose_b, pose_a
        points = [[round9(p1x), round9(p1y)]]
        if npts >= 2:
            points.append([round9(p2x), round9(p2y)])
        params = {"a_id": id_a, "b_id": id_b, "contact_points": points if kind else []}
        if kind and pose_a is not None and pose_b is not None:
            params["a_pose"] = [round9(pose_a[0]), round9(pose_a[1]), round9(pose_a[2])]
            params["b_pose"] = [round9(pose_b[0]), round9(pose_b[1]), round9(pose_b[2])]
        events.append(TraceEvent(
            time=round9(t),
            uid="CollisionStart" if kind else "CollisionEnd",
            parameters=params,
        ))

    # Initial contacts are starts at t=0.
    initial = world.scan(kernel)
    for a, b, npts, p1x, p1y, p2x, p2y in initial:
        if world.inv_mass[a] == 0.0 and world.inv_mass[b] == 0.0:
            continue
        world.active[a, b] = 1
        world.last_cp[a, b, 0] = p1x
        world.last_cp[a, b, 1] = p1y
        emit(1, a, b, 0.0, npts, p1x, p1y, p2x, p2y,
             (world.pos[a, 0], world.pos[a, 1], world.angle[a]),
             (world.pos[b, 0], world.pos[b, 1], world.angle[b]))

    frames = [Frame(time=0.0, objects=[world.snapshot_object(s) for s in world.dynamic_slots])]

    for k in range(1, n):
        records = world.step(kernel)
        for sub, kind, a, b, npts, p1x, p1y, p2x, p2y, ax, ay, aang, bx, by, bang in records:
            t = ((k - 1) + sub / sub_total) / steps
            emit(kind, a, b, t, npts, p1x, p1y, p2x, p2y, (ax, ay, aang), (bx, by, bang))
        if not np.all(np.isfinite(world.pos)):
            raise SimulationDivergedError(f"non-finite body position at frame {k}")
        frames.append(Frame(
            time=round9(k / steps),
            objects=[world.snapshot_object(s) for s in world.dynamic_slots],
        ))

    # Close the books against the final state so events match final geometry.
    final = world.scan(kernel)
    final_pairs = {(a, b) for a, b, *_ in final
                   if not (world.inv_mass[a] == 0.0 and world.inv_mass[b] == 0.0)}
    for a, b, npts, p1x, p1y, p2x, p2y in final:
        if (a, b) in final_pairs and not world.active[a, b]:
            emit(1, a, b, 1.0, npts, p1x, p1y, p2x, p2y,
                 (world.pos[a, 0], world.pos[a, 1], world.angle[a]),
                 (world.pos[b, 0], world.pos[b, 1], world.angle[b]))
            world.active[a, b] = 1
    for a in range(world.nb):
        for b in range(a + 1, world.nb):
            if world.active[a, b] and (a, b) not in final_pairs:
                emit(0, a, b, 1.0, 1, world.last_cp[a, b, 0], world.last_cp[a, b, 1],
                     0.0, 0.0, None, None)
                world.active[a, b] = 0

    green = [s for s in range(world.nb)
             if world.objects[s] is not None and world.objects[s].color == "green"]
    blue = [s for s in range(world.nb)
            if world.objects[s] is not None and world.objects[s].color == "blue"]
    success = any(
        (min(g, b), max(g, b)) in final_pairs for g in green for b in blue
    )
    events.append(TraceEvent(time=1.0, uid="TaskComplete", parameters={"success": success}))

    scene_out = [o for o in world.objects if o is not None]
    scene_out.sort(key=lambda o: o.id)
    return Trace(
        action=Action(
            position=Vec2(round9(action.position.x), round9(action.position.y)),
            radius=round9(action.radius),
        ),
        scene=scene_out,
        frames=frames,
        events=events,
    )


def task_success(trace: Trace) -> bool:
    """True iff a green-blue contact is open at the final frame."""
    green = [o.id for o in trace.scene if o.color == "green"]
    blue = [o.id for o in trace.scene if o.color == "blue"]
    open_pairs: set[tuple[int, int]] = set()
    for event in trace.events:
        if event.uid == "CollisionStart":
            a, b = event.parameters["a_id"], event.parameters["b_id"]
            open_pairs.add((min(a, b), max(a, b)))
        elif event.uid == "CollisionEnd":
            a, b = event.parameters["a_id"], event.parameters["b_id"]
            open_pairs.discard((min(a, b), max(a, b)))
    return any((min(g, b), max(g, b)) in open_pairs for g in green for b in blue)

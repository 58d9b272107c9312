"""Precomputed per-trace lookup structures.

Detectors, metrics and reward evaluation all need fast per-frame access to
object positions, velocities and the open-contact relation. Building these
arrays once per trace keeps the interpreters simple and the inner loops off
the dataclasses.
"""

from __future__ import annotations

import bisect
import math

import numpy as np

from .model import Trace, Vec2

# Contact intervals that persist to the end of the trace are closed with a
# sentinel beyond any normalized time.
OPEN_END = 2.0


class TraceIndex:
    def __init__(self, trace: Trace):
        self.trace = trace
        self.n = len(trace.frames)
        self.times = np.array([f.time for f in trace.frames], dtype=np.float64)
        self.scene_by_id = {obj.id: obj for obj in trace.scene}
        self.dynamic_ids = sorted(obj.id for obj in trace.scene if not obj.static)
        self.static_ids = sorted(obj.id for obj in trace.scene if obj.static)

        # Per-dynamic-object state arrays, indexed by frame.
        self.pos: dict[int, np.ndarray] = {}
        self.vel: dict[int, np.ndarray] = {}
        self.angle: dict[int, np.ndarray] = {}
        self.present: dict[int, np.ndarray] = {}
        for oid in self.dynamic_ids:
            self.pos[oid] = np.zeros((self.n, 2), dtype=np.float64)
            self.vel[oid] = np.zeros((self.n, 2), dtype=np.float64)
            self.angle[oid] = np.zeros(self.n, dtype=np.float64)
            self.present[oid] = np.zeros(self.n, dtype=bool)
        for i, frame in enumerate(trace.frames):
            for obj in frame.objects:
                if obj.id not in self.pos:
                    continue
                c = obj.center()
                self.pos[obj.id][i] = (c.x, c.y)
                self.vel[obj.id][i] = (obj.velocity.x, obj.velocity.y)
                self.angle[obj.id][i] = obj.angle
                self.present[obj.id][i] = True

        # Static objects sit at their scene pose for the whole trace.
        self.static_center: dict[int, Vec2] = {
            oid: self.scene_by_id[oid].center() for oid in self.static_ids
        }

        # Contact intervals from the built-in collision events:
        # pair (a, b) with a < b -> sorted list of (start, end].
        self.contact_intervals: dict[tuple[int, int], list[tuple[float, float]]] = {}
        open_start: dict[tuple[int, int], float] = {}
        for event in trace.events:
            if event.uid == "CollisionStart":
                pair = _pair_key(event.parameters["a_id"], event.parameters["b_id"])
                open_start.setdefault(pair, event.time)
            elif event.uid == "CollisionEnd":
                pair = _pair_key(event.parameters["a_id"], event.parameters["b_id"])
                start = open_start.pop(pair, None)
                if start is not None:
                    self.contact_intervals.setdefault(pair, []).append((start, event.time))
        for pair, start in open_start.items():
            self.contact_intervals.setdefault(pair, []).append((start, OPEN_END))
        for intervals in self.contact_intervals.values():
            intervals.sort()

    # -- frame/time mapping --------------------------------------------

    def frame_index(self, t: float) -> int:
        """Nearest frame index for a normalized time (round half up)."""
        i = int(math.floor(t * (self.n - 1) + 0.5))
        return min(max(i, 0), self.n - 1)

    def frame_time(self, i: int) -> float:
        return float(self.times[i])

    # -- object state --------------------------------------------------

    def is_dynamic(self, obj_id: int) -> bool:
        return obj_id in self.pos

    def position_at_frame(self, obj_id: int, i: int) -> tuple[float, float]:
        if obj_id in self.pos:
            if self.present[obj_id][i]:
                p = self.pos[obj_id][i]
                return float(p[0]), float(p[1])
            return 0.0, 0.0
        c = self.static_center.get(obj_id)
        if c is None:
            return 0.0, 0.0
        return c.x, c.y

    def velocity_at_frame(self, obj_id: int, i: int) -> tuple[float, float]:
        if obj_id in self.vel and self.present[obj_id][i]:
            v = self.vel[obj_id][i]
            return float(v[0]), float(v[1])
        return 0.0, 0.0

    def angle_at_frame(self, obj_id: int, i: int) -> float:
        if obj_id in self.angle and self.present[obj_id][i]:
            return float(self.angle[obj_id][i])
        if obj_id in self.static_center:
            return self.scene_by_id[obj_id].angle
        return 0.0

    def position_at_time(self, obj_id: int, t: float) -> tuple[float, float] | None:
        """Linearly interpolated position; static objects are constant.

        Returns None for ids absent from the scene.
        """
        if obj_id in self.static_center:
            c = self.static_center[obj_id]
            return c.x, c.y
        if obj_id not in self.pos:
            return None
        t = min(max(t, 0.0), 1.0)
        times = self.times
        j = bisect.bisect_right(times.tolist(), t)
        if j <= 0:
            p = self.pos[obj_id][0]
            return float(p[0]), float(p[1])
        if j >= self.n:
            p = self.pos[obj_id][-1]
            return float(p[0]), float(p[1])
        t0, t1 = float(times[j - 1]), float(times[j])
        p0, p1 = self.pos[obj_id][j - 1], self.pos[obj_id][j]
        if t1 <= t0:
            return float(p1[0]), float(p1[1])
        w = (t - t0) / (t1 - t0)
        return (
            float(p0[0]) + w * (float(p1[0]) - float(p0[0])),
            float(p0[1]) + w * (float(p1[1]) - float(p0[1])),
        )

    # -- contacts --------------------------------------------------------

    def in_contact(self, a: int, b: int, t: float) -> bool:
        intervals = self.contact_intervals.get(_pair_key(a, b))
        if not intervals:
            return False
        for start, end in intervals:
            if start <= t < end or (end == OPEN_END and t >= start):
                return True
            if start > t:
                break
        return False

    def contacts_at(self, t: float) -> list[tuple[int, int]]:
        out = []
        for pair, intervals in self.contact_intervals.items():
            for start, end in intervals:
                if start <= t < end or (end == OPEN_END and t >= start):
                    out.append(pair)
                    break
        return sorted(out)

    def contact_partners(self, obj_id: int, t: float) -> list[int]:
        partners = []
        for a, b in self.contacts_at(t):
            if a == obj_id:
                partners.append(b)
            elif b == obj_id:
                partners.append(a)
        return partners


def _pair_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)

"""Second, independent implementation of every question template.

Deliberately coded straight off the serialized trace document (dicts, not
the package's dataclasses or TraceIndex) so that agreement with the package
oracle is meaningful.
"""

from __future__ import annotations

import json
import math

from tracepatterns.trace import serialize_trace

MOVING = 0.5
WALLS = (-2, -3, -4)
FLOOR = -1


def _doc(trace):
    return json.loads(serialize_trace(trace))


def _intervals(doc):
    opened = {}
    out = {}
    for ev in doc["events"]:
        if ev["uid"] == "CollisionStart":
            k = tuple(sorted((ev["parameters"]["a_id"], ev["parameters"]["b_id"])))
            opened.setdefault(k, ev["time"])
        elif ev["uid"] == "CollisionEnd":
            k = tuple(sorted((ev["parameters"]["a_id"], ev["parameters"]["b_id"])))
            if k in opened:
                out.setdefault(k, []).append((opened.pop(k), ev["time"]))
    for k, start in opened.items():
        out.setdefault(k, []).append((start, math.inf))
    return out


def _touching(doc, a, b, t):
    for start, end in _intervals(doc).get(tuple(sorted((a, b))), []):
        if start <= t < end or (end is math.inf and t >= start):
            return True
    return False


def _color_id(doc, color):
    ids = sorted(o["id"] for o in doc["scene"]["objects"] if o["color"] == color)
    if not ids:
        raise ValueError(f"no {color}")
    return ids[0]


def _frame_times(doc):
    return [f["time"] for f in doc["frames"]]


def _partners_at(doc, oid, t):
    out = []
    for (a, b), ivs in _intervals(doc).items():
        if oid not in (a, b):
            continue
        for start, end in ivs:
            if start <= t < end or (end is math.inf and t >= start):
                out.append(b if a == oid else a)
                break
    return out


def _center(obj):
    if obj["type"] == "circle":
        return tuple(obj["obj_params"]["center"])
    xs, ys, areas = [], [], []
    # area-weighted centroid over the polygons
    cx_total, cy_total, a_total = 0.0, 0.0, 0.0
    for key, poly in obj["obj_params"].items():
        if not key.startswith("polygon_"):
            continue
        a = 0.0
        cx = 0.0
        cy = 0.0
        n = len(poly)
        for i in range(n):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % n]
            cr = x0 * y1 - x1 * y0
            a += cr
            cx += (x0 + x1) * cr
            cy += (y0 + y1) * cr
        a *= 0.5
        if abs(a) > 1e-12:
            cx /= 6.0 * a
            cy /= 6.0 * a
            cx_total += cx * abs(a)
            cy_total += cy * abs(a)
            a_total += abs(a)
    return (cx_total / a_total, cy_total / a_total)


def _positions(doc, oid):
    """Per-frame center; None when absent from the frame."""
    out = []
    for frame in doc["frames"]:
        found = None
        for obj in frame["objects"]:
            if obj["id"] == oid:
                found = _center(obj)
        out.append(found)
    return out


def _velocities(doc, oid):
    out = []
    for frame in doc["frames"]:
        found = (0.0, 0.0)
        for obj in frame["objects"]:
            if obj["id"] == oid:
                found = tuple(obj["velocity"])
        out.append(found)
    return out


def _moving_any(doc, i):
    dynamic = [o["id"] for o in doc["scene"]["objects"] if not o["static"]]
    for oid in dynamic:
        vx, vy = _velocities(doc, oid)[i]
        if math.sqrt(vx * vx + vy * vy) > MOVING:
            return True
    return False


def _pct(count, n):
    return 100.0 * count / n


def recount(template_id, trace, ast, args):
    doc = _doc(trace)
    times = _frame_times(doc)
    n = len(times)

    if template_id == "C1":
        oid = _color_id(doc, args["color"])
        partners = set()
        for (a, b), ivs in _intervals(doc).items():
            if oid not in (a, b):
                continue
            for start, end in ivs:
                if start <= args["t1"] and (end is math.inf or end >= args["t0"]):
                    partners.add(b if a == oid else a)
        return len(partners)

    if template_id == "C2":
        ids = set()
        for ev in ast.events:
            if ev.uid == args["pattern"]:
                for v in ev.parameters.values():
                    if isinstance(v, int) and not isinstance(v, bool):
                        ids.add(v)
        return sorted(ids)

    if template_id == "C3":
        oid = _color_id(doc, args["color"])
        me = _center(next(o for o in doc["scene"]["objects"] if o["id"] == oid))
        best = None
        best_d = None
        for obj in sorted(doc["scene"]["objects"], key=lambda o: o["id"]):
            if obj["id"] == oid:
                continue
            c = _center(obj)
            d = math.dist(me, c)
            if best_d is None or d < best_d - 1e-12:
                best, best_d = obj["id"], d
        return best

    if template_id == "C4":
        a = _color_id(doc, args["color_a"])
        b = _color_id(doc, args["color_b"])
        pa = _center(next(o for o in doc["scene"]["objects"] if o["id"] == a))
        pb = _center(next(o for o in doc["scene"]["objects"] if o["id"] == b))
        for obj in sorted(doc["scene"]["objects"], key=lambda o: o["id"]):
            if obj["id"] in (a, b):
                continue
            if obj["type"] == "circle":
                c = obj["obj_params"]["center"]
                r = obj["obj_params"]["radius"]
                if _seg_point_dist(pa, pb, c) <= r:
                    return obj["id"]
            else:
                mid = ((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2)
                for key, poly in obj["obj_params"].items():
                    if not key.startswith("polygon_"):
                        continue
                    if _point_in_convex(mid, poly):
                        return obj["id"]
                    m = len(poly)
                    if any(_segs_cross(pa, pb, tuple(poly[i]), tuple(poly[(i + 1) % m]))
                           for i in range(m)):
                        return obj["id"]
        return None

    if template_id == "C5":
        best, best_d = None, -1.0
        for obj in sorted(doc["scene"]["objects"], key=lambda o: o["id"]):
            total = 0.0
            if not obj["static"]:
                pos = _positions(doc, obj["id"])
                for p, q in zip(pos, pos[1:]):
                    if p is not None and q is not None:
                        total += math.dist(p, q)
            if total > best_d + 1e-12:
                best, best_d = obj["id"], total
        return best

    if template_id == "C6":
        best, best_s = None, -1.0
        for obj in sorted(doc["scene"]["objects"], key=lambda o: o["id"]):
            top = 0.0
            if not obj["static"]:
                for vx, vy in _velocities(doc, obj["id"]):
                    top = max(top, math.sqrt(vx * vx + vy * vy))
            if top > best_s + 1e-12:
                best, best_s = obj["id"], top
        return best

    if template_id == "C7":
        oid = _color_id(doc, args["color"])
        for ev in doc["events"]:
            if ev["uid"] != "CollisionStart":
                continue
            a, b = ev["parameters"]["a_id"], ev["parameters"]["b_id"]
            if oid == a:
                return b
            if oid == b:
                return a
        return None

    if template_id == "C8":
        oid = _color_id(doc, args["color"])
        return _pct(sum(1 for t in times if _partners_at(doc, oid, t)), n)

    if template_id == "C9":
        oid = _color_id(doc, args["color"])
        return _pct(sum(1 for t in times
                        if any(p not in WALLS and p != FLOOR
                               for p in _partners_at(doc, oid, t))), n)

    if template_id == "C10":
        oid = _color_id(doc, args["color"])
        return _pct(sum(1 for t in times if _touching(doc, oid, FLOOR, t)), n)

    if template_id == "C11":
        dyn = {o["id"] for o in doc["scene"]["objects"] if not o["static"]}
        count = 0
        for t in times:
            hit = False
            for (a, b), ivs in _intervals(doc).items():
                if a in dyn and b in dyn and any(
                        s <= t < e or (e is math.inf and t >= s) for s, e in ivs):
                    hit = True
            count += hit
        return _pct(count, n)

    if template_id == "C12":
        oid = _color_id(doc, args["color"])
        return _pct(sum(1 for t in times if not _partners_at(doc, oid, t)), n)

    if template_id == "C13":
        return _pct(sum(1 for i in range(n) if _moving_any(doc, i)), n)

    if template_id == "C14":
        return _pct(sum(1 for i in range(n) if not _moving_any(doc, i)), n)

    if template_id == "C15":
        a = _color_id(doc, args["color_a"])
        b = _color_id(doc, args["color_b"])
        return _pct(sum(1 for t in times if _touching(doc, a, b, t)), n)

    if template_id == "C16":
        oid = _color_id(doc, args["color"])
        return _pct(sum(1 for t in times
                        if any(_touching(doc, oid, w, t) for w in WALLS)), n)

    if template_id == "C17":
        oid = _color_id(doc, args["color"])
        statics = {o["id"] for o in doc["scene"]["objects"] if o["static"]}
        return _pct(sum(1 for t in times
                        if any(p in statics for p in _partners_at(doc, oid, t))), n)

    split = args.get("split")

    def future_starts():
        for ev in doc["events"]:
            if ev["uid"] == "CollisionStart" and ev["time"] > split:
                yield ev["parameters"]["a_id"], ev["parameters"]["b_id"]

    if template_id == "C18":
        a = _color_id(doc, args["color_a"])
        b = _color_id(doc, args["color_b"])
        return any({a, b} == {x, y} for x, y in future_starts())

    if template_id in ("C19", "C20"):
        me = _color_id(doc, args["color"])
        target = _color_id(doc, "green" if template_id == "C19" else "blue")
        for start, end in _intervals(doc).get(tuple(sorted((me, target))), []):
            if end is math.inf or end > split:
                return True
        return False

    if template_id == "C21":
        dyn = {o["id"] for o in doc["scene"]["objects"] if not o["static"]}
        return any(x in dyn and y in dyn for x, y in future_starts())

    if template_id == "C22":
        return any(ev.uid == args["pattern"] and ev.time > split for ev in ast.events)

    if template_id == "C23":
        oid = _color_id(doc, args["color"])
        ivs = _intervals(doc).get(tuple(sorted((oid, FLOOR))), [])
        before = any(s <= split for s, _ in ivs)
        after = any(s > split for s, _ in ivs)
        return (not before) and after

    if template_id == "C24":
        oid = _color_id(doc, args["color"])
        return any(oid in (x, y) and ({x, y} & set(WALLS))
                   for x, y in future_starts())

    if template_id in ("C25", "C26"):
        oid = _color_id(doc, args["color"])
        ref_color = "green" if template_id == "C25" else "blue"
        ref = _center(next(o for o in doc["scene"]["objects"]
                           if o["id"] == _color_id(doc, ref_color)))
        axis = 0 if template_id == "C25" else 1
        level = ref[axis]
        pos = _positions(doc, oid)
        if all(p is None for p in pos):
            return False
        for i in range(1, n):
            if times[i] <= split or pos[i] is None or pos[i - 1] is None:
                continue
            a = pos[i - 1][axis] - level
            b = pos[i][axis] - level
            if a * b < 0 or (b == 0 and a != 0):
                return True
        return False

    if template_id == "C27":
        return any(times[i] > split and not _moving_any(doc, i) for i in range(n))

    raise ValueError(template_id)


def _seg_point_dist(a, b, p):
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom < 1e-18:
        return math.dist(a, p)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    return math.dist((ax + dx * t, ay + dy * t), p)


def _point_in_convex(p, poly):
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0) < 0:
            return False
    return True


def _segs_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)

    return (orient(p1, p2, q1) != orient(p1, p2, q2)
            and orient(q1, q2, p1) != orient(q1, q2, p2))

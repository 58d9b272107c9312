import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from tracepatterns.trace import (
    ObjectNotFoundError,
    TraceEvent,
    TraceParseError,
    TraceSchemaError,
    Vec2,
    canonicalize,
    object_lookup,
    parse_trace,
    serialize_trace,
    validate_trace,
)
from tracepatterns.trace.model import Frame, Trace

from helpers import ball, random_mini_trace, simple_trace


def test_minimal_valid_trace_passes():
    trace = simple_trace({1: [(10.0, 10.0), (20.0, 10.0)]})
    report = validate_trace(trace)
    assert report.ok, [str(v) for v in report.violations]


def test_final_event_must_be_task_complete():
    trace = simple_trace({1: [(10.0, 10.0), (20.0, 10.0)]})
    bad = Trace(trace.action, trace.scene, trace.frames, [
        TraceEvent(0.2, "CollisionStart",
                   {"a_id": 1, "b_id": 2, "contact_points": []}),
        TraceEvent(0.9, "CollisionEnd",
                   {"a_id": 1, "b_id": 2, "contact_points": []}),
    ])
    report = validate_trace(bad)
    assert not report.ok
    assert any("TaskComplete" in v.rule for v in report.violations)


def test_non_monotone_frame_time_flagged():
    trace = simple_trace({1: [(0.0, 0.0)] * 5})
    frames = list(trace.frames)
    frames[3] = Frame(frames[2].time - 0.1, frames[3].objects)
    bad = Trace(trace.action, trace.scene, frames, trace.events)
    report = validate_trace(bad)
    assert any("non-monotone frame time at index 3" in v.rule for v in report.violations)


def test_unmatched_collision_start_is_legal():
    events = [
        TraceEvent(0.7, "CollisionStart", {"a_id": 1, "b_id": 2, "contact_points": []}),
        TraceEvent(1.0, "TaskComplete", {"success": True}),
    ]
    trace = simple_trace({1: [(0.0, 0.0), (1.0, 1.0)], 2: [(5.0, 5.0), (5.0, 5.0)]},
                         events)
    assert validate_trace(trace).ok


def test_parse_circle_object():
    doc = {
        "action": {"position": [10.0, 10.0], "radius": 5.0},
        "scene": {"objects": [{
            "description": "green-circle-1", "id": 1, "type": "circle",
            "color": "green", "velocity": [0.0, 0.0], "angle": 0.0,
            "static": False,
            "obj_params": {"center": [100.0, 150.0], "radius": 10.0},
        }]},
        "frames": [],
        "events": [],
    }
    trace = parse_trace(json.dumps(doc))
    obj = trace.scene[0]
    assert obj.type == "circle"
    assert obj.obj_params["center"] == [100.0, 150.0]
    assert obj.center() == Vec2(100.0, 150.0)


@pytest.mark.parametrize("bad_kind", ["triangle", "ball", "CIRCLE", "polygon", ""])
def test_parse_rejects_unknown_shape_kinds(bad_kind):
    doc = {
        "action": {"position": [0.0, 0.0], "radius": 5.0},
        "scene": {"objects": [{
            "description": f"green-{bad_kind}-1", "id": 1, "type": bad_kind,
            "color": "green", "velocity": [0.0, 0.0], "angle": 0.0,
            "static": False, "obj_params": {},
        }]},
        "frames": [], "events": [],
    }
    with pytest.raises(TraceSchemaError) as err:
        parse_trace(json.dumps(doc))
    assert "objects[0].type" in str(err.value)


def test_parse_rejects_unknown_color():
    doc = {
        "action": {"position": [0.0, 0.0], "radius": 5.0},
        "scene": {"objects": [{
            "description": "gray-circle-1", "id": 1, "type": "circle",
            "color": "gray", "velocity": [0.0, 0.0], "angle": 0.0,
            "static": False, "obj_params": {"center": [0.0, 0.0], "radius": 1.0},
        }]},
        "frames": [], "events": [],
    }
    with pytest.raises(TraceSchemaError):
        parse_trace(json.dumps(doc))


def test_malformed_json_reports_offset():
    with pytest.raises(TraceParseError) as err:
        parse_trace('{"action": }')
    assert err.value.offset == 11


def test_serialize_parse_canonicalize_identity():
    trace = simple_trace({1: [(10.0, 10.0), (20.5, 10.25)],
                          2: [(100.0, 100.0), (100.0, 100.0)]})
    doc = serialize_trace(trace)
    assert serialize_trace(parse_trace(doc)) == doc
    assert canonicalize(doc) == doc
    # whitespace / key-order normalization
    noisy = json.dumps(json.loads(doc), indent=3)
    assert canonicalize(noisy) == doc


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_round_trip_structural_equality(seed):
    trace = random_mini_trace(random.Random(seed))
    assert parse_trace(serialize_trace(trace)) == trace


def test_round_trip_1000_randomized_traces():
    rng = random.Random(2024)
    for _ in range(1000):
        trace = random_mini_trace(rng, n_frames=rng.randrange(2, 10),
                                  n_objects=rng.randrange(1, 4))
        assert parse_trace(serialize_trace(trace)) == trace


def test_object_lookup_unique_match():
    scene = [ball(2, "green", 0, 0), ball(1, "blue", 0, 0)]
    scene[1] = scene[1].__class__(**{**scene[1].__dict__, "type": "circle"})
    assert object_lookup(scene, "green", "circle") == 2


def test_object_lookup_any_wildcard():
    scene = [ball(8, "red", 0, 0)]
    assert object_lookup(scene, "red", "any") == 8


def test_object_lookup_no_match():
    scene = [ball(1, "green", 0, 0)]
    with pytest.raises(ObjectNotFoundError) as err:
        object_lookup(scene, "black", "jar")
    assert "black" in str(err.value) and "jar" in str(err.value)


def test_object_lookup_lowest_id_and_order_independence():
    rng = random.Random(3)
    scene = [ball(i, "green", 0, 0) for i in (7, 3, 9, 3 + 10)]
    for _ in range(5):
        rng.shuffle(scene)
        assert object_lookup(scene, "green", "circle") == 3


def test_validator_against_independent_reimplementation():
    # independent check: recompute the same invariants from the raw document
    for seed in range(25):
        trace = random_mini_trace(random.Random(seed))
        report = validate_trace(trace)
        ok_independent = _independent_ok(trace)
        assert report.ok == ok_independent, (seed, [str(v) for v in report.violations])


def _independent_ok(trace):
    doc = json.loads(serialize_trace(trace))
    frames = doc["frames"]
    if len(frames) < 2 or frames[0]["time"] != 0 or frames[-1]["time"] != 1:
        return False
    for i in range(1, len(frames)):
        if frames[i]["time"] < frames[i - 1]["time"]:
            return False
    events = doc["events"]
    if not events or events[-1]["uid"] != "TaskComplete":
        return False
    for i in range(1, len(events)):
        if events[i]["time"] < events[i - 1]["time"]:
            return False
    dynamic = {o["id"] for o in doc["scene"]["objects"] if not o["static"]}
    for frame in frames:
        for obj in frame["objects"]:
            if obj["id"] not in dynamic:
                return False
    open_pairs = set()
    for ev in events:
        if ev["uid"] == "CollisionStart":
            key = tuple(sorted((ev["parameters"]["a_id"], ev["parameters"]["b_id"])))
            if key in open_pairs:
                return False
            open_pairs.add(key)
        elif ev["uid"] == "CollisionEnd":
            key = tuple(sorted((ev["parameters"]["a_id"], ev["parameters"]["b_id"])))
            if key not in open_pairs:
                return False
            open_pairs.discard(key)
    return True

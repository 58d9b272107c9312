import pytest

from tracepatterns.detector import (
    AnnotationContext,
    DetectorParseError,
    MissingDependencyError,
    StepBudgetExceededError,
    UnknownPrimitiveError,
    grammar_mutate,
    parse_detector,
    program_length,
    run_detector,
    unparse,
)
from tracepatterns.detector.parser import ArityError, UndeclaredParameterError
from tracepatterns.sim import SimConfig, simulate
from tracepatterns.sim.templates import bar_obj, circle_obj
from tracepatterns.trace.model import Action, Vec2

from helpers import planted_trace, simple_trace

BOUNCE_SRC = """DETECT bounce PARAMS {object_id: int}
WHERE exists_object(o, dynamic, rising_edge(within_after(sign_flip(vel_y(o)),
      event_active("CollisionStart", {a_id: o}) or event_active("CollisionStart", {b_id: o}),
      0.01)))
EMIT {object_id: o}"""


@pytest.fixture(scope="module")
def drop_trace():
    scene = [circle_obj(1, "green", 30.0, 9.0, 9.0),
             bar_obj(2, "blue", 240.0, 5.0, 10.0, 5.0, static=True)]
    return simulate(scene, Action(Vec2(128.0, 240.0), 10.0),
                    SimConfig(timestep_count=300, restitution=0.8))


# --- parsing -------------------------------------------------------------------


def test_parse_bounce_example():
    prog = parse_detector(BOUNCE_SRC)
    assert prog.name == "bounce"
    assert prog.params_schema == {"object_id": "int"}
    assert prog.depends_on == ("CollisionStart",)
    assert program_length(prog) >= 10


def test_parse_degenerate_program():
    prog = parse_detector("DETECT x WHERE true")
    assert program_length(prog) == 1
    assert prog.depends_on == ()


def test_unknown_primitive_named():
    with pytest.raises(UnknownPrimitiveError) as err:
        parse_detector("DETECT y WHERE bogus(o)")
    assert "bogus" in str(err.value)


def test_arity_mismatch():
    with pytest.raises(ArityError):
        parse_detector("DETECT y WHERE speed(a, b)")


def test_undeclared_emit_parameter():
    with pytest.raises(UndeclaredParameterError):
        parse_detector("DETECT y PARAMS {a: int} WHERE true EMIT {b: 1}")


def test_parse_error_carries_location_and_expected():
    with pytest.raises(DetectorParseError) as err:
        parse_detector("DETECT y WHERE speed(")
    assert err.value.line == 1
    assert err.value.col > 0
    assert err.value.expected


def test_node_count_whitespace_invariant():
    a = parse_detector(BOUNCE_SRC)
    b = parse_detector(" ".join(BOUNCE_SRC.split()))
    assert program_length(a) == program_length(b)


def test_unparse_round_trip():
    prog = parse_detector(BOUNCE_SRC)
    again = parse_detector(unparse(prog))
    assert again.where == prog.where
    assert again.emit == prog.emit
    assert program_length(again) == program_length(prog)


# --- interpretation -------------------------------------------------------------


def test_bounce_detector_on_restitution_trace(drop_trace):
    prog = parse_detector(BOUNCE_SRC)
    events, elapsed, steps = run_detector(prog, drop_trace)
    impacts = [e.time for e in drop_trace.events
               if e.uid == "CollisionStart"
               and {e.parameters["a_id"], e.parameters["b_id"]} == {-1, 3}]
    assert impacts
    # analytic cross-check of the first impact time: free fall from the drop
    # height onto the floor
    cfg = SimConfig(timestep_count=300, restitution=0.8)
    import math
    duration = (300 - 1) * cfg.frame_dt
    t_analytic = math.sqrt(2.0 * (240.0 - 10.0) / cfg.gravity) / duration
    assert impacts[0] == pytest.approx(t_analytic, abs=0.02)
    times = [e.time for e in events]
    assert len(times) >= len(impacts) - 1
    frame_w = 1.0 / 299
    for imp in impacts[:-1]:
        assert any(abs(t - imp) <= 3.5 * frame_w for t in times), (imp, times[:8])
    for ev in events:
        assert ev.parameters["object_id"] == 3
    assert steps > 0 and elapsed >= 0.0


def test_where_true_fires_every_frame(drop_trace):
    prog = parse_detector("DETECT x WHERE true")
    events, _, _ = run_detector(prog, drop_trace)
    assert len(events) == drop_trace.n_frames


def test_collision_conditioned_on_static_scene():
    trace = simple_trace({1: [(10.0, 10.0)] * 6, 2: [(50.0, 50.0)] * 6})
    prog = parse_detector(
        'DETECT x WHERE event_active("CollisionStart", {})')
    events, _, _ = run_detector(prog, trace)
    assert events == []


def test_emitted_times_non_decreasing_and_deduped(drop_trace):
    prog = parse_detector(
        'DETECT taps PARAMS {oid: int} WHERE exists_object(o, dynamic, '
        'contact(o, -1)) EMIT {oid: o}')
    events, _, _ = run_detector(prog, drop_trace)
    times = [e.time for e in events]
    assert times == sorted(times)
    keys = {(e.time, tuple(sorted(e.parameters.items()))) for e in events}
    assert len(keys) == len(events)


def test_step_budget_enforced(drop_trace):
    prog = parse_detector(
        "DETECT slow WHERE exists_object(o, any, variance(speed(o), 1.0) > -1)")
    with pytest.raises(StepBudgetExceededError):
        run_detector(prog, drop_trace, step_budget=2000)


def test_missing_dependency_error():
    trace = simple_trace({1: [(0.0, 0.0)] * 4})
    prog = parse_detector('DETECT x WHERE event_active("abstraction_999999", {})')
    with pytest.raises(MissingDependencyError):
        run_detector(prog, trace)


def test_dependency_on_context_events():
    trace = planted_trace(True, 0.0, 0.0)
    ctx = AnnotationContext.from_trace(trace)
    prog = parse_detector('DETECT x WHERE event_active("CollisionStart", {})')
    events, _, _ = run_detector(prog, trace, ctx)
    assert len(events) == 1


def test_absent_object_total_semantics():
    trace = simple_trace({1: [(10.0, 10.0)] * 4})
    prog = parse_detector("DETECT x WHERE speed(99) == 0 and not contact(99, 1) "
                          "and pos_x(99) == 0")
    events, _, _ = run_detector(prog, trace)
    assert len(events) == trace.n_frames  # absent ids read as 0/false


def test_division_by_zero_total():
    trace = simple_trace({1: [(10.0, 10.0)] * 4})
    prog = parse_detector("DETECT x WHERE (1 / 0) == 0")
    events, _, _ = run_detector(prog, trace)
    assert len(events) == trace.n_frames


def test_grid_cell_parameterized():
    trace = simple_trace({1: [(12.8, 250.0), (250.0, 12.8)]})
    prog10 = parse_detector("DETECT x WHERE grid_cell_x(1, 10) == 0")
    prog25 = parse_detector("DETECT x WHERE grid_cell_x(1, 25) == 1")
    e10, _, _ = run_detector(prog10, trace)
    e25, _, _ = run_detector(prog25, trace)
    assert [e.time for e in e10] == [0.0]
    assert [e.time for e in e25] == [0.0]


def test_forall_quantifier():
    trace = simple_trace({1: [(10.0, 10.0)] * 4, 2: [(50.0, 50.0)] * 4})
    prog = parse_detector("DETECT x WHERE forall_object(o, dynamic, speed(o) < 1)")
    events, _, _ = run_detector(prog, trace)
    assert len(events) == 4


def test_witness_binding_flows_to_emit():
    trace = planted_trace(True, 0.0, 0.0)
    prog = parse_detector(
        'DETECT x PARAMS {who: int} WHERE exists_object(o, green, '
        'event_active("CollisionStart", {a_id: o})) EMIT {who: o}')
    events, _, _ = run_detector(prog, trace)
    assert events and all(e.parameters["who"] == 1 for e in events)


# --- mutation --------------------------------------------------------------------


def test_mutation_deterministic_in_seed():
    parent = parse_detector("DETECT candidate WHERE speed(1) > 5")
    assert grammar_mutate([parent], 1) == grammar_mutate([parent], 1)
    outs = {grammar_mutate([parent], s) for s in range(40)}
    assert len(outs) > 5


def test_threshold_jitter_changes_constant():
    parent = parse_detector("DETECT candidate WHERE speed(1) > 5")
    jittered = [grammar_mutate([parent], s) for s in range(60)]
    assert any("5" not in src and "speed" in src or
               ("> " in src and "5" not in src.split("> ")[-1])
               for src in jittered)


def test_crossover_mixes_parents():
    p1 = parse_detector("DETECT candidate WHERE speed(1) > 5")
    p2 = parse_detector('DETECT candidate WHERE event_active("TaskComplete", {})')
    children = [grammar_mutate([p1, p2], s) for s in range(120)]
    assert any("TaskComplete" in c and "speed" not in c for c in children) or \
        any("TaskComplete" in c and "speed" in c for c in children)


def test_mutation_closure_fuzz():
    seed_prog = parse_detector("DETECT candidate PARAMS {} WHERE false EMIT {}")
    bounce = parse_detector(BOUNCE_SRC)
    ok = 0
    for s in range(1000):
        src = grammar_mutate([seed_prog, bounce], s)
        parse_detector(src)
        ok += 1
    assert ok == 1000

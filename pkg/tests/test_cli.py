import json

import pytest
from click.testing import CliRunner

from tracepatterns.cli import main

SUBCOMMANDS = ["simulate", "annotate", "metrics", "evolve", "discover", "optimize",
               "qa", "ablate", "render", "scene", "validate"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmp_path, runner):
    """Scene + trace + library prepared once per test."""
    scene = tmp_path / "scene.json"
    trace = tmp_path / "trace.json"
    r = runner.invoke(main, ["scene", "--template", "ball_on_bar", "--seed", "0",
                             "--out", str(scene)])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["simulate", "--scene", str(scene), "--action",
                             "96,224,10", "--frames", "120", "--out", str(trace)])
    assert r.exit_code == 0, r.output
    library = tmp_path / "lib.json"
    library.write_text(json.dumps([{
        "uid": "abstraction_000001",
        "label": "contact marker",
        "description": "two bodies begin touching",
        "origin": "guided",
        "source": 'DETECT t WHERE event_active("CollisionStart", {})',
        "parameters_schema": {},
        "depends_on": ["CollisionStart"],
    }]))
    return tmp_path


def test_help_on_every_subcommand(runner):
    for name in SUBCOMMANDS:
        result = runner.invoke(main, [name, "--help"])
        assert result.exit_code == 0, name
        assert "--help" in result.output
    result = runner.invoke(main, ["reward", "--help"])
    assert result.exit_code == 0


def test_unknown_subcommand_is_usage_error(runner):
    result = runner.invoke(main, ["frobnicate"])
    assert result.exit_code == 2


def test_simulate_writes_trace(runner, workdir):
    assert (workdir / "trace.json").exists()
    doc = json.loads((workdir / "trace.json").read_text())
    assert set(doc) == {"action", "scene", "frames", "events"}


def test_simulate_template_reproducible(runner, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        r = runner.invoke(main, ["simulate", "--template", "stack",
                                 "--template-seed", "3", "--action", "120,200,10",
                                 "--frames", "60", "--out", str(out)])
        assert r.exit_code == 0, r.output
    assert a.read_bytes() == b.read_bytes()


def test_simulate_domain_error_exit_1(runner, tmp_path):
    r = runner.invoke(main, ["simulate", "--template", "nope", "--action", "1,1,5",
                             "--out", str(tmp_path / "x.json")])
    assert r.exit_code == 1


def test_validate_ok(runner, workdir):
    r = runner.invoke(main, ["validate", "--trace", str(workdir / "trace.json")])
    assert r.exit_code == 0
    assert "ok" in r.output


def test_annotate_writes_ast_and_text(runner, workdir):
    ast = workdir / "ast.json"
    r = runner.invoke(main, ["annotate", "--trace", str(workdir / "trace.json"),
                             "--library", str(workdir / "lib.json"),
                             "--out", str(ast), "--text"])
    assert r.exit_code == 0, r.output
    doc = json.loads(ast.read_text())
    assert "matrix" in doc and "events" in doc
    assert "t=" in r.output


def test_metrics_outputs_distances(runner, workdir, tmp_path):
    other = tmp_path / "other.json"
    r = runner.invoke(main, ["simulate", "--scene", str(workdir / "scene.json"),
                             "--action", "40,224,12", "--frames", "120",
                             "--out", str(other)])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["metrics", "--trace-a", str(workdir / "trace.json"),
                             "--trace-b", str(other)])
    assert r.exit_code == 0, r.output
    out = json.loads(r.output)
    assert "d_x" in out and out["d_x"] >= 0


def test_reward_parse_eval(runner, workdir):
    program = workdir / "r.dsl"
    program.write_text('AND(\n  # must touch\n  EVENT("CollisionStart"),\n'
                       '  NEARBY_AT(OBJECT_ID("green", "circle"), 128.0, 10.0, 1.0, 0.5),\n)')
    r = runner.invoke(main, ["reward", "parse", "--program", str(program)])
    assert r.exit_code == 0, r.output
    assert r.output.startswith("AND(")
    r = runner.invoke(main, ["reward", "eval", "--program", str(program),
                             "--trace", str(workdir / "trace.json")])
    assert r.exit_code == 0, r.output
    result = json.loads(r.output)
    assert set(result) == {"bool", "score", "per_clause"}
    assert len(result["per_clause"]) == 2


def test_reward_eval_via_ast_trace_ref(runner, workdir):
    ast = workdir / "ast.json"
    r = runner.invoke(main, ["annotate", "--trace", str(workdir / "trace.json"),
                             "--library", str(workdir / "lib.json"), "--out", str(ast)])
    assert r.exit_code == 0, r.output
    program = workdir / "r.dsl"
    program.write_text('EVENT("contact marker")')
    r = runner.invoke(main, ["reward", "eval", "--program", str(program),
                             "--ast", str(ast),
                             "--library", str(workdir / "lib.json")])
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["bool"] is True


def test_reward_synthesize_mock(runner, workdir):
    transcript = workdir / "mock.json"
    transcript.write_text(json.dumps(
        {"responses": ['<answer>```dsl\nEVENT("CollisionStart")\n```</answer>']}))
    out = workdir / "synth.dsl"
    r = runner.invoke(main, ["reward", "synthesize", "--goal", "touch something",
                             "--scene", str(workdir / "scene.json"),
                             "--backend", f"mock:{transcript}",
                             "--out", str(out)])
    assert r.exit_code == 0, r.output
    assert out.read_text().strip() == 'EVENT("CollisionStart")'


def test_optimize_run_and_heatmap(runner, workdir):
    program = workdir / "r.dsl"
    program.write_text('EVENT("CollisionStart")')
    out = workdir / "run.json"
    heatmap = workdir / "h.ppm"
    r = runner.invoke(main, ["optimize", "--scene", str(workdir / "scene.json"),
                             "--reward", str(program), "--samples", "12",
                             "--seed", "7", "--frames", "60", "--out", str(out),
                             "--heatmap", str(heatmap)])
    assert r.exit_code == 0, r.output
    doc = json.loads(out.read_text())
    assert len(doc["history"]) == 12
    assert heatmap.exists() and heatmap.with_suffix(".ppm.json").exists()


def test_optimize_seed_reproducible(runner, workdir):
    program = workdir / "r.dsl"
    program.write_text('EVENT("CollisionStart")')
    outs = []
    for name in ("r1.json", "r2.json"):
        out = workdir / name
        r = runner.invoke(main, ["optimize", "--scene", str(workdir / "scene.json"),
                                 "--reward", str(program), "--samples", "10",
                                 "--seed", "3", "--frames", "60", "--out", str(out)])
        assert r.exit_code == 0, r.output
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_qa_single_question(runner, workdir):
    r = runner.invoke(main, ["qa", "--trace", str(workdir / "trace.json"),
                             "--template", "C14"])
    assert r.exit_code == 0, r.output
    doc = json.loads(r.output)
    assert 0.0 <= doc["answer"] <= 100.0


def test_qa_benchmark_generation(runner, workdir):
    out = workdir / "bench.jsonl"
    r = runner.invoke(main, ["qa", "--benchmark-scenes", "ball_on_bar:0",
                             "--per-scene", "5", "--seed", "1",
                             "--frames", "150", "--out", str(out)])
    assert r.exit_code == 0, r.output
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 5
    for line in lines:
        item = json.loads(line)
        assert {"scene_ref", "action", "template_id", "args", "answer",
                "answer_type"} <= set(item)


def test_evolve_and_discover_and_ablate(runner, workdir, tmp_path):
    traces_dir = tmp_path / "traces"
    traces_dir.mkdir()
    for i, action in enumerate(["96,224,10", "40,224,12", "224,224,10",
                                "160,60,14"]):
        r = runner.invoke(main, ["simulate", "--scene", str(workdir / "scene.json"),
                                 "--action", action, "--frames", "60",
                                 "--out", str(traces_dir / f"t{i}.json")])
        assert r.exit_code == 0, r.output
    det_out = tmp_path / "det.json"
    r = runner.invoke(main, ["evolve", "--traces", str(traces_dir),
                             "--label", "collision happens",
                             "--budget", "40", "--seed", "3",
                             "--out", str(det_out)])
    assert r.exit_code == 0, r.output
    assert "best nu" in r.output

    labels = tmp_path / "labels.json"
    labels.write_text(json.dumps([
        {"label": "collision happens", "description": "two bodies touch"},
        {"label": "something moves fast", "description": "speed spike"},
    ]))
    lib_out = tmp_path / "lib.json"
    log_out = tmp_path / "log.jsonl"
    manifest = tmp_path / "manifest.json"
    r = runner.invoke(main, ["discover", "--traces", str(traces_dir),
                             "--labels", str(labels), "--budget", "40",
                             "--seed", "3", "--delta", "-10",
                             "--out", str(lib_out), "--log", str(log_out),
                             "--manifest", str(manifest)])
    assert r.exit_code == 0, r.output
    lib_doc = json.loads(lib_out.read_text())
    assert len(lib_doc) == 2
    assert log_out.exists()
    man = json.loads(manifest.read_text())
    assert man["seed"] == 3 and len(man["accepted_uids"]) == 2

    reduced = tmp_path / "reduced.json"
    r = runner.invoke(main, ["ablate", "--library", str(lib_out),
                             "--uid", lib_doc[0]["uid"], "--out", str(reduced)])
    assert r.exit_code == 0, r.output
    assert len(json.loads(reduced.read_text())) <= 1


def test_render_cmd(runner, workdir, tmp_path):
    out_dir = tmp_path / "frames"
    r = runner.invoke(main, ["render", "--trace", str(workdir / "trace.json"),
                             "--out-dir", str(out_dir)])
    assert r.exit_code == 0, r.output
    assert len(list(out_dir.glob("*.ppm"))) == 120

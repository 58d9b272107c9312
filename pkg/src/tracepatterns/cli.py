"""Command-line entry point wiring the package's workflows together.

Exit codes: 0 success, 1 domain error, 2 usage error. Every subcommand that
uses randomness takes --seed and is bit-reproducible.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys

import click

from . import optimize as opt
from .annotate import (
    AnnotationError,
    CycleError,
    PatternLibrary,
    ablate,
    annotate,
    ast_from_json,
    ast_to_json,
    library_from_json,
    library_to_json,
    render_annotations,
)
from .detector import parse_detector, grammar_mutate
from .detector.mutate import MutationPools
from .evolve import EvolutionConfig, FitnessEvaluator, SEED_SKELETON, discover, funsearch
from .lm import (
    EndpointConfig,
    HttpBackend,
    LMDetectorMutator,
    MockBackend,
    SynthesisError,
    TransportError,
    synthesize_reward,
)
from .metrics import annotation_distance, trace_distance
from .qa import TEMPLATES, QuestionInstance, answer, generate_benchmark, solve_by_scan
from .reward import RewardParseError, RewardValidationError, parse_reward, render
from .reward.eval import EvalContext, evaluate
from .sim import (
    PlacementError,
    SceneTemplate,
    SimConfig,
    UnknownTemplateError,
    build_scene,
    list_templates,
    quantize_actions,
    render_frames,
    simulate,
)
from .sim.render import write_ppm
from .trace import (
    parse_trace,
    serialize_trace,
    validate_trace,
)
from .trace.jsonio import parse_scene, serialize_scene
from .trace.model import Action, Vec2

DOMAIN_ERRORS = (
    AnnotationError, CycleError, PlacementError, RewardParseError,
    RewardValidationError, SynthesisError, TransportError,
    UnknownTemplateError, SyntaxError, ValueError, KeyError, OSError,
)


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _load_trace(path: str):
    with open(path, "rb") as fh:
        return parse_trace(fh.read())


def _load_scene(path: str):
    with open(path, "rb") as fh:
        return parse_scene(fh.read())


def _load_library(path: str | None) -> PatternLibrary:
    if not path:
        return PatternLibrary()
    with open(path, "r", encoding="utf-8") as fh:
        return library_from_json(fh.read())


def _parse_action(text: str) -> Action:
    parts = text.split(",")
    if len(parts) != 3:
        raise _fail(f"action must be 'x,y,r', got {text!r}")
    x, y, r = (float(p) for p in parts)
    return Action(position=Vec2(x, y), radius=r)


def _sim_config(frames: int, restitution: float, friction: float, substeps: int) -> SimConfig:
    return SimConfig(timestep_count=frames, restitution=restitution,
                     friction=friction, substeps=substeps)


def _make_backend(spec: str):
    if spec.startswith("mock:"):
        return MockBackend.from_file(spec[len("mock:"):])
    if spec == "http":
        return HttpBackend(EndpointConfig.from_env())
    raise _fail(f"unknown backend {spec!r}; use mock:<transcript.json> or http")


def _make_mutator(spec: str, label: str, description: str, library: PatternLibrary):
    if spec == "grammar":
        pools = MutationPools(
            event_uids=("CollisionStart", "CollisionEnd", "TaskComplete")
            + tuple(library.uids()))
        return lambda parents, seed: grammar_mutate(parents, seed, pools)
    backend = _make_backend(spec)
    return LMDetectorMutator(backend=backend, label=label, description=description,
                             library=library)


@click.group()
def main() -> None:
    """Pattern discovery, annotation and reward optimization over 2D
    rigid-body simulation traces."""


@main.command()
@click.option("--template", "template_id", help=f"one of: {', '.join(list_templates())}")
@click.option("--template-seed", type=int, default=0, show_default=True)
@click.option("--template-params", default="{}", help="JSON generator parameters")
@click.option("--scene", "scene_path", type=click.Path(exists=True),
              help="scene JSON instead of a template")
@click.option("--action", "action_text", required=True, help="x,y,r")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--frames", type=int, default=300, show_default=True)
@click.option("--restitution", type=float, default=0.2, show_default=True)
@click.option("--friction", type=float, default=0.4, show_default=True)
@click.option("--substeps", type=int, default=8, show_default=True)
def simulate_cmd(template_id, template_seed, template_params, scene_path, action_text,
                 out_path, frames, restitution, friction, substeps):
    """Roll out a scene with a red-ball action and write the trace JSON."""
    try:
        if scene_path:
            scene = _load_scene(scene_path)
        elif template_id:
            scene = build_scene(SceneTemplate(template_id, json.loads(template_params),
                                              template_seed))
        else:
            raise _fail("provide --template or --scene")
        trace = simulate(scene, _parse_action(action_text),
                         _sim_config(frames, restitution, friction, substeps))
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(serialize_trace(trace))
    click.echo(f"wrote {out_path} ({len(trace.frames)} frames, "
               f"{len(trace.events)} events)")


main.add_command(simulate_cmd, name="simulate")


@main.command("scene")
@click.option("--template", "template_id", required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--params", default="{}", help="JSON generator parameters")
@click.option("--out", "out_path", required=True, type=click.Path())
def scene_cmd(template_id, seed, params, out_path):
    """Instantiate a scene template and write the scene JSON."""
    try:
        scene = build_scene(SceneTemplate(template_id, json.loads(params), seed))
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(serialize_scene(scene))
    click.echo(f"wrote {out_path} ({len(scene)} objects)")


@main.command("validate")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
def validate_cmd(trace_path):
    """Check a trace against the schema invariants."""
    try:
        report = validate_trace(_load_trace(trace_path))
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    if report.ok:
        click.echo("ok")
    else:
        for violation in report.violations:
            click.echo(str(violation))
        raise _fail(f"{len(report.violations)} violation(s)")


@main.command("annotate")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--library", "library_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path())
@click.option("--text", is_flag=True, help="print the time-stamped activation lines")
@click.option("--strict/--no-strict", default=False, show_default=True,
              help="fail on detector errors instead of skipping the column")
def annotate_cmd(trace_path, library_path, out_path, text, strict):
    """Annotate a trace with a pattern library; write the AST export JSON."""
    try:
        trace = _load_trace(trace_path)
        library = _load_library(library_path)
        matrix = annotate(trace, library, strict=strict)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    for warning in matrix.warnings:
        click.echo(f"warning: {warning}", err=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(ast_to_json(matrix, trace_ref=trace_path))
        click.echo(f"wrote {out_path} ({len(matrix.events)} events)")
    if text or not out_path:
        click.echo(render_annotations(matrix, library))


@main.command("metrics")
@click.option("--trace-a", required=True, type=click.Path(exists=True))
@click.option("--trace-b", required=True, type=click.Path(exists=True))
@click.option("--ast-a", type=click.Path(exists=True))
@click.option("--ast-b", type=click.Path(exists=True))
@click.option("--bins", type=int, default=10, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--directional", is_flag=True,
              help="directional cross entropy instead of symmetrized")
def metrics_cmd(trace_a, trace_b, ast_a, ast_b, bins, samples, directional):
    """Print d_x (and d_p when ASTs are given) between two traces."""
    try:
        ta, tb = _load_trace(trace_a), _load_trace(trace_b)
        out = {"d_x": trace_distance(ta, tb, samples)}
        if ast_a and ast_b:
            with open(ast_a) as fa, open(ast_b) as fb:
                ma, mb = ast_from_json(fa.read()), ast_from_json(fb.read())
            out["d_p"] = annotation_distance(ma, mb, bins, directional=directional)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    click.echo(json.dumps(out, sort_keys=True))


@main.command("evolve")
@click.option("--traces", "traces_dir", required=True, type=click.Path(exists=True))
@click.option("--label", required=True)
@click.option("--description", default="")
@click.option("--library", "library_path", type=click.Path(exists=True))
@click.option("--backend", default="grammar", show_default=True,
              help="grammar | mock:<transcript.json> | http")
@click.option("--islands", type=int, default=4, show_default=True)
@click.option("--prompt-size", type=int, default=2, show_default=True)
@click.option("--reset-period", type=int, default=50, show_default=True)
@click.option("--budget", type=int, default=500, show_default=True)
@click.option("--temperature", type=float, default=0.3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--log", "log_path", type=click.Path())
def evolve_cmd(traces_dir, label, description, library_path, backend, islands,
               prompt_size, reset_period, budget, temperature, seed, out_path, log_path):
    """Run funsearch for a single label against a trace directory."""
    try:
        traces = _load_trace_dir(traces_dir)
        library = _load_library(library_path)
        config = EvolutionConfig(islands=islands, prompt_size=prompt_size,
                                 reset_period=reset_period, budget=budget,
                                 temperature=temperature, seed=seed)
        evaluator = FitnessEvaluator(traces, library)
        mutator = _make_mutator(backend, label, description, library)
        result = funsearch(evaluator.evaluate, parse_detector(SEED_SKELETON),
                           mutator, config)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({"label": label, "description": description, "nu": result.best_nu,
                   "source": result.best_program.source}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if log_path:
        _write_jsonl(log_path, ({"label": label, **entry} for entry in result.iterations))
    click.echo(f"best nu {result.best_nu:.4f}; wrote {out_path}")


@main.command("discover")
@click.option("--traces", "traces_dir", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True),
              help='JSON list of {"label", "description"}')
@click.option("--backend", default="grammar", show_default=True)
@click.option("--islands", type=int, default=4, show_default=True)
@click.option("--prompt-size", type=int, default=2, show_default=True)
@click.option("--reset-period", type=int, default=50, show_default=True)
@click.option("--budget", type=int, default=500, show_default=True)
@click.option("--delta", type=float, default=0.3, show_default=True)
@click.option("--temperature", type=float, default=0.3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--log", "log_path", type=click.Path())
@click.option("--manifest", "manifest_path", type=click.Path())
def discover_cmd(traces_dir, labels_path, backend, islands, prompt_size, reset_period,
                 budget, delta, temperature, seed, out_path, log_path, manifest_path):
    """Discover a pattern library from labels (Algorithm-1-style loop)."""
    try:
        traces = _load_trace_dir(traces_dir)
        with open(labels_path, "r", encoding="utf-8") as fh:
            label_items = json.load(fh)
        labels = [(item["label"], item.get("description", "")) for item in label_items]
        config = EvolutionConfig(islands=islands, prompt_size=prompt_size,
                                 reset_period=reset_period, budget=budget, delta=delta,
                                 temperature=temperature, seed=seed)

        def make_mutator(label: str, description: str, library: PatternLibrary):
            return _make_mutator(backend, label, description, library)

        result = _discover_with_factory(traces, labels, make_mutator, config)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(library_to_json(result.library))
    if log_path:
        _write_jsonl(log_path, (
            {"label": o.label, **entry}
            for o in result.outcomes for entry in o.iterations))
    if manifest_path:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(result.manifest(config, len(traces)), fh, indent=2, sort_keys=True)
            fh.write("\n")
    accepted = [o.label for o in result.outcomes if o.accepted]
    click.echo(f"accepted {len(accepted)}/{len(labels)} labels; wrote {out_path}")


def _discover_with_factory(traces, labels, make_mutator, config):
    """discover() with a per-label mutator factory (LM mutators need the
    label text and current library)."""
    from .evolve.discover import DiscoveryResult, LabelOutcome
    from .annotate.library import PatternDetector

    library = PatternLibrary()
    outcomes = []
    accepted_count = 0
    g0 = parse_detector(SEED_SKELETON)
    for m, (label, description) in enumerate(labels):
        evaluator = FitnessEvaluator(traces, library)
        label_config = dataclasses.replace(config, seed=config.seed + 7919 * m)
        mutator = make_mutator(label, description, library)
        result = funsearch(evaluator.evaluate, g0, mutator, label_config)
        accepted = result.best_nu > config.delta
        uid = None
        if accepted:
            accepted_count += 1
            uid = f"abstraction_{accepted_count:06d}"
            library = library.with_detector(PatternDetector(
                uid=uid, label=label, description=description,
                program=result.best_program, origin="guided"))
        outcomes.append(LabelOutcome(
            label=label, description=description, accepted=accepted,
            nu=result.best_nu, uid=uid, source=result.best_program.source,
            iterations=result.iterations))
    return DiscoveryResult(library=library, outcomes=outcomes)


@main.group("reward")
def reward_group() -> None:
    """Parse, evaluate and synthesize reward programs."""


@reward_group.command("parse")
@click.option("--program", "program_path", required=True, type=click.Path(exists=True))
def reward_parse_cmd(program_path):
    """Parse a DSL file and print the canonical rendering."""
    try:
        with open(program_path, "r", encoding="utf-8") as fh:
            node = parse_reward(fh.read())
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    click.echo(render(node))


@reward_group.command("eval")
@click.option("--program", "program_path", required=True, type=click.Path(exists=True))
@click.option("--ast", "ast_path", type=click.Path(exists=True))
@click.option("--trace", "trace_path", type=click.Path(exists=True),
              help="defaults to the AST's trace_ref")
@click.option("--library", "library_path", type=click.Path(exists=True))
@click.option("--after-swapped", is_flag=True, help="swap AFTER argument order")
def reward_eval_cmd(program_path, ast_path, trace_path, library_path, after_swapped):
    """Evaluate a reward program on an annotated trace; print JSON result."""
    try:
        with open(program_path, "r", encoding="utf-8") as fh:
            node = parse_reward(fh.read())
        matrix = None
        if ast_path:
            with open(ast_path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            matrix = ast_from_json(json.dumps(doc))
            if not trace_path:
                trace_path = doc.get("trace_ref")
                if trace_path and not os.path.isabs(trace_path) \
                        and not os.path.exists(trace_path):
                    sibling = os.path.join(os.path.dirname(ast_path), trace_path)
                    if os.path.exists(sibling):
                        trace_path = sibling
        if not trace_path:
            raise _fail("provide --trace (or an --ast with a resolvable trace_ref)")
        trace = _load_trace(trace_path)
        library = _load_library(library_path)
        ctx = EvalContext.build(trace, library, matrix, after_swapped=after_swapped)
        result = evaluate(node, ctx)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    click.echo(json.dumps({
        "bool": result.satisfied,
        "score": result.score,
        "per_clause": [
            {"clause": c.clause, "bool": c.satisfied, "score": c.score}
            for c in result.per_clause
        ],
    }, sort_keys=True))


@reward_group.command("synthesize")
@click.option("--goal", required=True)
@click.option("--library", "library_path", type=click.Path(exists=True))
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--backend", required=True, help="mock:<transcript.json> | http")
@click.option("--retry-limit", type=int, default=3, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def reward_synth_cmd(goal, library_path, scene_path, backend, retry_limit, out_path):
    """Synthesize a reward program from a natural-language goal."""
    try:
        library = _load_library(library_path)
        scene = _load_scene(scene_path)
        program, errors = synthesize_reward(goal, library, scene,
                                            _make_backend(backend), retry_limit)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(render(program) + "\n")
    click.echo(f"wrote {out_path} ({len(errors)} repair round(s))")


@main.command("optimize")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--reward", "reward_path", type=click.Path(exists=True))
@click.option("--binary-target", help="x,y[,tol] sparse baseline instead of a DSL file")
@click.option("--library", "library_path", type=click.Path(exists=True))
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--frames", type=int, default=300, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--heatmap", "heatmap_path", type=click.Path())
@click.option("--heatmap-bins", type=int, default=32, show_default=True)
def optimize_cmd(scene_path, reward_path, binary_target, library_path, samples, seed,
                 frames, out_path, heatmap_path, heatmap_bins):
    """Simulated annealing over the action space for a reward program."""
    try:
        scene = _load_scene(scene_path)
        library = _load_library(library_path)
        if reward_path:
            with open(reward_path, "r", encoding="utf-8") as fh:
                reward = opt.DslReward(parse_reward(fh.read()), library)
        elif binary_target:
            parts = [float(p) for p in binary_target.split(",")]
            tol = parts[2] if len(parts) > 2 else opt.DEFAULT_SUCCESS_TOL
            reward = opt.BinaryReward(Vec2(parts[0], parts[1]), tol)
        else:
            raise _fail("provide --reward or --binary-target")
        config = opt.AnnealConfig(samples=samples, seed=seed)
        sim_config = SimConfig(timestep_count=frames)
        run = opt.anneal(scene, reward, config, sim_config)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    doc = {
        "best": {
            "action": {"position": [run.best_action.position.x,
                                    run.best_action.position.y],
                       "radius": run.best_action.radius},
            "score": run.best_score,
        },
        "history": [
            {"action": {"position": [e.action.position.x, e.action.position.y],
                        "radius": e.action.radius},
             "score": e.score, "accepted": e.accepted}
            for e in run.history
        ],
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    if heatmap_path:
        grid = opt.export_heatmap(run, heatmap_bins, heatmap_bins)
        write_ppm(heatmap_path, opt.heatmap_image(grid))
        with open(heatmap_path + ".json", "w", encoding="utf-8") as fh:
            json.dump({"grid": grid.tolist()}, fh, sort_keys=True)
    click.echo(f"best score {run.best_score:.4f} at "
               f"({run.best_action.position.x:.1f}, {run.best_action.position.y:.1f}, "
               f"r={run.best_action.radius:.1f}); wrote {out_path}")


@main.command("qa")
@click.option("--trace", "trace_path", type=click.Path(exists=True))
@click.option("--template", "template_id", type=click.Choice(sorted(TEMPLATES)),
              help="answer one question on --trace")
@click.option("--args", "args_json", default="{}")
@click.option("--ast", "ast_path", type=click.Path(exists=True))
@click.option("--benchmark-scenes", help="comma list of template:seed scene specs")
@click.option("--per-scene", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--frames", type=int, default=300, show_default=True)
@click.option("--library", "library_path", type=click.Path(exists=True))
@click.option("--jobs", type=int, default=1, show_default=True,
              help="parallelize benchmark generation across scenes")
@click.option("--out", "out_path", type=click.Path())
def qa_cmd(trace_path, template_id, args_json, ast_path, benchmark_scenes, per_scene,
           seed, frames, library_path, jobs, out_path):
    """Answer a single template question, or generate a benchmark JSONL."""
    try:
        if template_id:
            if not trace_path:
                raise _fail("--template needs --trace")
            trace = _load_trace(trace_path)
            ast = None
            if ast_path:
                with open(ast_path, "r", encoding="utf-8") as fh:
                    ast = ast_from_json(fh.read())
            q = QuestionInstance(template_id, json.loads(args_json))
            value = answer(q, trace, ast)
            click.echo(json.dumps({"template_id": template_id, "question": q.text(),
                                   "answer": value}, sort_keys=True))
            return
        if not benchmark_scenes:
            raise _fail("provide --template or --benchmark-scenes")
        sim_config = SimConfig(timestep_count=frames)
        actions = quantize_actions(4, 4, 3)
        scenes = []
        for spec in benchmark_scenes.split(","):
            tid, _, tseed = spec.partition(":")
            scene = build_scene(SceneTemplate(tid, {}, int(tseed or 0)))
            solution = solve_by_scan(scene, actions, sim_config)
            if solution is None:
                click.echo(f"warning: no quantized solution for {spec}; skipped", err=True)
                continue
            scenes.append((spec, scene, solution))
        library = _load_library(library_path)
        items = generate_benchmark(scenes, per_scene, seed, sim_config, library,
                                   jobs=jobs)
        if not out_path:
            raise _fail("--benchmark-scenes needs --out")
        with open(out_path, "w", encoding="utf-8") as fh:
            for item in items:
                fh.write(item.to_json() + "\n")
        click.echo(f"wrote {out_path} ({len(items)} items)")
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))


@main.command("ablate")
@click.option("--library", "library_path", required=True, type=click.Path(exists=True))
@click.option("--uid", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def ablate_cmd(library_path, uid, out_path):
    """Remove a detector and everything that depends on it."""
    try:
        library = _load_library(library_path)
        reduced = ablate(library, uid)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(library_to_json(reduced))
    click.echo(f"removed {len(library) - len(reduced)} detector(s); wrote {out_path}")


@main.command("render")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
def render_cmd(trace_path, out_dir):
    """Rasterize every frame of a trace to PPM images."""
    try:
        count = render_frames(_load_trace(trace_path), out_dir)
    except DOMAIN_ERRORS as exc:
        raise _fail(str(exc))
    click.echo(f"wrote {count} frames to {out_dir}")


def _load_trace_dir(path: str):
    names = sorted(n for n in os.listdir(path) if n.endswith(".json"))
    if not names:
        raise _fail(f"no .json traces in {path}")
    return [_load_trace(os.path.join(path, n)) for n in names]


def _write_jsonl(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())

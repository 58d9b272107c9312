"""Q&A benchmark generation: roll out solution / near-miss actions and
instantiate templates with valid arguments and oracle answers."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Any

from ..annotate.engine import annotate
from ..annotate.library import PatternLibrary
from ..sim.world import PlacementError, SimConfig, simulate
from ..trace.index import TraceIndex
from ..trace.model import (
    ACTION_RADIUS_MAX,
    ACTION_RADIUS_MIN,
    SCENE_EXTENT,
    Action,
    SceneObject,
    Vec2,
)
from .oracle import TEMPLATES, QuestionInstance, TemplateArgumentError, answer

POSITION_NOISE = 8.0
RADIUS_NOISE = 2.0
SPLITS = (0.3, 0.5, 0.7)
TIME_GRID = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


class MissingSolutionError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkItem:
    scene_ref: str
    action: Action
    template_id: str
    arguments: dict[str, Any]
    answer_type: str
    answer: Any

    def to_json(self) -> str:
        return json.dumps({
            "scene_ref": self.scene_ref,
            "action": {
                "position": [self.action.position.x, self.action.position.y],
                "radius": self.action.radius,
            },
            "template_id": self.template_id,
            "args": self.arguments,
            "answer_type": self.answer_type,
            "answer": self.answer,
        }, sort_keys=True)


def perturb_action(action: Action, rng: random.Random) -> Action:
    x = min(max(rng.gauss(action.position.x, POSITION_NOISE), 0.0), SCENE_EXTENT)
    y = min(max(rng.gauss(action.position.y, POSITION_NOISE), 0.0), SCENE_EXTENT)
    r = min(max(rng.gauss(action.radius, RADIUS_NOISE), ACTION_RADIUS_MIN),
            ACTION_RADIUS_MAX)
    return Action(position=Vec2(x, y), radius=r)


def _sample_instance(template_id: str, index: TraceIndex, ast, rng: random.Random
                     ) -> QuestionInstance | None:
    template = TEMPLATES[template_id]
    colors = sorted({o.color for o in index.trace.scene})
    args: dict[str, Any] = {}
    for name in template.arg_names:
        if name == "color":
            args[name] = rng.choice(colors)
        elif name in ("color_a", "color_b"):
            args[name] = rng.choice(colors)
        elif name == "t0":
            args[name] = rng.choice(TIME_GRID[:-1])
        elif name == "t1":
            lo = args.get("t0", 0.0)
            choices = [t for t in TIME_GRID if t > lo]
            args[name] = rng.choice(choices)
        elif name == "split":
            args[name] = rng.choice(SPLITS)
        elif name == "pattern":
            if ast is None or not ast.uids:
                return None
            args[name] = rng.choice(sorted(ast.uids))
    if "color_a" in args and "color_b" in args and args["color_a"] == args["color_b"]:
        others = [c for c in colors if c != args["color_a"]]
        if not others:
            return None
        args["color_b"] = rng.choice(others)
    if template_id in ("C19",) and args.get("color") == "green":
        args["color"] = rng.choice([c for c in colors if c != "green"] or ["red"])
    if template_id in ("C20",) and args.get("color") == "blue":
        args["color"] = rng.choice([c for c in colors if c != "blue"] or ["red"])
    return QuestionInstance(template_id=template_id, arguments=args)


def _benchmark_for_scene(job: tuple) -> list[BenchmarkItem]:
    ref, scene, solution, per_scene, scene_seed, sim_config, library, available = job
    if solution is None:
        raise MissingSolutionError(f"scene {ref!r} has no stored solution action")
    rng = random.Random(scene_seed)
    action = solution
    if rng.random() < 0.5:
        for _ in range(16):
            candidate = perturb_action(solution, rng)
            try:
                trace = simulate(scene, candidate, sim_config)
            except PlacementError:
                continue
            action = candidate
            break
        else:
            trace = simulate(scene, solution, sim_config)
            action = solution
    else:
        trace = simulate(scene, action, sim_config)
    index = TraceIndex(trace)
    ast = annotate(index, library, strict=False) if len(library) else None
    items: list[BenchmarkItem] = []
    made = 0
    guard = 0
    while made < per_scene and guard < per_scene * 30:
        guard += 1
        template_id = available[rng.randrange(len(available))]
        instance = _sample_instance(template_id, index, ast, rng)
        if instance is None:
            continue
        try:
            value = answer(instance, index, ast)
        except TemplateArgumentError:
            continue
        items.append(BenchmarkItem(
            scene_ref=ref,
            action=action,
            template_id=template_id,
            arguments=instance.arguments,
            answer_type=instance.answer_type,
            answer=value,
        ))
        made += 1
    return items


def generate_benchmark(scenes: list[tuple[str, list[SceneObject], Action]],
                       per_scene: int, rng_seed: int,
                       sim_config: SimConfig | None = None,
                       library: PatternLibrary | None = None,
                       template_ids: list[str] | None = None,
                       jobs: int = 1) -> list[BenchmarkItem]:
    """For each (ref, scene, solution): roll out either the stored solution or
    a near-miss perturbation (uniform pick), then instantiate `per_scene`
    template questions with oracle answers.

    Deterministic in rng_seed regardless of `jobs`: each scene draws from its
    own derived seed, so scene-parallel execution reassembles identically.
    """
    sim_config = sim_config or SimConfig()
    library = library or PatternLibrary()
    available = template_ids or sorted(TEMPLATES, key=lambda t: int(t[1:]))
    work = [
        (ref, scene, solution, per_scene, rng_seed * 1000003 + i, sim_config,
         library, available)
        for i, (ref, scene, solution) in enumerate(scenes)
    ]
    if jobs > 1 and len(work) > 1:
        import concurrent.futures

        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            per_scene_items = list(pool.map(_benchmark_for_scene, work))
    else:
        per_scene_items = [_benchmark_for_scene(job) for job in work]
    return [item for chunk in per_scene_items for item in chunk]


def solve_by_scan(scene: list[SceneObject], actions: list[Action],
                  sim_config: SimConfig | None = None) -> Action | None:
    """First action in the list whose rollout ends in success."""
    from ..sim.world import task_success

    sim_config = sim_config or SimConfig()
    for action in actions:
        try:
            trace = simulate(scene, action, sim_config)
        except PlacementError:
            continue
        if task_success(trace):
            return action
    return None

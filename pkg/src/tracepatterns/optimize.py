"""Simulated annealing over the (x, y, r) action space against a reward
program's dense score, plus the dense-vs-binary comparison harness."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
import numpy as np

from .annotate.engine import annotate
from .annotate.library import PatternLibrary
from .reward.ast import RewardNode
from .reward.eval import EvalContext, evaluate
from .sim.world import PlacementError, SimConfig, simulate
from .trace.model import (
    ACTION_RADIUS_MAX,
    ACTION_RADIUS_MIN,
    SCENE_EXTENT,
    Action,
    SceneObject,
    Trace,
    Vec2,
)

DEFAULT_SUCCESS_TOL = 10.0


@dataclass(frozen=True)
class AnnealConfig:
    samples: int = 100
    initial_temperature: float = 0.12
    cooling: float = 0.99
    sigma: tuple[float, float, float] = (16.0, 16.0, 2.0)
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.initial_temperature <= 0:
            raise ValueError("initial temperature must be positive")
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling factor must be in (0, 1)")


@dataclass(frozen=True)
class HistoryEntry:
    action: Action
    score: float
    accepted: bool


@dataclass
class OptimizationRun:
    history: list[HistoryEntry]
    best_action: Action
    best_score: float
    best_trace: Trace | None


class DslReward:
    """Dense reward: simulate -> annotate -> partial credit."""

    def __init__(self, program: RewardNode, library: PatternLibrary | None = None,
                 after_swapped: bool = False):
        self.program = program
        self.library = library or PatternLibrary()
        self.after_swapped = after_swapped

    def score(self, trace: Trace) -> float:
        matrix = annotate(trace, self.library, strict=False) if len(self.library) else None
        ctx = EvalContext.build(trace, self.library, matrix,
                                after_swapped=self.after_swapped)
        return evaluate(self.program, ctx).score


class BinaryReward:
    """Sparse baseline: 1 when the goal target is reached, else 0."""

    def __init__(self, target: Vec2, tol: float = DEFAULT_SUCCESS_TOL):
        self.target = target
        self.tol = tol

    def score(self, trace: Trace) -> float:
        return 1.0 if success_test(trace, self.target, self.tol) else 0.0


def success_test(trace: Trace, goal_target: Vec2, tol: float = DEFAULT_SUCCESS_TOL) -> bool:
    """True iff the green object's final center is strictly within tol units
    of the target."""
    green = [o for o in trace.scene if o.color == "green"]
    if not green:
        raise ValueError("no green object in scene")
    gid = green[0].id
    center = None
    for obj in trace.frames[-1].objects:
        if obj.id == gid:
            center = obj.center()
    if center is None:  # static green object
        center = green[0].center()
    return math.hypot(center.x - goal_target.x, center.y - goal_target.y) < tol


def _clip_action(x: float, y: float, r: float) -> Action:
    x = min(max(x, 0.0), SCENE_EXTENT)
    y = min(max(y, 0.0), SCENE_EXTENT)
    r = min(max(r, ACTION_RADIUS_MIN), ACTION_RADIUS_MAX)
    return Action(position=Vec2(x, y), radius=r)


def anneal(scene: list[SceneObject], reward, config: AnnealConfig,
           sim_config: SimConfig | None = None,
           library: PatternLibrary | None = None) -> OptimizationRun:
    """Standard SA: Gaussian proposals clipped to bounds, accept improvements
    always and regressions with probability exp(delta/T). Invalid placements
    score 0 and are recorded, so |history| == samples exactly.

    `reward` is a RewardNode (wrapped in DslReward with `library`) or any
    object with score(trace) -> float.
    """
    sim_config = sim_config or SimConfig()
    if not hasattr(reward, "score"):
        reward = DslReward(reward, library)
    rng = random.Random(config.seed)

    def sample_initial() -> Action:
        return _clip_action(
            rng.uniform(0.0, SCENE_EXTENT),
            rng.uniform(0.0, SCENE_EXTENT),
            rng.uniform(ACTION_RADIUS_MIN, ACTION_RADIUS_MAX),
        )

    def score_action(action: Action) -> tuple[float, Trace | None]:
        try:
            trace = simulate(scene, action, sim_config)
        except PlacementError:
            return 0.0, None
        return reward.score(trace), trace

    history: list[HistoryEntry] = []
    current = sample_initial()
    current_score, current_trace = score_action(current)
    history.append(HistoryEntry(current, current_score, True))
    best_action, best_score, best_trace = current, current_score, current_trace

    temperature = config.initial_temperature
    sx, sy, sr = config.sigma
    while len(history) < config.samples:
        proposal = _clip_action(
            rng.gauss(current.position.x, sx),
            rng.gauss(current.position.y, sy),
            rng.gauss(current.radius, sr),
        )
        score, trace = score_action(proposal)
        delta = score - current_score
        # The acceptance draw happens unconditionally so chains with equal
        # seeds share random-number streams while their decisions agree
        # (paired comparisons across reward functions).
        u = rng.random()
        accepted = delta >= 0 or u < math.exp(delta / temperature)
        history.append(HistoryEntry(proposal, score, accepted))
        if accepted:
            current, current_score = proposal, score
        if score > best_score:
            best_action, best_score, best_trace = proposal, score, trace
        temperature *= config.cooling

    return OptimizationRun(
        history=history,
        best_action=best_action,
        best_score=best_score,
        best_trace=best_trace,
    )


def export_heatmap(run: OptimizationRun, x_bins: int, y_bins: int) -> np.ndarray:
    """Cell value = max score among proposals landing in that (x, y) cell."""
    if not run.history:
        raise ValueError("empty optimization run")
    grid = np.zeros((y_bins, x_bins))
    for entry in run.history:
        xi = min(x_bins - 1, int(entry.action.position.x / SCENE_EXTENT * x_bins))
        yi = min(y_bins - 1, int(entry.action.position.y / SCENE_EXTENT * y_bins))
        if entry.score > grid[yi, xi]:
            grid[yi, xi] = entry.score
    return grid


def heatmap_image(grid: np.ndarray) -> np.ndarray:
    """Grayscale-to-hot rendering of a heatmap grid as an RGB array."""
    lo = float(grid.min())
    hi = float(grid.max())
    span = hi - lo if hi > lo else 1.0
    norm = (grid - lo) / span
    img = np.zeros((grid.shape[0], grid.shape[1], 3), dtype=np.uint8)
    img[:, :, 0] = np.clip(norm * 2.0, 0, 1) * 255
    img[:, :, 1] = np.clip(norm * 2.0 - 1.0, 0, 1) * 255
    img[:, :, 2] = (norm * 60).astype(np.uint8)
    return img[::-1]  # y up -> row 0 at top


@dataclass
class ComparisonResult:
    rates: dict[int, dict[str, float]] = field(default_factory=dict)


def compare_dense_binary(scene: list[SceneObject], dense_reward, target: Vec2,
                         budgets: list[int], seeds: list[int],
                         sim_config: SimConfig | None = None,
                         library: PatternLibrary | None = None,
                         base_config: AnnealConfig | None = None,
                         tol: float = DEFAULT_SUCCESS_TOL) -> ComparisonResult:
    """Success-rate comparison at several budgets.

    Each seed runs one chain per reward at the largest budget; smaller
    budgets are read off the shared history prefix (prefix-stability of a
    seeded chain). Success of a budget = success_test on the best-scoring
    action among its first B samples.
    """
    sim_config = sim_config or SimConfig()
    base = base_config or AnnealConfig()
    budgets = sorted(budgets)
    max_budget = budgets[-1]
    sim_cache: dict[tuple, bool] = {}

    def action_success(action: Action) -> bool:
        key = (action.position.x, action.position.y, action.radius)
        if key not in sim_cache:
            try:
                trace = simulate(scene, action, sim_config)
                sim_cache[key] = success_test(trace, target, tol)
            except PlacementError:
                sim_cache[key] = False
        return sim_cache[key]

    rewards = {
        "dense": dense_reward if hasattr(dense_reward, "score")
        else DslReward(dense_reward, library),
        "binary": BinaryReward(target, tol),
    }
    import dataclasses

    successes = {b: {"dense": 0, "binary": 0} for b in budgets}
    for seed in seeds:
        for kind, reward in rewards.items():
            cfg = dataclasses.replace(base, samples=max_budget, seed=seed)
            run = anneal(scene, reward, cfg, sim_config)
            for b in budgets:
                prefix = run.history[:b]
                best = max(prefix, key=lambda e: e.score)
                if action_success(best.action):
                    successes[b][kind] += 1
    result = ComparisonResult()
    for b in budgets:
        result.rates[b] = {
            kind: successes[b][kind] / len(seeds) for kind in ("dense", "binary")
        }
    return result

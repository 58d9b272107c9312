"""Island-model program search.

Maintains I islands seeded with the skeleton program; each iteration samples
an island (softmax over best scores), builds a mutation from its s best
programs, and inserts the child if it parses and scores non-degenerate.
Every reset period the worst half of the islands are reinitialized with a
clone of the global best.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable

from ..detector.ast import DetectorProgram
from ..detector.parser import parse_detector
from .fitness import NEG_INF, FitnessFunction, FitnessReport

Mutator = Callable[[list[DetectorProgram], int], str]


@dataclass(frozen=True)
class EvolutionConfig:
    islands: int = 4
    prompt_size: int = 2
    reset_period: int = 50
    budget: int = 500
    delta: float = 0.3
    temperature: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.islands < 2:
            raise ValueError("need at least 2 islands")
        if self.prompt_size < 1:
            raise ValueError("prompt size must be >= 1")
        if self.budget < self.islands:
            raise ValueError("budget must be >= island count")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


@dataclass
class Island:
    programs: list[tuple[DetectorProgram, float]] = field(default_factory=list)

    @property
    def best(self) -> tuple[DetectorProgram, float]:
        best_idx = 0
        for i, (_, nu) in enumerate(self.programs):
            if nu > self.programs[best_idx][1]:
                best_idx = i
        return self.programs[best_idx]

    def top(self, k: int) -> list[DetectorProgram]:
        ranked = sorted(range(len(self.programs)),
                        key=lambda i: self.programs[i][1], reverse=True)
        return [self.programs[i][0] for i in ranked[:k]]


@dataclass
class SearchResult:
    best_program: DetectorProgram
    best_nu: float
    best_report: FitnessReport | None
    iterations: list[dict]
    best_series: list[float]


def _sample_island(bests: list[float], temperature: float, rng: random.Random) -> int:
    finite = [b for b in bests if b > NEG_INF]
    floor = min(finite) if finite else 0.0
    scores = [(b if b > NEG_INF else floor) / temperature for b in bests]
    peak = max(scores)
    weights = [math.exp(s - peak) for s in scores]
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if r <= acc:
            return i
    return len(weights) - 1


def funsearch(evaluate: FitnessFunction, seed_program: DetectorProgram,
              mutator: Mutator, config: EvolutionConfig) -> SearchResult:
    rng = random.Random(config.seed)
    seed_report = evaluate(seed_program)
    islands = [Island([(seed_program, seed_report.nu)]) for _ in range(config.islands)]

    best_program = seed_program
    best_nu = seed_report.nu
    best_report: FitnessReport | None = seed_report
    iterations: list[dict] = []
    best_series: list[float] = []

    for t in range(1, config.budget + 1):
        bests = [isl.best[1] for isl in islands]
        i = _sample_island(bests, config.temperature, rng)
        parents = islands[i].top(config.prompt_size)
        child_seed = rng.randrange(1 << 62)
        source = mutator(parents, child_seed)
        entry = {"iteration": t, "island": i}
        try:
            child = parse_detector(source)
        except SyntaxError as exc:
            entry.update({"status": "parse-error", "error": str(exc)})
            iterations.append(entry)
            best_series.append(best_nu)
            continue
        report = evaluate(child)
        if report.degenerate:
            entry.update({"status": "degenerate",
                          "reason": report.diagnostics.get("reason", "")})
        else:
            islands[i].programs.append((child, report.nu))
            entry.update({
                "status": "ok", "nu": report.nu, "rho": report.rho,
                "eta": report.eta, "lambda": report.lam, "psi": report.psi,
            })
            if report.nu > best_nu:
                best_program = child
                best_nu = report.nu
                best_report = report
        iterations.append(entry)
        best_series.append(best_nu)

        if config.reset_period > 0 and t % config.reset_period == 0:
            order = sorted(range(len(islands)), key=lambda j: islands[j].best[1])
            for j in order[: len(islands) // 2]:
                islands[j] = Island([(best_program, best_nu)])

    return SearchResult(
        best_program=best_program,
        best_nu=best_nu,
        best_report=best_report,
        iterations=iterations,
        best_series=best_series,
    )

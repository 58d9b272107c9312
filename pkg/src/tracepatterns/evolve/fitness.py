"""Candidate detector fitness: correlation between trace-space and
annotation-space distances, novelty against the library, minus length and
time penalties.

The penalty "time" is the deterministic interpreter step count, not wall
clock, so evolution stays bit-reproducible; wall seconds are still recorded
in diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

from ..annotate.engine import annotate
from ..annotate.library import PatternLibrary
from ..detector.ast import DetectorProgram
from ..detector.interp import (
    DEFAULT_STEP_BUDGET,
    AnnotationContext,
    ContextEvent,
    DetectorRuntimeError,
    run_detector,
)
from ..metrics import (
    DEFAULT_BINS,
    Histogram,
    correlation,
    histogram_distance,
    pattern_histogram,
    trace_distance,
)
from ..trace.index import TraceIndex
from ..trace.model import Trace

NEG_INF = float("-inf")
DEGENERATE_FIRE_FRACTION = 0.9


def length_penalty(num_lines: int) -> float:
    """log(min(n, 1000)) / 5; 0 at n=1, ~1.3816 at the cap."""
    if num_lines < 1:
        raise ValueError("program length must be >= 1")
    return math.log(min(num_lines, 1000)) / 5.0


def time_penalty(t: float, mu: float | None) -> float:
    """0 below the library mean, linear up to 1 at twice the mean."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if mu is None or mu <= 0:
        return 0.0
    if t <= mu:
        return 0.0
    if t >= 2.0 * mu:
        return 1.0
    return (t - mu) / mu


@dataclass(frozen=True)
class FitnessReport:
    rho: float
    eta: float
    lam: float
    psi: float
    nu: float
    degenerate: bool = False
    diagnostics: dict[str, Any] = field(default_factory=dict)


def degenerate_report(reason: str, **extra: Any) -> FitnessReport:
    return FitnessReport(
        rho=0.0, eta=0.0, lam=0.0, psi=0.0, nu=NEG_INF, degenerate=True,
        diagnostics={"reason": reason, **extra})


class FitnessEvaluator:
    """Evaluates candidates against a fixed trace set and library.

    Library-side quantities (annotation matrices, histograms, pairwise trace
    distances, the mean annotation step count) do not depend on the
    candidate, so they are computed once here.
    """

    def __init__(self, traces: list[Trace], library: PatternLibrary,
                 bins: int = DEFAULT_BINS, samples: int = 50,
                 step_budget: int = DEFAULT_STEP_BUDGET):
        if len(traces) < 2:
            raise ValueError("fitness evaluation needs at least 2 traces")
        self.library = library
        self.bins = bins
        self.step_budget = step_budget
        self.indexes = [t if isinstance(t, TraceIndex) else TraceIndex(t) for t in traces]
        self.n_traces = len(self.indexes)
        self.pairs = [(l, m) for l in range(self.n_traces) for m in range(l + 1, self.n_traces)]

        self.pair_dx = {
            (l, m): trace_distance(self.indexes[l], self.indexes[m], samples)
            for l, m in self.pairs
        }

        # Per-trace library annotations, pattern histograms, visible-event
        # contexts and step counts.
        self.contexts: list[AnnotationContext] = []
        self.library_hists: list[dict[str, Histogram]] = []
        step_samples: list[int] = []
        for index in self.indexes:
            matrix = annotate(index, library, strict=True, step_budget=step_budget)
            ctx = AnnotationContext.from_trace(index.trace, index)
            for det in library:
                ctx.declare(det.uid, det.label)
            for ev in matrix.events:
                ctx.add(ContextEvent(ev.time, ev.uid, ev.label, ev.parameters), index)
            self.contexts.append(ctx)
            self.library_hists.append({
                uid: pattern_histogram(col, index.n, bins)
                for uid, col in matrix.columns.items()
            })
            step_samples.extend(matrix.detector_steps.values())
        self.mu = (sum(step_samples) / len(step_samples)) if step_samples else None

    def _novelty_raw(self, cand_hist: Histogram, trace_idx: int) -> float:
        hists = self.library_hists[trace_idx]
        if not hists:
            # Empty library: nothing to be redundant with; use the
            # self-distance of the uniform histogram as the neutral maximum.
            return math.log(self.bins)
        return sum(histogram_distance(cand_hist, h) for h in hists.values()) / len(hists)

    def evaluate(self, candidate: DetectorProgram) -> FitnessReport:
        activations: list[list[int]] = []
        steps: list[int] = []
        wall: list[float] = []
        for index, ctx in zip(self.indexes, self.contexts):
            try:
                events, elapsed, used = run_detector(
                    candidate, index, ctx, self.step_budget)
            except DetectorRuntimeError as exc:
                return degenerate_report(f"runtime error: {exc}")
            frames = sorted({index.frame_index(e.time) for e in events})
            fraction = len(frames) / index.n
            if fraction > DEGENERATE_FIRE_FRACTION:
                return degenerate_report(
                    f"fires on {fraction:.0%} of frames", fire_fraction=fraction)
            activations.append(frames)
            steps.append(used)
            wall.append(elapsed)
        if not any(activations):
            return degenerate_report("never fires on any trace")

        cand_hists = [
            pattern_histogram(frames, index.n, self.bins)
            for frames, index in zip(activations, self.indexes)
        ]
        d_x: list[float] = []
        d_p: list[float] = []
        d_novel: list[float] = []
        for l, m in self.pairs:
            d_x.append(self.pair_dx[(l, m)])
            d_p.append(histogram_distance(cand_hists[l], cand_hists[m]))
            d_novel.append(self._novelty_raw(cand_hists[l], l))
            d_novel.append(self._novelty_raw(cand_hists[m], m))

        rho = correlation(d_x, d_p)
        eta_raw = sum(d_novel) / len(d_novel)
        eta = eta_raw / (eta_raw + math.log(self.bins))
        lam = length_penalty(candidate.node_count)
        mean_steps = sum(steps) / len(steps)
        psi = time_penalty(mean_steps, self.mu)
        nu = rho + eta - lam - psi
        return FitnessReport(
            rho=rho, eta=eta, lam=lam, psi=psi, nu=nu, degenerate=False,
            diagnostics={
                "d_x": d_x,
                "d_p": d_p,
                "d_novel": d_novel,
                "eta_raw": eta_raw,
                "steps": steps,
                "mean_steps": mean_steps,
                "mu": self.mu,
                "wall_seconds": wall,
                "activations": activations,
            })


FitnessFunction = Callable[[DetectorProgram], FitnessReport]

"""Label-by-label pattern discovery: funsearch per label, acceptance gated
on the fitness threshold, library grows as labels are accepted."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..annotate.library import PatternDetector, PatternLibrary
from ..detector.ast import DetectorProgram
from .fitness import FitnessEvaluator
from .funsearch import EvolutionConfig, Mutator, SearchResult, funsearch

SEED_SKELETON = "DETECT candidate PARAMS {} WHERE false EMIT {}"


@dataclass
class LabelOutcome:
    label: str
    description: str
    accepted: bool
    nu: float
    uid: str | None
    source: str
    iterations: list[dict] = field(default_factory=list)


@dataclass
class DiscoveryResult:
    library: PatternLibrary
    outcomes: list[LabelOutcome]

    def manifest(self, config: EvolutionConfig, n_traces: int) -> dict:
        return {
            "seed": config.seed,
            "config": {
                "islands": config.islands,
                "prompt_size": config.prompt_size,
                "reset_period": config.reset_period,
                "budget": config.budget,
                "delta": config.delta,
                "temperature": config.temperature,
            },
            "n_traces": n_traces,
            "labels": [o.label for o in self.outcomes],
            "accepted_uids": [o.uid for o in self.outcomes if o.accepted],
        }


def discover(traces, labels: list[tuple[str, str]], seed_program: DetectorProgram,
             mutator: Mutator, config: EvolutionConfig,
             library: PatternLibrary | None = None,
             origin: str = "guided") -> DiscoveryResult:
    """Iterate labels in order, evolving one detector per label against the
    growing library; accept when the best fitness exceeds the threshold."""
    if not labels:
        raise ValueError("label list must be non-empty")
    library = library or PatternLibrary()
    outcomes: list[LabelOutcome] = []
    accepted_count = len(library)
    for m, (label, description) in enumerate(labels):
        evaluator = FitnessEvaluator(traces, library)
        label_config = replace(config, seed=config.seed + 7919 * m)
        result: SearchResult = funsearch(evaluator.evaluate, seed_program, mutator,
                                         label_config)
        accepted = result.best_nu > config.delta
        uid = None
        if accepted:
            accepted_count += 1
            uid = f"abstraction_{accepted_count:06d}"
            library = library.with_detector(PatternDetector(
                uid=uid,
                label=label,
                description=description,
                program=result.best_program,
                origin=origin,
            ))
        outcomes.append(LabelOutcome(
            label=label,
            description=description,
            accepted=accepted,
            nu=result.best_nu,
            uid=uid,
            source=result.best_program.source,
            iterations=result.iterations,
        ))
    return DiscoveryResult(library=library, outcomes=outcomes)

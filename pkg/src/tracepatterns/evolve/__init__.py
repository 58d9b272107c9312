from .fitness import (
    NEG_INF,
    FitnessEvaluator,
    FitnessReport,
    degenerate_report,
    length_penalty,
    time_penalty,
)
from .funsearch import EvolutionConfig, Island, SearchResult, funsearch
from .discover import SEED_SKELETON, DiscoveryResult, LabelOutcome, discover

__all__ = [
    "DiscoveryResult",
    "EvolutionConfig",
    "FitnessEvaluator",
    "FitnessReport",
    "Island",
    "LabelOutcome",
    "NEG_INF",
    "SEED_SKELETON",
    "SearchResult",
    "degenerate_report",
    "discover",
    "funsearch",
    "length_penalty",
    "time_penalty",
]

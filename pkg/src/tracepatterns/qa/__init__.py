from .oracle import (
    MOVING_SPEED,
    TEMPLATES,
    QuestionInstance,
    Template,
    TemplateArgumentError,
    answer,
)
from .benchmark import (
    BenchmarkItem,
    MissingSolutionError,
    generate_benchmark,
    perturb_action,
    solve_by_scan,
)

__all__ = [
    "BenchmarkItem",
    "MOVING_SPEED",
    "MissingSolutionError",
    "QuestionInstance",
    "TEMPLATES",
    "Template",
    "TemplateArgumentError",
    "answer",
    "generate_benchmark",
    "perturb_action",
    "solve_by_scan",
]

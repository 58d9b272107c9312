from .ast import DetectorProgram, Node, node_sort
from .parser import (
    ArityError,
    DetectorParseError,
    UndeclaredParameterError,
    UnknownPrimitiveError,
    parse_detector,
    program_length,
)
from .interp import (
    DEFAULT_STEP_BUDGET,
    AnnotationContext,
    ContextEvent,
    DetectorRuntimeError,
    EmittedEvent,
    MissingDependencyError,
    StepBudgetExceededError,
    run_detector,
)
from .mutate import MutationPools, grammar_mutate, unparse, unparse_expr

__all__ = [
    "AnnotationContext",
    "ArityError",
    "ContextEvent",
    "DEFAULT_STEP_BUDGET",
    "DetectorParseError",
    "DetectorProgram",
    "DetectorRuntimeError",
    "EmittedEvent",
    "MissingDependencyError",
    "MutationPools",
    "Node",
    "StepBudgetExceededError",
    "UndeclaredParameterError",
    "UnknownPrimitiveError",
    "grammar_mutate",
    "node_sort",
    "parse_detector",
    "program_length",
    "run_detector",
    "unparse",
    "unparse_expr",
]

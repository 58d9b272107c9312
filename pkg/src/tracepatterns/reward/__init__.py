from .ast import (
    AfterNode,
    AndNode,
    CountNode,
    EventNode,
    NearbyAtNode,
    NotNode,
    ObjectIdNode,
    OrNode,
    RewardNode,
    render,
)
from .parser import RewardParseError, parse_reward, strip_comments
from .eval import (
    ClauseReport,
    EvalContext,
    RewardEvent,
    RewardResult,
    RewardValidationError,
    eval_bool,
    eval_partial,
    evaluate,
    match_event,
    validate_program,
)

__all__ = [
    "AfterNode",
    "AndNode",
    "ClauseReport",
    "CountNode",
    "EvalContext",
    "EventNode",
    "NearbyAtNode",
    "NotNode",
    "ObjectIdNode",
    "OrNode",
    "RewardEvent",
    "RewardNode",
    "RewardParseError",
    "RewardResult",
    "RewardValidationError",
    "eval_bool",
    "eval_partial",
    "evaluate",
    "match_event",
    "parse_reward",
    "render",
    "strip_comments",
    "validate_program",
]

"""Reward DSL expression nodes.

Parameter values inside nodes are either plain JSON-ish values or nested
ObjectIdNode references resolved against the scene at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

PREDICATES = (
    "AND", "OR", "NOT", "EVENT", "AFTER", "WITHIN",
    "COUNT", "GT", "LT", "NEARBY_AT", "OBJECT_ID",
)


@dataclass(frozen=True)
class ObjectIdNode:
    color: str
    shape: str


@dataclass(frozen=True)
class EventNode:
    identifier: str
    params: Optional[dict[str, Any]] = None


@dataclass(frozen=True)
class AndNode:
    children: tuple["RewardNode", ...]


@dataclass(frozen=True)
class OrNode:
    children: tuple["RewardNode", ...]


@dataclass(frozen=True)
class NotNode:
    child: "RewardNode"


@dataclass(frozen=True)
class AfterNode:
    first: str
    second: str
    min_delta: Optional[float] = None
    max_delta: Optional[float] = None
    first_params: Optional[dict[str, Any]] = None
    second_params: Optional[dict[str, Any]] = None


@dataclass(frozen=True)
class CountNode:
    kind: str  # "count" | "gt" | "lt"
    identifier: str
    count: int
    params: Optional[dict[str, Any]] = None


@dataclass(frozen=True)
class NearbyAtNode:
    obj: Any  # int id or ObjectIdNode
    x: float
    y: float
    t: float
    threshold_strength: float = 0.1


RewardNode = (
    EventNode | AndNode | OrNode | NotNode | AfterNode | CountNode
    | NearbyAtNode | ObjectIdNode
)

GRADED_NODES = (NearbyAtNode, CountNode)


def render_value(value: Any) -> str:
    if isinstance(value, ObjectIdNode):
        return f'OBJECT_ID("{value.color}", "{value.shape}")'
    if isinstance(value, bool):
        return "True" if value else "False"
    if value is None:
        return "None"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(render_value(v) for v in value) + "]"
    if isinstance(value, dict):
        inner = ", ".join(f'"{k}": {render_value(v)}' for k, v in value.items())
        return "{" + inner + "}"
    return repr(value)


def render(node: RewardNode) -> str:
    """Canonical one-line rendering (used for per-clause reports)."""
    if isinstance(node, EventNode):
        if node.params:
            return f'EVENT("{node.identifier}", {render_value(node.params)})'
        return f'EVENT("{node.identifier}")'
    if isinstance(node, AndNode):
        return "AND(" + ", ".join(render(c) for c in node.children) + ")"
    if isinstance(node, OrNode):
        return "OR(" + ", ".join(render(c) for c in node.children) + ")"
    if isinstance(node, NotNode):
        return f"NOT({render(node.child)})"
    if isinstance(node, AfterNode):
        args = [f'"{node.first}"', f'"{node.second}"']
        if node.min_delta is not None:
            args.append(f"min_delta={node.min_delta!r}")
        if node.max_delta is not None:
            args.append(f"max_delta={node.max_delta!r}")
        if node.first_params is not None:
            args.append(f"first_params={render_value(node.first_params)}")
        if node.second_params is not None:
            args.append(f"second_params={render_value(node.second_params)}")
        return "AFTER(" + ", ".join(args) + ")"
    if isinstance(node, CountNode):
        name = {"count": "COUNT", "gt": "GT", "lt": "LT"}[node.kind]
        args = [f'"{node.identifier}"', str(node.count)]
        if node.params is not None:
            args.append(render_value(node.params))
        return name + "(" + ", ".join(args) + ")"
    if isinstance(node, NearbyAtNode):
        obj = render_value(node.obj)
        return (f"NEARBY_AT({obj}, {node.x!r}, {node.y!r}, {node.t!r}, "
                f"threshold_strength={node.threshold_strength!r})")
    if isinstance(node, ObjectIdNode):
        return render_value(node)
    raise TypeError(f"unknown node {node!r}")

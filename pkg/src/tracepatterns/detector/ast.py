"""DetectorScript AST and primitive signatures.

A detector program has the shape

    DETECT <name> PARAMS {k: type, ...} WHERE <expr> EMIT {k: expr, ...}

and is evaluated once per frame: frames where the WHERE expression is true
emit one event whose parameters come from the EMIT map. Expressions are
sorted into BOOL / NUM / OBJ / STR / MAP; the mutator relies on sorts to
stay inside the grammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

BOOL = "bool"
NUM = "num"
OBJ = "obj"
STR = "str"
MAP = "map"

# Object filters usable in quantifiers.
OBJECT_FILTERS = (
    "any", "dynamic", "static",
    "red", "green", "blue", "black",
    "circle", "bar", "jar", "standingsticks",
)

# name -> (argument sorts, result sort). OBJ arguments accept any expression;
# non-integer or unknown ids degrade to absent-object semantics.
PRIMITIVES: dict[str, tuple[tuple[str, ...], str]] = {
    "contact": ((OBJ, OBJ), BOOL),
    "speed": ((OBJ,), NUM),
    "vel_x": ((OBJ,), NUM),
    "vel_y": ((OBJ,), NUM),
    "pos_x": ((OBJ,), NUM),
    "pos_y": ((OBJ,), NUM),
    "distance": ((OBJ, OBJ), NUM),
    "angle": ((OBJ,), NUM),
    "is_static": ((OBJ,), BOOL),
    "grid_cell_x": ((OBJ, NUM), NUM),
    "grid_cell_y": ((OBJ, NUM), NUM),
    "event_active": ((STR, MAP), BOOL),
    "delta": ((NUM,), NUM),
    "sign_flip": ((NUM,), BOOL),
    "rising_edge": ((BOOL,), BOOL),
    "sustained": ((BOOL, NUM), BOOL),
    "within_after": ((BOOL, BOOL, NUM), BOOL),
    "count_since": ((BOOL, NUM), NUM),
    "variance": ((NUM, NUM), NUM),
}

QUANTIFIERS = ("exists_object", "forall_object")

COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")
ARITH_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Literal:
    value: Union[bool, int, float, str]


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class ParamMap:
    entries: tuple[tuple[str, "Node"], ...]


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Node", ...]


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class UnOp:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Quantifier:
    kind: str  # "exists" | "forall"
    binding: str
    filter: str
    body: "Node"


Node = Union[Literal, Name, ParamMap, Call, BinOp, UnOp, Quantifier]


@dataclass(frozen=True)
class DetectorProgram:
    name: str
    params_schema: dict[str, str]
    where: Node
    emit: tuple[tuple[str, Node], ...]
    source: str
    node_count: int = field(default=0)
    depends_on: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.node_count:
            object.__setattr__(self, "node_count", count_nodes(self))
        if not self.depends_on:
            object.__setattr__(self, "depends_on", tuple(collect_dependencies(self)))


def iter_children(node: Node):
    if isinstance(node, Call):
        yield from node.args
    elif isinstance(node, BinOp):
        yield node.left
        yield node.right
    elif isinstance(node, UnOp):
        yield node.operand
    elif isinstance(node, Quantifier):
        yield node.body
    elif isinstance(node, ParamMap):
        for _, v in node.entries:
            yield v


def count_expr_nodes(node: Node) -> int:
    return 1 + sum(count_expr_nodes(c) for c in iter_children(node))


def count_nodes(program: DetectorProgram) -> int:
    total = count_expr_nodes(program.where)
    for _, expr in program.emit:
        total += count_expr_nodes(expr)
    return total


def collect_dependencies(program: DetectorProgram) -> list[str]:
    """Event uids referenced via event_active, in first-use order."""
    deps: list[str] = []

    def walk(node: Node) -> None:
        if isinstance(node, Call) and node.func == "event_active":
            first = node.args[0]
            if isinstance(first, Literal) and isinstance(first.value, str):
                if first.value not in deps:
                    deps.append(first.value)
        for child in iter_children(node):
            walk(child)

    walk(program.where)
    for _, expr in program.emit:
        walk(expr)
    return deps


def node_sort(node: Node) -> str:
    """Static sort of an expression. Names are object references."""
    if isinstance(node, Literal):
        if isinstance(node.value, bool):
            return BOOL
        if isinstance(node.value, str):
            return STR
        return NUM
    if isinstance(node, Name):
        return OBJ
    if isinstance(node, ParamMap):
        return MAP
    if isinstance(node, Quantifier):
        return BOOL
    if isinstance(node, UnOp):
        return BOOL if node.op == "not" else NUM
    if isinstance(node, BinOp):
        if node.op in ("and", "or") or node.op in COMPARISONS:
            return BOOL
        return NUM
    if isinstance(node, Call):
        if node.func in PRIMITIVES:
            return PRIMITIVES[node.func][1]
        return BOOL
    raise TypeError(f"unknown node {node!r}")

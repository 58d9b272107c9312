"""LM-free detector mutation: threshold jitter, subtree replacement and
crossover over parsed programs. Always emits parseable source; deterministic
in the seed."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .ast import (
    BOOL,
    NUM,
    OBJ,
    BinOp,
    Call,
    DetectorProgram,
    Literal,
    Name,
    Node,
    ParamMap,
    Quantifier,
    UnOp,
    node_sort,
)
from .parser import parse_detector

JITTER_FACTORS = (0.5, 0.8, 0.9, 1.1, 1.25, 1.5, 2.0)
JITTER_OFFSETS = (-2.0, -1.0, 1.0, 2.0)
NUM_CONSTANTS = (0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 32.0, 64.0, 128.0, 200.0)
DURATIONS = (0.02, 0.05, 0.1, 0.2)
GRID_SIZES = (10, 25)


@dataclass(frozen=True)
class MutationPools:
    """Vocabulary available to fresh subtrees."""

    event_uids: tuple[str, ...] = ("CollisionStart", "CollisionEnd", "TaskComplete")
    filters: tuple[str, ...] = ("any", "dynamic", "static", "green", "blue", "black")


# --- unparser --------------------------------------------------------------


def unparse_expr(node: Node) -> str:
    if isinstance(node, Literal):
        v = node.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            escaped = v.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return repr(v)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, ParamMap):
        inner = ", ".join(f"{k}: {unparse_expr(v)}" for k, v in node.entries)
        return "{" + inner + "}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(unparse_expr(a) for a in node.args)})"
    if isinstance(node, Quantifier):
        func = "exists_object" if node.kind == "exists" else "forall_object"
        return f"{func}({node.binding}, {node.filter}, {unparse_expr(node.body)})"
    if isinstance(node, UnOp):
        if node.op == "not":
            return f"(not {unparse_expr(node.operand)})"
        return f"(-{unparse_expr(node.operand)})"
    if isinstance(node, BinOp):
        return f"({unparse_expr(node.left)} {node.op} {unparse_expr(node.right)})"
    raise TypeError(f"unknown node {node!r}")


def unparse(program: DetectorProgram) -> str:
    parts = [f"DETECT {program.name}"]
    if program.params_schema:
        inner = ", ".join(f"{k}: {t}" for k, t in program.params_schema.items())
        parts.append("PARAMS {" + inner + "}")
    parts.append(f"WHERE {unparse_expr(program.where)}")
    if program.emit:
        inner = ", ".join(f"{k}: {unparse_expr(v)}" for k, v in program.emit)
        parts.append("EMIT {" + inner + "}")
    return " ".join(parts)


# --- structural helpers ------------------------------------------------------


def _children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, Call):
        return node.args
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, UnOp):
        return (node.operand,)
    if isinstance(node, Quantifier):
        return (node.body,)
    if isinstance(node, ParamMap):
        return tuple(v for _, v in node.entries)
    return ()


def _rebuild(node: Node, children: tuple[Node, ...]) -> Node:
    if isinstance(node, Call):
        return Call(node.func, children)
    if isinstance(node, BinOp):
        return BinOp(node.op, children[0], children[1])
    if isinstance(node, UnOp):
        return UnOp(node.op, children[0])
    if isinstance(node, Quantifier):
        return Quantifier(node.kind, node.binding, node.filter, children[0])
    if isinstance(node, ParamMap):
        return ParamMap(tuple((k, c) for (k, _), c in zip(node.entries, children)))
    return node


def _collect(node: Node, scope: tuple[str, ...], path: tuple[int, ...],
             out: list[tuple[tuple[int, ...], Node, tuple[str, ...]]]) -> None:
    out.append((path, node, scope))
    child_scope = scope
    if isinstance(node, Quantifier):
        child_scope = scope + (node.binding,)
    for idx, child in enumerate(_children(node)):
        _collect(child, child_scope, path + (idx,), out)


def _replace_at(node: Node, path: tuple[int, ...], new: Node) -> Node:
    if not path:
        return new
    children = list(_children(node))
    children[path[0]] = _replace_at(children[path[0]], path[1:], new)
    return _rebuild(node, tuple(children))


# --- random expression generation -------------------------------------------


class _Gen:
    def __init__(self, rng: random.Random, pools: MutationPools):
        self.rng = rng
        self.pools = pools
        self.fresh = 0

    def fresh_name(self) -> str:
        self.fresh += 1
        return f"v{self.fresh}"

    def gen_obj(self, scope: tuple[str, ...]) -> Node:
        if scope and self.rng.random() < 0.9:
            return Name(self.rng.choice(scope))
        return Literal(self.rng.randint(1, 6))

    def gen_num(self, scope: tuple[str, ...], depth: int) -> Node:
        r = self.rng.random()
        if depth <= 0 or r < 0.35:
            return Literal(self.rng.choice(NUM_CONSTANTS))
        if r < 0.75:
            func = self.rng.choice(("speed", "vel_x", "vel_y", "pos_x", "pos_y", "angle"))
            return Call(func, (self.gen_obj(scope),))
        if r < 0.85:
            return Call("distance", (self.gen_obj(scope), self.gen_obj(scope)))
        if r < 0.92:
            return Call("delta", (self.gen_num(scope, depth - 1),))
        if r < 0.97:
            func = self.rng.choice(("grid_cell_x", "grid_cell_y"))
            return Call(func, (self.gen_obj(scope), Literal(self.rng.choice(GRID_SIZES))))
        return Call("variance", (self.gen_num(scope, depth - 1),
                                 Literal(self.rng.choice(DURATIONS))))

    def gen_bool(self, scope: tuple[str, ...], depth: int) -> Node:
        r = self.rng.random()
        if depth <= 0:
            r = min(r, 0.49)  # force a leaf form
        if r < 0.25:
            uid = self.rng.choice(self.pools.event_uids)
            return Call("event_active", (Literal(uid), ParamMap(())))
        if r < 0.45:
            op = self.rng.choice(("<", ">", "<=", ">="))
            return BinOp(op, self.gen_num(scope, depth - 1), self.gen_num(scope, depth - 1))
        if r < 0.50:
            if scope:
                return Call("contact", (self.gen_obj(scope), self.gen_obj(scope)))
            uid = self.rng.choice(self.pools.event_uids)
            return Call("event_active", (Literal(uid), ParamMap(())))
        if r < 0.60:
            binding = self.fresh_name()
            filt = self.rng.choice(self.pools.filters)
            return Quantifier("exists", binding, filt,
                              self.gen_bool(scope + (binding,), depth - 1))
        if r < 0.68:
            return Call("rising_edge", (self.gen_bool(scope, depth - 1),))
        if r < 0.74:
            return Call("sign_flip", (self.gen_num(scope, depth - 1),))
        if r < 0.80:
            return Call("sustained", (self.gen_bool(scope, depth - 1),
                                      Literal(self.rng.choice(DURATIONS))))
        if r < 0.86:
            return Call("within_after", (self.gen_bool(scope, depth - 1),
                                         self.gen_bool(scope, depth - 1),
                                         Literal(self.rng.choice(DURATIONS))))
        if r < 0.94:
            op = self.rng.choice(("and", "or"))
            return BinOp(op, self.gen_bool(scope, depth - 1), self.gen_bool(scope, depth - 1))
        return UnOp("not", self.gen_bool(scope, depth - 1))


# --- mutation entry point ----------------------------------------------------


def _jitter_literal(value, rng: random.Random):
    if rng.random() < 0.5:
        new = value * rng.choice(JITTER_FACTORS)
    else:
        new = value + rng.choice(JITTER_OFFSETS)
    if isinstance(value, int):
        return int(round(new))
    return float(f"{new:.9g}")


def grammar_mutate(parents: list[DetectorProgram], seed: int,
                   pools: MutationPools | None = None) -> str:
    """Propose a child program source from one or more parents."""
    if not parents:
        raise ValueError("need at least one parent")
    pools = pools or MutationPools()
    rng = random.Random(seed)
    base = parents[0]

    nodes: list[tuple[tuple[int, ...], Node, tuple[str, ...]]] = []
    _collect(base.where, (), (), nodes)
    numeric = [(p, n) for p, n, _ in nodes
               if isinstance(n, Literal) and isinstance(n.value, (int, float))
               and not isinstance(n.value, bool)]
    bool_sites = [(p, n, s) for p, n, s in nodes if node_sort(n) == BOOL]

    ops = ["replace"]
    if numeric:
        ops.append("jitter")
        ops.append("jitter")
    if len(parents) >= 2:
        ops.append("crossover")
    op = rng.choice(ops)

    gen = _Gen(rng, pools)
    new_where = base.where
    if op == "jitter":
        path, lit = numeric[rng.randrange(len(numeric))]
        new_where = _replace_at(base.where, path, Literal(_jitter_literal(lit.value, rng)))
    elif op == "crossover":
        donor = parents[rng.randrange(1, len(parents))]
        donor_nodes: list[tuple[tuple[int, ...], Node, tuple[str, ...]]] = []
        _collect(donor.where, (), (), donor_nodes)
        donor_bools = [n for _, n, _ in donor_nodes if node_sort(n) == BOOL]
        if donor_bools and bool_sites:
            path, _, _ = bool_sites[rng.randrange(len(bool_sites))]
            graft = donor_bools[rng.randrange(len(donor_bools))]
            new_where = _replace_at(base.where, path, graft)
        else:
            op = "replace"
    if op == "replace":
        path, node, scope = nodes[rng.randrange(len(nodes))]
        sort = node_sort(node)
        if sort == BOOL:
            fresh = gen.gen_bool(scope, depth=2)
        elif sort == NUM:
            fresh = gen.gen_num(scope, depth=2)
        elif sort == OBJ:
            fresh = gen.gen_obj(scope)
        else:
            fresh = gen.gen_bool(scope, depth=2)
            path = ()
        new_where = _replace_at(base.where, path, fresh)

    child = DetectorProgram(
        name=base.name,
        params_schema=base.params_schema,
        where=new_where,
        emit=base.emit,
        source="",
    )
    source = unparse(child)
    # Closure guarantee: the child must parse; fall back to the reprinted
    # parent if a generator bug ever breaks it.
    try:
        parse_detector(source)
    except SyntaxError:
        source = unparse(base)
    return source

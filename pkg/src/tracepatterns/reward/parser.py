"""Reward DSL parser: call expressions with positional and keyword arguments.

Comments (# to end of line) are stripped before parsing. Errors are
structured (location, expected, found, one-line repair hint) so the LM
repair loop can embed them. Identifier validity against the library is
deliberately NOT checked here; that happens at evaluation time so parse
errors and semantic errors produce distinct repair messages.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .ast import (
    PREDICATES,
    AfterNode,
    AndNode,
    CountNode,
    EventNode,
    NearbyAtNode,
    NotNode,
    ObjectIdNode,
    OrNode,
    RewardNode,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\(|\)|\[|\]|\{|\}|:|,|=)
    """,
    re.VERBOSE,
)


class RewardParseError(SyntaxError):
    def __init__(self, message: str, line: int, col: int, expected: str = "",
                 found: str = "", hint: str = ""):
        detail = f"line {line}, col {col}: {message}"
        if expected:
            detail += f" (expected {expected}, found {found!r})"
        if hint:
            detail += f"\nhint: {hint}"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        self.hint = hint


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def strip_comments(source: str) -> str:
    out_lines = []
    for line in source.split("\n"):
        in_string: str | None = None
        for i, ch in enumerate(line):
            if in_string:
                if ch == in_string and line[i - 1] != "\\":
                    in_string = None
            elif ch in "\"'":
                in_string = ch
            elif ch == "#":
                line = line[:i]
                break
        out_lines.append(line)
    return "\n".join(out_lines)


def _tokenize(source: str) -> list[_Tok]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise RewardParseError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1,
                hint="only predicate calls, numbers, strings, lists and dicts are allowed")
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            tokens.append(_Tok(kind, text, line, pos - line_start + 1))
        if "\n" in text:
            line += text.count("\n")
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(_Tok("eof", "", line, pos - line_start + 1))
    return tokens


_HINT_PREDICATES = "valid predicates: " + ", ".join(PREDICATES)


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.tokens[self.i]

    def advance(self) -> _Tok:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, message: str, expected: str = "", hint: str = "") -> RewardParseError:
        tok = self.cur
        return RewardParseError(message, tok.line, tok.col, expected=expected,
                                found=tok.text or "<eof>", hint=hint)

    def expect(self, text: str) -> _Tok:
        if self.cur.text != text:
            raise self.fail(f"expected {text!r}", expected=text)
        return self.advance()

    def parse_program(self) -> RewardNode:
        node = self.parse_expression()
        if self.cur.kind != "eof":
            raise self.fail("trailing input after expression", expected="<eof>",
                            hint="a reward program is a single top-level expression")
        if isinstance(node, ObjectIdNode):
            raise RewardParseError(
                "OBJECT_ID is a value, not a reward expression", 1, 1,
                hint="wrap it in a predicate such as NEARBY_AT or EVENT params")
        return node

    def parse_expression(self) -> RewardNode:
        tok = self.cur
        if tok.kind != "ident":
            raise self.fail("expected a predicate call", expected="predicate name",
                            hint=_HINT_PREDICATES)
        name = tok.text.upper()
        if name not in PREDICATES:
            raise self.fail(f"unknown predicate {tok.text!r}", expected="predicate name",
                            hint=_HINT_PREDICATES)
        self.advance()
        self.expect("(")
        positional, keyword = self.parse_args(name)
        self.expect(")")
        return self.build(name, positional, keyword, tok)

    def parse_args(self, pred: str) -> tuple[list[Any], dict[str, Any]]:
        positional: list[Any] = []
        keyword: dict[str, Any] = {}
        while self.cur.text != ")":
            if self.cur.kind == "ident" and self.tokens[self.i + 1].text == "=":
                key = self.advance().text
                self.advance()
                keyword[key] = self.parse_value_or_expr()
            else:
                if keyword:
                    raise self.fail("positional argument after keyword argument")
                positional.append(self.parse_value_or_expr())
            if self.cur.text == ",":
                self.advance()
            elif self.cur.text != ")":
                raise self.fail("expected ',' or ')' in argument list", expected=", or )")
        return positional, keyword

    def parse_value_or_expr(self) -> Any:
        tok = self.cur
        if tok.kind == "ident":
            upper = tok.text.upper()
            if upper in PREDICATES and self.tokens[self.i + 1].text == "(":
                return self.parse_expression()
            if tok.text in ("None", "null"):
                self.advance()
                return None
            if tok.text in ("True", "true"):
                self.advance()
                return True
            if tok.text in ("False", "false"):
                self.advance()
                return False
            raise self.fail(f"unexpected identifier {tok.text!r}",
                            expected="value or predicate call", hint=_HINT_PREDICATES)
        if tok.kind == "number":
            self.advance()
            text = tok.text
            if "." in text or "e" in text or "E" in text:
                return float(text)
            return int(text)
        if tok.kind == "string":
            self.advance()
            return tok.text[1:-1].replace('\\"', '"').replace("\\'", "'")
        if tok.text == "[" or tok.text == "(":
            closing = "]" if tok.text == "[" else ")"
            self.advance()
            items = []
            while self.cur.text != closing:
                items.append(self.parse_value_or_expr())
                if self.cur.text == ",":
                    self.advance()
                elif self.cur.text != closing:
                    raise self.fail(f"expected ',' or '{closing}' in list")
            self.advance()
            return items
        if tok.text == "{":
            self.advance()
            entries: dict[str, Any] = {}
            while self.cur.text != "}":
                key_tok = self.cur
                if key_tok.kind == "string":
                    key = key_tok.text[1:-1]
                elif key_tok.kind == "ident":
                    key = key_tok.text
                else:
                    raise self.fail("expected parameter name", expected="string or identifier")
                self.advance()
                self.expect(":")
                entries[key] = self.parse_value_or_expr()
                if self.cur.text == ",":
                    self.advance()
                elif self.cur.text != "}":
                    raise self.fail("expected ',' or '}' in params dict")
            self.advance()
            return entries
        raise self.fail("expected a value", expected="number, string, list, dict or call")

    # --- node construction with arity/keyword validation -------------------

    def build(self, name: str, pos: list[Any], kw: dict[str, Any], tok: _Tok) -> RewardNode:
        def bad(message: str, hint: str = "") -> RewardParseError:
            return RewardParseError(message, tok.line, tok.col, hint=hint or _HINT_PREDICATES)

        def reject_unknown(allowed: tuple[str, ...]) -> None:
            for key in kw:
                if key not in allowed:
                    raise bad(f"{name} got unexpected keyword {key!r}",
                              hint=f"{name} accepts keywords: {', '.join(allowed) or 'none'}")

        def expr_children() -> tuple[RewardNode, ...]:
            children = []
            for i, child in enumerate(pos):
                if not _is_expr(child):
                    raise bad(f"{name} argument {i + 1} must be a predicate call")
                children.append(child)
            return tuple(children)

        if name in ("AND", "OR"):
            reject_unknown(())
            children = expr_children()
            if not children:
                raise bad(f"{name} needs at least one child expression")
            return AndNode(children) if name == "AND" else OrNode(children)
        if name == "NOT":
            reject_unknown(())
            children = expr_children()
            if len(children) != 1:
                raise bad("NOT takes exactly one child expression")
            return NotNode(children[0])
        if name == "EVENT":
            reject_unknown(("params",))
            if not pos or not isinstance(pos[0], str):
                raise bad('EVENT needs a string uid/label, e.g. EVENT("CollisionStart")')
            params = kw.get("params")
            if len(pos) > 2:
                raise bad("EVENT takes (uid, params?)")
            if len(pos) == 2:
                params = pos[1]
            if params is not None and not isinstance(params, dict):
                raise bad("EVENT params must be a dict")
            return EventNode(pos[0], params)
        if name == "AFTER":
            reject_unknown(("min_delta", "max_delta", "first_params", "second_params"))
            if len(pos) < 2 or not isinstance(pos[0], str) or not isinstance(pos[1], str):
                raise bad('AFTER needs two uids: AFTER("uid_a", "uid_b", ...)')
            extras = pos[2:]
            if len(extras) > 2:
                raise bad("AFTER takes at most 2 positional deltas (min_delta, max_delta)")
            min_delta = kw.get("min_delta", extras[0] if len(extras) >= 1 else None)
            max_delta = kw.get("max_delta", extras[1] if len(extras) >= 2 else None)
            for label, v in (("min_delta", min_delta), ("max_delta", max_delta)):
                if v is not None and (not isinstance(v, (int, float)) or v < 0):
                    raise bad(f"AFTER {label} must be a non-negative number")
            return AfterNode(pos[0], pos[1], min_delta, max_delta,
                             kw.get("first_params"), kw.get("second_params"))
        if name == "WITHIN":
            reject_unknown(("window", "event_params", "reference_params"))
            if len(pos) < 2 or not isinstance(pos[0], str) or not isinstance(pos[1], str):
                raise bad('WITHIN needs two uids and a window: WITHIN("a", "b", w)')
            window = kw.get("window", pos[2] if len(pos) >= 3 else None)
            if window is None or not isinstance(window, (int, float)) or window < 0:
                raise bad("WITHIN window must be a non-negative number")
            return AfterNode(pos[0], pos[1], None, float(window),
                             kw.get("event_params"), kw.get("reference_params"))
        if name in ("COUNT", "GT", "LT"):
            reject_unknown(("params",))
            if len(pos) < 2 or not isinstance(pos[0], str):
                raise bad(f'{name} needs (uid, count): {name}("uid", 2)')
            if not isinstance(pos[1], int) or isinstance(pos[1], bool) or pos[1] < 0:
                raise bad(f"{name} count must be a non-negative integer")
            params = kw.get("params", pos[2] if len(pos) >= 3 else None)
            if params is not None and not isinstance(params, dict):
                raise bad(f"{name} params must be a dict")
            return CountNode(name.lower(), pos[0], pos[1], params)
        if name == "NEARBY_AT":
            reject_unknown(("threshold_strength", "x", "y", "t"))
            args = list(pos)
            if not args:
                raise bad("NEARBY_AT needs (obj_id, x, y, t, threshold_strength=0.1)")
            obj = args.pop(0)
            if not isinstance(obj, (int, ObjectIdNode)) or isinstance(obj, bool):
                raise bad("NEARBY_AT obj_id must be an integer or OBJECT_ID(...)")
            def grab(key: str) -> float:
                if key in kw:
                    v = kw[key]
                elif args:
                    v = args.pop(0)
                else:
                    raise bad(f"NEARBY_AT missing {key}")
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    raise bad(f"NEARBY_AT {key} must be a number")
                return float(v)
            x = grab("x")
            y = grab("y")
            t = grab("t")
            if args:
                threshold = args.pop(0)
            else:
                threshold = kw.get("threshold_strength", 0.1)
            if args:
                raise bad("NEARBY_AT takes at most 5 arguments")
            if not isinstance(threshold, (int, float)) or threshold <= 0:
                raise bad("NEARBY_AT threshold_strength must be a positive number")
            if not 0.0 <= t <= 1.0:
                raise bad("NEARBY_AT t must be a normalized time in [0, 1]")
            return NearbyAtNode(obj, x, y, t, float(threshold))
        if name == "OBJECT_ID":
            reject_unknown(())
            if len(pos) != 2 or not all(isinstance(a, str) for a in pos):
                raise bad('OBJECT_ID needs two strings: OBJECT_ID("red", "circle")')
            return ObjectIdNode(pos[0].lower(), pos[1].lower())
        raise bad(f"unknown predicate {name!r}")


def _is_expr(value: Any) -> bool:
    return isinstance(value, (EventNode, AndNode, OrNode, NotNode, AfterNode,
                              CountNode, NearbyAtNode))


def parse_reward(source: str) -> RewardNode:
    stripped = strip_comments(source)
    return _Parser(stripped).parse_program()

"""DetectorScript tokenizer and recursive-descent parser.

Errors carry line/column and the expected-token set so an LM repair loop can
be fed something structured; see docs/detectorscript.md for the grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    COMPARISONS,
    MAP,
    PRIMITIVES,
    QUANTIFIERS,
    BinOp,
    Call,
    DetectorProgram,
    Literal,
    Name,
    Node,
    OBJECT_FILTERS,
    ParamMap,
    Quantifier,
    UnOp,
)

KEYWORDS = ("DETECT", "PARAMS", "WHERE", "EMIT", "and", "or", "not", "true", "false")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|<|>|\+|-|\*|/|\(|\)|\{|\}|:|,)
    """,
    re.VERBOSE,
)


class DetectorParseError(SyntaxError):
    def __init__(self, message: str, line: int, col: int,
                 expected: tuple[str, ...] = (), found: str = ""):
        detail = f"line {line}, col {col}: {message}"
        if expected:
            detail += f" (expected one of {', '.join(expected)}; found {found!r})"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found


class UnknownPrimitiveError(DetectorParseError):
    pass


class ArityError(DetectorParseError):
    pass


class UndeclaredParameterError(DetectorParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # number | string | ident | op | eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise DetectorParseError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def error(self, message: str, expected: tuple[str, ...] = (),
              cls=DetectorParseError) -> DetectorParseError:
        tok = self.cur
        return cls(message, tok.line, tok.col, expected=expected, found=tok.text or "<eof>")

    def expect(self, text: str) -> Token:
        if self.cur.text != text:
            raise self.error(f"expected {text!r}", expected=(text,))
        return self.advance()

    def expect_ident(self) -> Token:
        if self.cur.kind != "ident":
            raise self.error("expected identifier", expected=("identifier",))
        return self.advance()

    # --- grammar ---------------------------------------------------------

    def parse_program(self) -> DetectorProgram:
        self.expect("DETECT")
        name = self.expect_ident().text
        params: dict[str, str] = {}
        if self.cur.text == "PARAMS":
            self.advance()
            self.expect("{")
            while self.cur.text != "}":
                key = self.expect_ident().text
                self.expect(":")
                params[key] = self.expect_ident().text
                if self.cur.text == ",":
                    self.advance()
                elif self.cur.text != "}":
                    raise self.error("expected ',' or '}' in PARAMS", expected=(",", "}"))
            self.expect("}")
        self.expect("WHERE")
        where = self.parse_expr()
        emit: list[tuple[str, Node]] = []
        if self.cur.text == "EMIT":
            self.advance()
            self.expect("{")
            while self.cur.text != "}":
                key = self.expect_ident().text
                if key not in params:
                    raise self.error(
                        f"EMIT key {key!r} not declared in PARAMS",
                        expected=tuple(params) or ("<no PARAMS declared>",),
                        cls=UndeclaredParameterError,
                    )
                self.expect(":")
                emit.append((key, self.parse_expr()))
                if self.cur.text == ",":
                    self.advance()
                elif self.cur.text != "}":
                    raise self.error("expected ',' or '}' in EMIT", expected=(",", "}"))
            self.expect("}")
        if self.cur.kind != "eof":
            raise self.error("trailing input after program", expected=("<eof>",))
        return DetectorProgram(
            name=name,
            params_schema=params,
            where=where,
            emit=tuple(emit),
            source=self.source,
        )

    def parse_expr(self) -> Node:
        return self.parse_or()

    def parse_or(self) -> Node:
        left = self.parse_and()
        while self.cur.text == "or":
            self.advance()
            left = BinOp("or", left, self.parse_and())
        return left

    def parse_and(self) -> Node:
        left = self.parse_not()
        while self.cur.text == "and":
            self.advance()
            left = BinOp("and", left, self.parse_not())
        return left

    def parse_not(self) -> Node:
        if self.cur.text == "not":
            self.advance()
            return UnOp("not", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self) -> Node:
        left = self.parse_additive()
        if self.cur.text in COMPARISONS:
            op = self.advance().text
            return BinOp(op, left, self.parse_additive())
        return left

    def parse_additive(self) -> Node:
        left = self.parse_multiplicative()
        while self.cur.text in ("+", "-"):
            op = self.advance().text
            left = BinOp(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> Node:
        left = self.parse_unary()
        while self.cur.text in ("*", "/"):
            op = self.advance().text
            left = BinOp(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Node:
        if self.cur.text == "-":
            self.advance()
            return UnOp("-", self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Node:
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            text = tok.text
            if "." in text or "e" in text or "E" in text:
                return Literal(float(text))
            return Literal(int(text))
        if tok.kind == "string":
            self.advance()
            body = tok.text[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            return Literal(body)
        if tok.text == "true":
            self.advance()
            return Literal(True)
        if tok.text == "false":
            self.advance()
            return Literal(False)
        if tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.text == "{":
            return self.parse_map()
        if tok.kind == "ident":
            if tok.text in KEYWORDS:
                raise self.error("expected expression",
                                 expected=("number", "string", "identifier", "(", "{"))
            self.advance()
            if self.cur.text == "(":
                return self.parse_call(tok)
            return Name(tok.text)
        raise self.error("expected expression",
                         expected=("number", "string", "identifier", "(", "{"))

    def parse_map(self) -> Node:
        self.expect("{")
        entries: list[tuple[str, Node]] = []
        while self.cur.text != "}":
            key = self.expect_ident().text
            self.expect(":")
            entries.append((key, self.parse_expr()))
            if self.cur.text == ",":
                self.advance()
            elif self.cur.text != "}":
                raise self.error("expected ',' or '}' in map", expected=(",", "}"))
        self.expect("}")
        return ParamMap(tuple(entries))

    def parse_call(self, name_tok: Token) -> Node:
        func = name_tok.text
        self.expect("(")
        if func in QUANTIFIERS:
            binding = self.expect_ident().text
            self.expect(",")
            filt_tok = self.expect_ident()
            if filt_tok.text not in OBJECT_FILTERS:
                raise DetectorParseError(
                    f"unknown object filter {filt_tok.text!r}",
                    filt_tok.line, filt_tok.col,
                    expected=OBJECT_FILTERS, found=filt_tok.text)
            self.expect(",")
            body = self.parse_expr()
            self.expect(")")
            kind = "exists" if func == "exists_object" else "forall"
            return Quantifier(kind, binding, filt_tok.text, body)
        if func not in PRIMITIVES:
            raise UnknownPrimitiveError(
                f"unknown primitive {func!r}", name_tok.line, name_tok.col,
                expected=tuple(sorted(PRIMITIVES) + list(QUANTIFIERS)), found=func)
        args: list[Node] = []
        while self.cur.text != ")":
            args.append(self.parse_expr())
            if self.cur.text == ",":
                self.advance()
            elif self.cur.text != ")":
                raise self.error("expected ',' or ')' in call", expected=(",", ")"))
        self.expect(")")
        sig, _ = PRIMITIVES[func]
        min_arity = len(sig) - (1 if sig and sig[-1] == MAP else 0)
        if not (min_arity <= len(args) <= len(sig)):
            raise ArityError(
                f"{func} takes {len(sig)} arguments, got {len(args)}",
                name_tok.line, name_tok.col,
                expected=(f"{len(sig)} args",), found=f"{len(args)} args")
        if len(args) < len(sig) and sig[-1] == MAP:
            args.append(ParamMap(()))
        if func == "event_active":
            first = args[0]
            if not (isinstance(first, Literal) and isinstance(first.value, str)):
                raise DetectorParseError(
                    "event_active requires a literal string uid",
                    name_tok.line, name_tok.col,
                    expected=("string literal",), found=type(first).__name__)
            if not isinstance(args[1], ParamMap):
                raise DetectorParseError(
                    "event_active filter must be a {key: expr} map",
                    name_tok.line, name_tok.col,
                    expected=("map",), found=type(args[1]).__name__)
        return Call(func, tuple(args))


def parse_detector(source: str) -> DetectorProgram:
    return _Parser(source).parse_program()


def program_length(program: DetectorProgram) -> int:
    """Operator-node count, the whitespace-invariant line-count analogue."""
    return program.node_count

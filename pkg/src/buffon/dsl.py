"""Text syntax for machines.

    expr := "x" | "flip" | "third" | "rama" ["(" ("binary"|"rejection") ")"]
          | "const(" INT "/" INT ")"
          | UNARY "(" expr ")"
          | BINARY "(" expr "," expr ")"
          | "cond(" expr "," expr "," expr ")"
          | ("vnval" | "vniter") "(" CLASS "," INT "," expr ")"
          | ("polylog" | "walk") "(" INT "," expr ")"
          | "bistoch(" STRING "," expr ")"
          | NAME                          # a registered closed machine

``at(f, g)`` feeds g into the free variable of f.  Macros such as ``sq``,
``sqrt0``, ``atan`` and the exp/log/trig names expand at parse time, so
printing gives back the expanded core form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .bags import Int1, asin_half_machine, atan_machine, erf_int_machine, log1p_machine
from .combinators import (
    And,
    Bind,
    Cond,
    ConstRational,
    Even,
    Expr,
    Flip,
    Mean,
    Not,
    Or,
    Third,
    Var,
)
from .vonneumann import THEOREM4, PermClass, Polylog, VNIter, VNValue, theorem4_machine
from .walks import BinomWalk, GrammarBernoulli, GrammarError, Rama, Sqrt1m, parse_grammar


class DSLError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, str, punct, eof
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r\n]+)
      | (?P<comment>\#[^\n]*)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<int>[0-9]+)
      | (?P<str>"[^"]*")
      | (?P<punct>[(),/])""",
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise DSLError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            out.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + chunk.rfind("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    out.append(Token("eof", "", line, col))
    return out


_LEAVES = {"x": Var(), "flip": Flip(), "third": Third()}

_UNARY = {
    "not": Not,
    "even": Even,
    "sq": lambda e: And(e, e),
    "expn": lambda e: VNValue(PermClass.SORTED, 0, e),
    "sqrt1m": Sqrt1m,
    "sqrt0": lambda e: Sqrt1m(Not(e)),
    "int1": Int1,
    "log1p": lambda e: Bind(log1p_machine(), e),
    "atan": lambda e: Bind(atan_machine(), e),
    "asin_half": lambda e: Bind(asin_half_machine(), e),
    "erf_int": lambda e: Bind(erf_int_machine(), e),
}
for _name in THEOREM4:
    _UNARY.setdefault(_name, lambda e, _n=_name: theorem4_machine(_n, e))

_BINARY = {"and": And, "prod": And, "or": Or, "mean": Mean, "at": Bind}

_CLASSES = {c.value: c for c in PermClass}

# argument kinds: e = expr, i = integer, c = permutation class, s = string
_SPECIAL = {
    "cond": "eee",
    "vnval": "cie",
    "vniter": "cie",
    "polylog": "ie",
    "walk": "ie",
    "bistoch": "se",
}

KEYWORDS = set(_LEAVES) | set(_UNARY) | set(_BINARY) | set(_SPECIAL) | {"const", "rama"}


class _Parser:
    def __init__(self, text: str, names):
        self.toks = tokenize(text)
        self.i = 0
        self.names = names

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise DSLError(msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("punct",):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r} after expression")
        return e

    def integer(self) -> int:
        if self.tok.kind != "int":
            self.error(f"expected an integer, found {self.tok.text or 'end of input'!r}")
        return int(self.advance().text)

    def args(self, head: Token, kinds: str) -> list:
        self.expect("(")
        out = []
        for pos, kind in enumerate(kinds):
            if pos:
                if self.tok.text == ")":
                    self.error(f"{head.text} takes {len(kinds)} arguments, got {pos}")
                self.expect(",")
            if kind == "e":
                out.append(self.expr())
            elif kind == "i":
                out.append(self.integer())
            elif kind == "c":
                t = self.advance()
                if t.text not in _CLASSES:
                    self.error(
                        f"unknown permutation class {t.text!r}; one of {', '.join(_CLASSES)}", t
                    )
                out.append(_CLASSES[t.text])
            elif kind == "s":
                t = self.advance()
                if t.kind != "str":
                    self.error("expected a quoted string", t)
                out.append((t.text[1:-1], t))
        if self.tok.text == ",":
            self.error(f"{head.text} takes {len(kinds)} argument{'s' if len(kinds) > 1 else ''}")
        self.expect(")")
        return out

    def expr(self) -> Expr:
        tok = self.tok
        if tok.kind != "ident":
            found = tok.text or "end of input"
            self.error(f"expected an expression, found {found!r}")
        self.advance()
        name = tok.text
        if name in _LEAVES:
            return _LEAVES[name]
        if name == "rama":
            if self.tok.text == "(":
                self.advance()
                t = self.advance()
                if t.text not in ("binary", "rejection"):
                    self.error("rama variant must be 'binary' or 'rejection'", t)
                self.expect(")")
                return Rama(t.text)
            return Rama()
        if name == "const":
            self.expect("(")
            a_tok = self.tok
            a = self.integer()
            self.expect("/")
            b = self.integer()
            self.expect(")")
            if b == 0 or a > b:
                self.error(f"constant {a}/{b} is outside [0, 1]", a_tok)
            return ConstRational(a, b)
        try:
            if name in _UNARY:
                (arg,) = self.args(tok, "e")
                return _UNARY[name](arg)
            if name in _BINARY:
                a, b = self.args(tok, "ee")
                return _BINARY[name](a, b)
            if name in _SPECIAL:
                vals = self.args(tok, _SPECIAL[name])
                return self.special(name, vals, tok)
        except (ValueError, GrammarError) as exc:
            if isinstance(exc, DSLError):
                raise
            self.error(str(exc), tok)
        if name in self.names:
            if self.tok.text == "(":
                self.error(f"named machine {name!r} takes no arguments")
            return self.names[name]
        self.error(f"unknown identifier {name!r}", tok)

    def special(self, name, vals, tok):
        if name == "cond":
            return Cond(*vals)
        if name == "vnval":
            return VNValue(*vals)
        if name == "vniter":
            return VNIter(*vals)
        if name == "polylog":
            return Polylog(*vals)
        if name == "walk":
            return BinomWalk(*vals)
        text, stok = vals[0]
        try:
            g = parse_grammar(text)
        except GrammarError as exc:
            self.error(f"bad grammar: {exc}", stok)
        return GrammarBernoulli(g, vals[1])


def parse(text: str, names=None) -> Expr:
    """Parse machine text.  ``names`` maps extra identifiers to closed machines
    (defaults to the built-in registry)."""
    if names is None:
        from .registry import REGISTRY

        names = {k: v.expr for k, v in REGISTRY.items()}
    return _Parser(text, names).parse()


def to_dsl(e: Expr) -> str:
    """Canonical text for ``e``; ``parse(to_dsl(e)) == e``."""
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Flip):
        return "flip"
    if isinstance(e, Third):
        return "third"
    if isinstance(e, ConstRational):
        return f"const({e.a}/{e.b})"
    if isinstance(e, Rama):
        return "rama" if e.five_ninths == "binary" else f"rama({e.five_ninths})"
    if isinstance(e, Sqrt1m) and isinstance(e.e, Not):
        return f"sqrt0({to_dsl(e.e.e)})"
    if isinstance(e, VNValue) and e.cls is PermClass.SORTED and e.a == 0:
        return f"expn({to_dsl(e.e)})"
    simple = {Not: "not", Even: "even", Sqrt1m: "sqrt1m", Int1: "int1"}
    if type(e) in simple:
        return f"{simple[type(e)]}({to_dsl(e.e)})"
    pairs = {And: "and", Or: "or", Mean: "mean"}
    if type(e) in pairs:
        return f"{pairs[type(e)]}({to_dsl(e.e1)}, {to_dsl(e.e2)})"
    if isinstance(e, Bind):
        return f"at({to_dsl(e.body)}, {to_dsl(e.arg)})"
    if isinstance(e, Cond):
        return f"cond({to_dsl(e.r)}, {to_dsl(e.p)}, {to_dsl(e.q)})"
    if isinstance(e, VNValue):
        return f"vnval({e.cls.value}, {e.a}, {to_dsl(e.e)})"
    if isinstance(e, VNIter):
        return f"vniter({e.cls.value}, {e.b}, {to_dsl(e.e)})"
    if isinstance(e, Polylog):
        return f"polylog({e.r}, {to_dsl(e.e)})"
    if isinstance(e, BinomWalk):
        return f"walk({e.t}, {to_dsl(e.e)})"
    if isinstance(e, GrammarBernoulli):
        return f'bistoch("{e.g.to_text("; ")}", {to_dsl(e.e)})'
    raise TypeError(f"cannot print {type(e).__name__}")

"""Input programs and their text format.

Example::

    name: overview
    vars: x in [0, 1]
    expr: x*x - x

Optional sections: ``let:`` (named subexpressions, ``t1 = 331. + 0.6*x3``)
and ``constraints:`` (``0 <= g``).  Items are separated by ``;`` or newlines.
``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .core.expr import Expr, const, postorder, to_rational_function, var
from .core.interval import Interval
from .core.polynomial import Polynomial
from .core.rational import RationalFunction


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg, self.line, self.col = msg, line, col
        super().__init__(f"line {line}, column {col}: {msg}" if line else msg)


@dataclass
class Program:
    name: str
    var_names: List[str]
    bounds: List[Tuple[Fraction, Fraction]]
    body: Expr
    constraints: List[Expr] = field(default_factory=list)

    def __post_init__(self):
        for (lo, hi), v in zip(self.bounds, self.var_names):
            if not lo < hi:
                raise ValueError(f"bounds of {v} are not increasing: [{lo}, {hi}]")
        for g in self.constraints:
            bad = [n.value for n in postorder(g) if n.op == "var" and n.value >= self.n]
            if bad:
                raise ValueError("constraint mentions an undeclared variable")

    @property
    def n(self) -> int:
        return len(self.var_names)

    @property
    def box(self) -> List[Interval]:
        return [Interval(lo, hi) for lo, hi in self.bounds]

    def function(self) -> RationalFunction:
        return to_rational_function(self.body, self.n)

    def is_polynomial(self) -> bool:
        """True when every divisor is a constant expression."""
        return all(node.op != "div" or not any(a.op == "var" for a in postorder(node.args[1]))
                   for node in postorder(self.body))

    def constraint_polynomials(self) -> List[Polynomial]:
        out = []
        for g in self.constraints:
            rf = to_rational_function(g, self.n)
            if not rf.is_polynomial():
                raise ValueError("constraints must be polynomial")
            out.append(rf.as_polynomial())
        return out

    def degree(self) -> int:
        rf = self.function()
        return max(rf.num.degree(), rf.den.degree())


# -- tokenizer ----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|<=|[-+*/^(),;:\[\]=])
""", re.VERBOSE)

_SECTIONS = ("name", "vars", "let", "constraints", "expr")


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    out: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            out.append(Token("nl", "\n", line, pos - line_start + 1))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok = m.group()
            out.append(Token(kind, "^" if tok == "**" else tok, line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


def _join_lines(tokens: List[Token]) -> List[Token]:
    """Drop newlines that cannot end an item (inside brackets or around an operator)."""
    out: List[Token] = []
    depth = 0
    for i, tok in enumerate(tokens):
        if tok.kind == "op" and tok.text in "([":
            depth += 1
        elif tok.kind == "op" and tok.text in ")]":
            depth = max(depth - 1, 0)
        if tok.kind != "nl":
            out.append(tok)
            continue
        prev = out[-1] if out else None
        nxt = next((t for t in tokens[i + 1:] if t.kind != "nl"), None)
        if depth > 0:
            continue
        if prev is not None and prev.kind == "op" and prev.text in "+-*/^(,=<=[":
            continue
        if nxt is not None and nxt.kind == "op" and nxt.text in ("+", "-", "*", "/", "^"):
            continue
        if prev is not None and prev.kind == "nl":
            continue
        out.append(tok)
    return out


def _is_int_literal(text: str) -> bool:
    return text.isdigit()


def parse_number(text: str) -> Fraction:
    """Exact value of a decimal or scientific literal ("0.6" -> 3/5, "331." -> 331)."""
    if text.endswith("."):
        text = text[:-1]
    return Fraction(text)


class _Parser:
    def __init__(self, text: str):
        self.toks = _join_lines(tokenize(text))
        self.i = 0
        self.names: Dict[str, Expr] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "ident") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not (self.tok.kind in ("op", "ident") and self.tok.text == text):
            shown = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {shown!r}")
        return self.advance()

    def skip_newlines(self):
        while self.tok.kind == "nl":
            self.i += 1

    def at_section(self) -> bool:
        return (self.tok.kind == "ident" and self.tok.text in _SECTIONS
                and self.toks[self.i + 1].kind == "op" and self.toks[self.i + 1].text == ":")

    def at_item_end(self) -> bool:
        return self.tok.kind in ("nl", "eof") or (self.tok.kind == "op" and self.tok.text == ";")

    def items(self, parse_item):
        """Parse ``item (; | newline) item ...`` until the next section header."""
        while True:
            self.skip_newlines()
            if self.tok.kind == "eof" or self.at_section():
                return
            parse_item()
            if not self.at_item_end():
                self.error(f"unexpected {self.tok.text!r}")
            if self.tok.kind == "op":
                self.advance()

    # -- program ------------------------------------------------------------
    def program(self) -> Program:
        name = "program"
        var_names: List[str] = []
        bounds: List[Tuple[Fraction, Fraction]] = []
        constraints: List[Expr] = []
        body = None
        seen = set()
        self.skip_newlines()
        while self.tok.kind != "eof":
            if not self.at_section():
                self.error(f"expected a section header, found {self.tok.text!r}")
            head = self.advance()
            self.expect(":")
            if head.text in seen:
                self.error(f"duplicate section {head.text!r}", head)
            seen.add(head.text)
            if head.text == "name":
                tok = self.advance()
                if tok.kind not in ("ident", "num"):
                    self.error("expected a program name", tok)
                parts = [tok.text]
                while not self.at_item_end():
                    parts.append(self.advance().text)
                name = "".join(parts)
            elif head.text == "vars":
                if var_names:
                    self.error("variables must be declared before use", head)

                def vardecl():
                    tok = self.advance()
                    if tok.kind != "ident":
                        self.error("expected a variable name", tok)
                    if tok.text in self.names:
                        self.error(f"duplicate variable {tok.text!r}", tok)
                    self.expect("in")
                    self.expect("[")
                    lo = self.signed_number()
                    self.expect(",")
                    hi = self.signed_number()
                    close = self.expect("]")
                    if not lo < hi:
                        self.error(f"bounds of {tok.text} are not increasing", close)
                    self.names[tok.text] = var(len(var_names))
                    var_names.append(tok.text)
                    bounds.append((lo, hi))

                self.items(vardecl)
            elif head.text == "let":

                def binding():
                    tok = self.advance()
                    if tok.kind != "ident":
                        self.error("expected a name", tok)
                    if tok.text in self.names:
                        self.error(f"name {tok.text!r} already defined", tok)
                    self.expect("=")
                    self.names[tok.text] = self.expression()

                self.items(binding)
            elif head.text == "constraints":

                def ineq():
                    tok = self.advance()
                    if tok.kind != "num" or parse_number(tok.text) != 0:
                        self.error("constraints have the form 0 <= expression", tok)
                    self.expect("<=")
                    constraints.append(self.expression())

                self.items(ineq)
            else:
                self.skip_newlines()
                if self.tok.kind == "eof" or self.at_section():
                    self.error("empty expression")
                body = self.expression()
                self.skip_newlines()
                if self.tok.kind != "eof" and not self.at_section():
                    self.error(f"unexpected {self.tok.text!r} after expression")
            self.skip_newlines()
        if body is None:
            raise ParseError("missing expr section")
        if not var_names:
            raise ParseError("missing vars section")
        return Program(name, var_names, bounds, body, constraints)

    def signed_number(self) -> Fraction:
        tok = self.tok
        e = self.expression()
        if any(node.op == "var" for node in postorder(e)):
            self.error("expected a constant", tok)
        return to_rational_function(e, 0).eval([])

    # -- expressions --------------------------------------------------------
    def expression(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.advance().text
            right = self.unary()
            left = left * right if op == "*" else left / right
        return left

    def unary(self) -> Expr:
        if self.accept("-"):
            # kept as a negation node: the rounding model may count it
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            tok = self.advance()
            if tok.kind != "num" or parse_number(tok.text).denominator != 1 or parse_number(tok.text) < 0:
                self.error("exponents must be non-negative integer literals", tok)
            k = int(parse_number(tok.text))
            if base.op == "const":
                return const(base.value ** k)
            return base ** k
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = parse_number(tok.text)
            # INT/INT is read as one rational literal, e.g. 100/111
            nxt = self.tok
            after = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else nxt
            if (nxt.kind == "op" and nxt.text == "/" and after.kind == "num"
                    and _is_int_literal(tok.text) and _is_int_literal(after.text)):
                if parse_number(after.text) == 0:
                    self.error("division by zero", after)
                self.i += 2
                value = value / parse_number(after.text)
            return const(value)
        if tok.kind == "ident":
            if tok.text not in self.names:
                self.error(f"unknown identifier {tok.text!r}")
            self.advance()
            return self.names[tok.text]
        if self.accept("("):
            e = self.expression()
            self.expect(")")
            return e
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def format_program(prog: Program) -> str:
    from .core.expr import to_str

    lines = [f"name: {prog.name}"]
    lines.append("vars: " + "; ".join(
        f"{v} in [{_fmt(lo)}, {_fmt(hi)}]" for v, (lo, hi) in zip(prog.var_names, prog.bounds)))
    if prog.constraints:
        lines.append("constraints: " + "; ".join("0 <= " + to_str(g, prog.var_names) for g in prog.constraints))
    lines.append("expr: " + to_str(prog.body, prog.var_names))
    return "\n".join(lines) + "\n"


def _fmt(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"

"""Hash-consed expression DAGs over program variables and error variables.

Nodes are interned: building the same structure twice returns the same
object, so shared subexpressions are detected by identity.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterator, List, Sequence, Tuple

from .interval import Interval
from .polynomial import Polynomial
from .rational import RationalFunction
from .scalar import exact

OPS = ("var", "err", "const", "add", "sub", "mul", "div", "neg", "pow")


class Expr:
    __slots__ = ("op", "args", "value", "_hash", "__weakref__")

    _table: Dict[tuple, "Expr"] = {}

    def __new__(cls, op: str, args: Tuple["Expr", ...] = (), value=None):
        if op not in OPS:
            raise ValueError(f"unknown operator {op!r}")
        key = (op, tuple(id(a) for a in args), value)
        node = cls._table.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.op = op
        node.args = tuple(args)
        node.value = value
        node._hash = hash(key)
        cls._table[key] = node
        return node

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __reduce__(self):
        return (Expr, (self.op, self.args, self.value))

    # -- operator sugar -----------------------------------------------------
    def __add__(self, other) -> "Expr":
        return Expr("add", (self, lift(other)))

    def __radd__(self, other) -> "Expr":
        return Expr("add", (lift(other), self))

    def __sub__(self, other) -> "Expr":
        return Expr("sub", (self, lift(other)))

    def __rsub__(self, other) -> "Expr":
        return Expr("sub", (lift(other), self))

    def __mul__(self, other) -> "Expr":
        return Expr("mul", (self, lift(other)))

    def __rmul__(self, other) -> "Expr":
        return Expr("mul", (lift(other), self))

    def __truediv__(self, other) -> "Expr":
        return Expr("div", (self, lift(other)))

    def __rtruediv__(self, other) -> "Expr":
        return Expr("div", (lift(other), self))

    def __neg__(self) -> "Expr":
        return Expr("neg", (self,))

    def __pow__(self, k: int) -> "Expr":
        return Expr("pow", (self,), int(k))

    def __repr__(self) -> str:
        return to_str(self)


def var(i: int) -> Expr:
    return Expr("var", (), int(i))


def err(j: int) -> Expr:
    return Expr("err", (), int(j))


def const(c) -> Expr:
    return Expr("const", (), exact(c))


def lift(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


def postorder(root: Expr) -> List[Expr]:
    """Distinct nodes, children before parents."""
    seen = set()
    out: List[Expr] = []
    stack: List[Tuple[Expr, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in reversed(node.args):
            if id(a) not in seen:
                stack.append((a, False))
    return out


def evaluate(root: Expr, leaf: Callable[[Expr], object]) -> object:
    """Generic bottom-up evaluation; ``leaf`` maps var/err/const nodes to values."""
    vals: Dict[int, object] = {}
    for node in postorder(root):
        if node.op in ("var", "err", "const"):
            vals[id(node)] = leaf(node)
            continue
        a = [vals[id(x)] for x in node.args]
        if node.op == "add":
            v = a[0] + a[1]
        elif node.op == "sub":
            v = a[0] - a[1]
        elif node.op == "mul":
            if node.args[0] is node.args[1] and isinstance(a[0], Interval):
                v = a[0].square()
            else:
                v = a[0] * a[1]
        elif node.op == "div":
            v = a[0] / a[1]
        elif node.op == "neg":
            v = -a[0]
        else:
            v = a[0] ** node.value
        vals[id(node)] = v
    return vals[id(root)]


def eval_point(root: Expr, x: Sequence, e: Sequence = ()) -> object:
    """Evaluate at a point.  Constants follow the backend of ``x``."""
    as_float = any(isinstance(v, float) for v in list(x) + list(e))

    def leaf(node: Expr):
        if node.op == "var":
            return x[node.value]
        if node.op == "err":
            return e[node.value]
        return float(node.value) if as_float else node.value

    return evaluate(root, leaf)


def interval_eval(root: Expr, box: Sequence[Interval], err_box: Sequence[Interval] = ()) -> Interval:
    """Natural interval extension of the DAG over ``box`` x ``err_box``."""
    as_float = any(iv.is_float for iv in list(box) + list(err_box))

    def leaf(node: Expr) -> Interval:
        if node.op == "var":
            return box[node.value]
        if node.op == "err":
            return err_box[node.value]
        if as_float:
            return Interval.widened(node.value, node.value)
        return Interval.point(node.value)

    return evaluate(root, leaf)


def to_rational_function(root: Expr, nvars: int) -> RationalFunction:
    """Expand an e-free DAG into a single quotient of polynomials."""

    def leaf(node: Expr):
        if node.op == "var":
            return (Polynomial.variable(nvars, node.value), None)
        if node.op == "err":
            raise ValueError("error variables cannot be expanded here")
        return (Polynomial.constant(nvars, node.value), None)

    vals: Dict[int, Tuple[Polynomial, Polynomial | None]] = {}
    for node in postorder(root):
        if node.op in ("var", "err", "const"):
            vals[id(node)] = leaf(node)
            continue
        args = [vals[id(x)] for x in node.args]
        vals[id(node)] = _rf_op(node, args, nvars)
    n, d = vals[id(root)]
    return RationalFunction(n, d if d is not None else Polynomial.constant(nvars, 1))


def _rf_op(node: Expr, args, nvars: int):
    # denominators are None when identically one
    def mul(p, q):
        if p is None:
            return q
        if q is None:
            return p
        return p * q

    if node.op in ("add", "sub"):
        (a, da), (b, db) = args
        if node.op == "sub":
            b = -b
        if da is db or (da is not None and db is not None and da == db):
            return (a + b, da)
        return (mul(a, db) + mul(b, da), mul(da, db))
    if node.op == "mul":
        (a, da), (b, db) = args
        return (a * b, mul(da, db))
    if node.op == "div":
        (a, da), (b, db) = args
        if b.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        return (mul(a, db), mul(da, b))
    if node.op == "neg":
        a, da = args[0]
        return (-a, da)
    a, da = args[0]
    k = node.value
    return (a ** k, None if da is None else da ** k)


def count_ops(root: Expr) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for node in postorder(root):
        counts[node.op] = counts.get(node.op, 0) + 1
    return counts


def variables_used(root: Expr) -> set:
    return {n.value for n in postorder(root) if n.op == "var"}


def errors_used(root: Expr) -> set:
    return {n.value for n in postorder(root) if n.op == "err"}


_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def to_str(root: Expr, names: Sequence[str] | None = None) -> str:
    def rec(node: Expr, parent_prec: int) -> str:
        if node.op == "var":
            return names[node.value] if names else f"x{node.value + 1}"
        if node.op == "err":
            return f"e{node.value + 1}"
        if node.op == "const":
            c = node.value
            s = str(c.numerator) if c.denominator == 1 else f"({c.numerator}/{c.denominator})"
            return f"({s})" if c < 0 else s
        p = _PREC[node.op]
        if node.op == "neg":
            s = "-" + rec(node.args[0], p)
        elif node.op == "pow":
            s = f"{rec(node.args[0], p + 1)}^{node.value}"
        else:
            sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[node.op]
            s = f"{rec(node.args[0], p)} {sym} {rec(node.args[1], p + 1)}"
        return f"({s})" if p < parent_prec else s

    return rec(root, 0)


def walk(root: Expr) -> Iterator[Expr]:
    return iter(postorder(root))

"""JSON serialization and the infix text syntax for expressions.

Text syntax::

    zeta(f1)*res(1, f2) - 0.5*cliff(prime(f1)) + 2j*field([1, 0])
    res(1, f1)**2

Test-function arguments are names bound by the caller, list literals, or
linear combinations of those; ``prime(F)`` applies ``f -> f'`` and
``flow(t, F)`` applies the quasi-free flow.
"""

from __future__ import annotations

import ast
from typing import Any, Mapping, Optional

import numpy as np

from . import algebra as alg
from .algebra import CLIFF, FIELD, RES, ZETA, Atom, Expression
from .space_model import SpaceModel, TestFunction


class ParseError(ValueError):
    """Malformed expression text; ``position`` is a 0-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at column {position})")
        self.position = position


# -- JSON ----------------------------------------------------------------------------


def _atom_to_dict(a: Atom) -> dict[str, Any]:
    d: dict[str, Any] = {"kind": a.kind}
    if a.lam is not None:
        d["lambda"] = a.lam
    d["coeffs"] = list(a.f)
    if a.basis is not None:
        d["basis"] = a.basis
    return d


def _atom_from_dict(d: Mapping[str, Any]) -> Atom:
    kind = d["kind"]
    if kind not in alg.KINDS:
        raise ValueError(f"unknown atom kind {kind!r}")
    lam = d.get("lambda")
    if (kind == RES) != (lam is not None):
        raise ValueError("'lambda' is required for res atoms and only for them")
    return Atom(kind, alg._key(d["coeffs"]), None if lam is None else float(lam), d.get("basis"))


def _terms_to_list(terms: dict) -> list:
    return [
        {"coeff": [c.real, c.imag], "word": [_atom_to_dict(a) for a in w]}
        for w, c in terms.items()
    ]


def _terms_from_list(items) -> list:
    return [(tuple(_atom_from_dict(a) for a in t["word"]), complex(*t["coeff"])) for t in items]


def expression_to_dict(expr: Expression) -> dict[str, Any]:
    out: dict[str, Any] = {
        "terms": _terms_to_list(expr.term_dict),
        "class": alg.classify(expr).value,
    }
    if expr.core is not None:
        out["core"] = _terms_to_list(expr.core)
    return out


def expression_from_dict(model: SpaceModel, data: Mapping[str, Any]) -> Expression:
    core = data.get("core")
    return Expression(
        model,
        _terms_from_list(data["terms"]),
        None if core is None else _terms_from_list(core),
    )


# -- text rendering ------------------------------------------------------------------


def _fmt_num(x: float) -> str:
    return repr(float(x)) if x != int(x) or abs(x) >= 1e15 else str(int(x))


def _render_f(f: tuple, names: Optional[Mapping[str, TestFunction]]) -> str:
    v = np.array(f)
    if names:
        for name, g in names.items():
            if np.array_equal(g.coeffs, v):
                return name
            if np.array_equal(-g.coeffs, v):
                return f"-{name}"
    return "[" + ", ".join(_fmt_num(x) for x in f) + "]"


def _render_atom(a: Atom, names) -> str:
    arg = _render_f(a.f, names)
    if a.kind == RES:
        return f"res({_fmt_num(a.lam)}, {arg})"
    return f"{a.kind}({arg})"


def _render_coeff(c: complex) -> str:
    if c.imag == 0:
        return _fmt_num(c.real)
    if c.real == 0:
        return f"{_fmt_num(c.imag)}j"
    return f"({_fmt_num(c.real)}{'+' if c.imag >= 0 else '-'}{_fmt_num(abs(c.imag))}j)"


def to_text(expr: Expression, names: Optional[Mapping[str, TestFunction]] = None) -> str:
    """Render in the text syntax; unnamed arguments become list literals."""
    source = expr.core if expr.core is not None else expr.term_dict
    if not source:
        return "0"
    parts = []
    for w, c in source.items():
        body = "*".join(_render_atom(a, names) for a in w)
        if not body:
            parts.append(_render_coeff(c))
        elif c == 1:
            parts.append(body)
        elif c == -1:
            parts.append("-" + body)
        else:
            parts.append(f"{_render_coeff(c)}*{body}")
    return " + ".join(parts).replace("+ -", "- ")


# -- parsing -------------------------------------------------------------------------

_ATOMS = {"res", "cliff", "field", "zeta"}


class _Parser:
    def __init__(self, model: SpaceModel, names: Mapping[str, TestFunction]):
        self.model = model
        self.names = dict(names)

    def fail(self, node: ast.AST, msg: str):
        raise ParseError(msg, getattr(node, "col_offset", 0))

    def number(self, node: ast.AST) -> complex:
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) and not isinstance(node.value, bool):
            return node.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.number(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            a, b = self.number(node.left), self.number(node.right)
            op = node.op
            if isinstance(op, ast.Add):
                return a + b
            if isinstance(op, ast.Sub):
                return a - b
            if isinstance(op, ast.Mult):
                return a * b
            return a / b
        self.fail(node, "expected a number")

    def real(self, node: ast.AST) -> float:
        v = self.number(node)
        if isinstance(v, complex):
            self.fail(node, "expected a real number")
        return float(v)

    def is_number(self, node: ast.AST) -> bool:
        try:
            self.number(node)
            return True
        except ParseError:
            return False

    def testfn(self, node: ast.AST) -> TestFunction:
        m = self.model
        if isinstance(node, ast.Name):
            if node.id not in self.names:
                self.fail(node, f"unbound test function {node.id!r}")
            return self.names[node.id]
        if isinstance(node, ast.List):
            vals = [self.real(e) for e in node.elts]
            if len(vals) != m.N:
                self.fail(node, f"test function needs {m.N} coefficients, got {len(vals)}")
            return m.vector(vals)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            f = self.testfn(node.operand)
            return -f if isinstance(node.op, ast.USub) else f
        if isinstance(node, ast.BinOp):
            op = node.op
            if isinstance(op, (ast.Add, ast.Sub)):
                a, b = self.testfn(node.left), self.testfn(node.right)
                return a + b if isinstance(op, ast.Add) else a - b
            if isinstance(op, ast.Mult):
                if self.is_number(node.left):
                    return self.testfn(node.right) * self.real(node.left)
                return self.testfn(node.left) * self.real(node.right)
            if isinstance(op, ast.Div):
                return self.testfn(node.left) / self.real(node.right)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            fn = node.func.id
            if fn == "prime" and len(node.args) == 1:
                return self.testfn(node.args[0]).prime()
            if fn == "flow" and len(node.args) == 2:
                return self.testfn(node.args[1]).flow(self.real(node.args[0]))
        self.fail(node, "expected a test function")

    def expr(self, node: ast.AST) -> Expression:
        m = self.model
        if isinstance(node, ast.Constant) or (isinstance(node, ast.UnaryOp) and self.is_number(node)):
            return alg.scalar(m, self.number(node))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            e = self.expr(node.operand)
            return -e if isinstance(node.op, ast.USub) else e
        if isinstance(node, ast.BinOp):
            op = node.op
            if isinstance(op, ast.Pow):
                n = self.number(node.right)
                if not isinstance(n, int) or n < 0:
                    self.fail(node.right, "exponent must be a non-negative integer")
                return self.expr(node.left) ** n
            if isinstance(op, ast.Div):
                return self.expr(node.left).scale(1.0 / self.number(node.right))
            a, b = self.expr(node.left), self.expr(node.right)
            if isinstance(op, ast.Add):
                return a + b
            if isinstance(op, ast.Sub):
                return a - b
            if isinstance(op, ast.Mult):
                return a * b
            self.fail(node, "unsupported operator")
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            fn = node.func.id
            if fn not in _ATOMS:
                self.fail(node, f"unknown constructor {fn!r}")
            if node.keywords:
                self.fail(node, "keyword arguments are not supported")
            if fn == "res":
                if len(node.args) != 2:
                    self.fail(node, "res takes (lambda, f)")
                lam = self.real(node.args[0])
                if lam == 0:
                    self.fail(node.args[0], "res needs lambda != 0")
                return alg.res(lam, self.testfn(node.args[1]))
            if len(node.args) != 1:
                self.fail(node, f"{fn} takes one test function")
            return getattr(alg, fn)(self.testfn(node.args[0]))
        self.fail(node, "expected an expression")


def parse_expression(
    text: str, model: SpaceModel, names: Optional[Mapping[str, TestFunction]] = None
) -> Expression:
    """Parse ``text`` into an :class:`Expression` over ``model``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"syntax error: {exc.msg}", max(0, (exc.offset or 1) - 1)) from None
    return _Parser(model, names or {}).expr(tree.body)

"""Graded *-algebra of Clifford elements, boson fields and resolvents.

An :class:`Expression` is a finite sum of complex-weighted words in the atoms
``c(f)`` (odd), ``j(f)`` and ``R(lam, f)`` (even). Expressions that were
built only from ``zeta(f) = c(f) R(1, f)`` and resolvents additionally carry
a *core form*: the same element written as words in those generators. The
core form is what the core superderivation acts on; it is kept alongside the
atom expansion and is never inferred from it.

Boson sub-words are not brought to a canonical form; equality of mixed
expressions is decided numerically on a Fock representation.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Optional

import numpy as np

from .space_model import SpaceModel, TestFunction, flow as _flow

CLIFF = "cliff"
FIELD = "field"
RES = "res"
ZETA = "zeta"  # appears only in core words
KINDS = (CLIFF, FIELD, RES, ZETA)


class DomainError(ValueError):
    """An operation was applied outside its algebraic domain."""


def _key(coeffs) -> tuple[float, ...]:
    # + 0.0 folds -0.0 into 0.0 so equal words hash equally
    return tuple(float(x) + 0.0 for x in np.asarray(coeffs, dtype=float).ravel())


@dataclass(frozen=True)
class Atom:
    kind: str
    f: tuple[float, ...]
    lam: Optional[float] = None
    basis: Optional[int] = None

    @property
    def odd(self) -> bool:
        return self.kind in (CLIFF, ZETA)

    def vec(self) -> np.ndarray:
        return np.array(self.f)

    def with_f(self, f) -> "Atom":
        return Atom(self.kind, _key(f), self.lam, None)


Word = tuple  # tuple[Atom, ...]


def _collect(pairs) -> dict:
    out: dict = defaultdict(complex)
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    for word, c in items:
        out[tuple(word)] += complex(c)
    return {w: c for w, c in out.items() if c != 0}


def _mul_dicts(a: dict, b: dict) -> dict:
    out: dict = defaultdict(complex)
    for wa, ca in a.items():
        for wb, cb in b.items():
            out[wa + wb] += ca * cb
    return {w: c for w, c in out.items() if c != 0}


def expand_core_word(word: Word) -> Word:
    out = []
    for a in word:
        if a.kind == ZETA:
            out.append(Atom(CLIFF, a.f))
            out.append(Atom(RES, a.f, 1.0))
        else:
            out.append(a)
    return tuple(out)


class Classification(str, Enum):
    R0 = "R0"
    CLIFF0 = "Cliff0"
    F0 = "F0"
    CORE_A = "CoreA"
    E_ONLY = "EOnly"


class Expression:
    """Immutable formal sum of words; see the module docstring."""

    __slots__ = ("model", "_terms", "_core")

    def __init__(self, model: SpaceModel, terms=(), core=None):
        self.model = model
        self._terms = _collect(terms)
        self._core = None if core is None else _collect(core)

    @classmethod
    def from_core(cls, model: SpaceModel, core) -> "Expression":
        core = _collect(core)
        terms: dict = defaultdict(complex)
        for w, c in core.items():
            terms[expand_core_word(w)] += c
        return cls(model, terms, core)

    # -- views ----------------------------------------------------------------

    @property
    def terms(self) -> tuple:
        """``((coef, word), ...)`` in insertion order."""
        return tuple((c, w) for w, c in self._terms.items())

    @property
    def term_dict(self) -> dict:
        return dict(self._terms)

    @property
    def core(self) -> Optional[dict]:
        return None if self._core is None else dict(self._core)

    def atoms(self) -> Iterable[Atom]:
        for w in self._terms:
            yield from w

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def parities(self) -> set[int]:
        return {sum(a.odd for a in w) % 2 for w in self._terms}

    def is_homogeneous(self) -> bool:
        return len(self.parities()) <= 1

    def same_structure(self, other: "Expression") -> bool:
        return self.model is other.model and self._terms == other._terms and self._core == other._core

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "Expression":
        if isinstance(other, Expression):
            if other.model is not self.model:
                raise DomainError("expressions live over different models")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return scalar(self.model, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = list(self._terms.items()) + list(other._terms.items())
        core = None
        if self._core is not None and other._core is not None:
            core = list(self._core.items()) + list(other._core.items())
        return Expression(self.model, terms, core)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, s) -> "Expression":
        s = complex(s)
        terms = {w: c * s for w, c in self._terms.items()}
        core = None if self._core is None else {w: c * s for w, c in self._core.items()}
        return Expression(self.model, terms, core)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = _mul_dicts(self._terms, other._terms)
        core = None
        if self._core is not None and other._core is not None:
            core = _mul_dicts(self._core, other._core)
        return Expression(self.model, terms, core)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers")
        out = unit(self.model)
        for _ in range(int(n)):
            out = out * self
        return out

    def __repr__(self) -> str:
        from .textio import to_text

        return f"Expression({to_text(self)})"


# -- constructors -------------------------------------------------------------------


def _tf(f) -> TestFunction:
    if not isinstance(f, TestFunction):
        raise TypeError("atoms take a TestFunction argument (use model.vector(...))")
    return f


def scalar(model: SpaceModel, c=1.0) -> Expression:
    return Expression(model, {(): c}, {(): c})


def unit(model: SpaceModel) -> Expression:
    return scalar(model, 1.0)


def res(lam: float, f: TestFunction) -> Expression:
    """``R(lam, f)``; ``lam = 0`` is rejected."""
    f = _tf(f)
    if lam == 0:
        raise DomainError("R(lambda, f) needs lambda != 0")
    a = Atom(RES, _key(f.coeffs), float(lam))
    return Expression(f.model, {(a,): 1.0}, {(a,): 1.0})


def cliff(f: TestFunction) -> Expression:
    f = _tf(f)
    return Expression(f.model, {(Atom(CLIFF, _key(f.coeffs)),): 1.0})


def field(f: TestFunction) -> Expression:
    f = _tf(f)
    return Expression(f.model, {(Atom(FIELD, _key(f.coeffs)),): 1.0})


def zeta(f: TestFunction) -> Expression:
    """Mollified fermion field ``zeta(f) = c(f) R(1, f)``."""
    f = _tf(f)
    return Expression.from_core(f.model, {(Atom(ZETA, _key(f.coeffs)),): 1.0})


def basis_cliff_atom(model: SpaceModel, i: int) -> Atom:
    return Atom(CLIFF, _key(model.clifford_basis[:, i]), None, i)


# -- involution and grading -----------------------------------------------------------


def _adjoint_atom(a: Atom) -> Atom:
    if a.kind == RES:
        return Atom(RES, a.f, -a.lam)
    if a.kind == ZETA:
        return Atom(ZETA, _key(-a.vec()))
    return a


def adjoint(expr: Expression) -> Expression:
    """Reverse words, conjugate coefficients, ``R(lam,f) -> R(-lam,f)``."""

    def conj(d):
        return {tuple(_adjoint_atom(a) for a in reversed(w)): c.conjugate() for w, c in d.items()}

    core = None if expr._core is None else conj(expr._core)
    return Expression(expr.model, conj(expr._terms), core)


def grade(expr: Expression) -> Expression:
    """Grading automorphism: each term times ``(-1)^(number of odd atoms)``."""

    def g(d):
        return {w: (-c if sum(a.odd for a in w) % 2 else c) for w, c in d.items()}

    core = None if expr._core is None else g(expr._core)
    return Expression(expr.model, g(expr._terms), core)


def translate(expr: Expression, t: float) -> Expression:
    """Quasi-free automorphism: every atom argument ``f`` becomes ``T_t f``."""
    if t == 0:
        return expr
    T = expr.model.flow_matrix(t)
    memo: dict = {}

    def move(a: Atom) -> Atom:
        if a not in memo:
            memo[a] = a.with_f(T @ a.vec())
        return memo[a]

    def tr(d):
        return {tuple(move(a) for a in w): c for w, c in d.items()}

    core = None if expr._core is None else tr(expr._core)
    return Expression(expr.model, tr(expr._terms), core)


# -- classification -------------------------------------------------------------------


def core_form(expr: Expression) -> Optional[dict]:
    """Core words of ``expr``: its provenance, or the word itself for pure-resolvent terms."""
    if expr._core is not None:
        return dict(expr._core)
    if all(a.kind == RES for a in expr.atoms()):
        return dict(expr._terms)
    return None


def classify(expr: Expression) -> Classification:
    """Finest class by atom census; ``CoreA`` only through provenance."""
    kinds = {a.kind for a in expr.atoms()}
    if FIELD in kinds:
        return Classification.E_ONLY
    if kinds <= {RES}:
        return Classification.R0
    if kinds == {CLIFF}:
        return Classification.CLIFF0
    if expr._core is not None:
        return Classification.CORE_A
    return Classification.F0


_CONTAINS = {
    Classification.R0: {Classification.R0},
    Classification.CLIFF0: {Classification.CLIFF0},
    Classification.CORE_A: {Classification.R0, Classification.CORE_A},
    Classification.F0: {Classification.R0, Classification.CLIFF0, Classification.CORE_A, Classification.F0},
    Classification.E_ONLY: set(Classification),
}


def is_member(expr: Expression, cls: Classification | str) -> bool:
    """Membership in a subalgebra, using ``R0, Cliff0 in F0``, ``R0 in CoreA in F0 in E``."""
    cls = Classification(cls)
    own = classify(expr)
    if cls == Classification.CLIFF0 and own == Classification.R0:
        return all(len(w) == 0 for w in expr._terms)
    return own in _CONTAINS[cls]


# -- normal form ----------------------------------------------------------------------


def _cliff_mul(mono: tuple, i: int) -> tuple[float, tuple]:
    """Right-multiply a sorted Clifford monomial by ``c(b_i)``."""
    passes = sum(1 for k in mono if k > i)
    sign = -1.0 if passes % 2 else 1.0
    if i in mono:
        return 0.5 * sign, tuple(k for k in mono if k != i)
    return sign, tuple(sorted(mono + (i,)))


def _resolvent_rewrites(word: Word) -> Optional[list]:
    for k in range(len(word) - 1):
        a, b = word[k], word[k + 1]
        pre, post = word[:k], word[k + 2 :]
        if a.kind == RES and b.kind == RES and a.f == b.f and a.lam != b.lam:
            s = 1.0 / (1j * (b.lam - a.lam))
            return [(pre + (a,) + post, s), (pre + (b,) + post, -s)]
        if a.kind == FIELD and b.kind == RES and a.f == b.f:
            return [(pre + (b,) + post, 1j * b.lam), (pre + post, -1.0)]
        if a.kind == RES and b.kind == FIELD and a.f == b.f:
            return [(pre + (a,) + post, 1j * a.lam), (pre + post, -1.0)]
    return None


@lru_cache(maxsize=65536)
def _reduce_boson(word: Word) -> tuple:
    step = _resolvent_rewrites(word)
    if step is None:
        return ((word, 1.0 + 0j),)
    out: dict = defaultdict(complex)
    for w, c in step:
        for w2, c2 in _reduce_boson(w):
            out[w2] += c * c2
    return tuple(out.items())


def _normal_word(model: SpaceModel, word: Word, resolvent_rules: bool) -> list:
    coeff = 1.0 + 0j
    monos: dict = {(): 1.0}
    boson: list[Atom] = []
    U = model.clifford_coords_matrix
    for a in word:
        if a.kind == RES:
            if not any(a.f):
                coeff *= -1j / a.lam
                continue
            if a.lam < 0:
                coeff = -coeff
                a = Atom(RES, _key(-a.vec()), -a.lam)
            boson.append(a)
        elif a.kind == FIELD:
            if not any(a.f):
                return []
            boson.append(a)
        elif a.kind == CLIFF:
            if a.basis is not None:
                parts = [(1.0, a.basis)]
            else:
                u = U @ a.vec()
                parts = [(float(u[i]), i) for i in range(model.N) if u[i] != 0]
            new: dict = defaultdict(float)
            for mono, c in monos.items():
                for ui, i in parts:
                    s, m = _cliff_mul(mono, i)
                    new[m] += c * ui * s
            monos = {m: c for m, c in new.items() if c != 0}
            if not monos:
                return []
        else:
            raise DomainError(f"atom kind {a.kind!r} cannot appear in an expression word")
    bwords = _reduce_boson(tuple(boson)) if resolvent_rules else ((tuple(boson), 1.0),)
    out = []
    for mono, cm in monos.items():
        prefix = tuple(basis_cliff_atom(model, i) for i in mono)
        for bw, cb in bwords:
            out.append((prefix + bw, coeff * cm * cb))
    return out


def simplify(expr: Expression, resolvent_rules: bool = False, rtol: float = 1e-14) -> Expression:
    """Normal form of every term.

    Clifford atoms are expanded in the tau-orthonormal basis, moved to the
    left (they commute with bosons) and sorted with anticommutation signs and
    ``c(b_i)^2 = 1/2``. ``R(lam, 0)`` becomes ``-(i/lam) 1`` and resolvents
    are rewritten to ``lam > 0`` via ``R(lam, f) = -R(-lam, -f)``.

    With ``resolvent_rules`` adjacent same-argument pairs are also reduced:
    ``R(lam,f) R(mu,f) -> (R(lam,f) - R(mu,f)) / (i(mu - lam))`` and
    ``j(f) R(lam,f) -> i lam R(lam,f) - 1``.
    """
    out: dict = defaultdict(complex)
    for w, c in expr._terms.items():
        for w2, c2 in _normal_word(expr.model, w, resolvent_rules):
            out[w2] += c * c2
    if out:
        cut = rtol * max(1.0, max(abs(c) for c in out.values()))
        out = {w: c for w, c in out.items() if abs(c) > cut}
    return Expression(expr.model, out, expr._core)


def structurally_zero(expr: Expression, **kw) -> bool:
    return simplify(expr, **kw).is_zero()

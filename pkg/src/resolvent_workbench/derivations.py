"""Superderivations, the time derivation, mollifiers and approximation nets.

Rules on atoms (``f' = -S f``)::

    dbar_s c(f) = j(f)          dbar_h c(f) = i c(f')
    dbar_s j(f) = i c(f')       dbar_h j(f) = i j(f')
    dbar_s R    = i R c(f') R   dbar_h R    = i R j(f') R

``dbar_s R`` is kept in the symmetric form ``i R c(f') R``. It equals
``i c(f') R^2`` because Clifford elements commute with bosons, and with this
form ``dbar_s^2 = dbar_h`` holds word by word in the free algebra.

The core superderivation acts on core words in ``zeta`` and ``R``::

    d_s zeta(f) = i R(1,f) - 1 - i c(f) c(f') R(1,f)^2
    d_s R(lam,f) = i c(f') R(lam,f)^2
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable

import numpy as np

from .algebra import (
    CLIFF,
    FIELD,
    RES,
    ZETA,
    Atom,
    DomainError,
    Expression,
    _key,
    adjoint,
    core_form,
    expand_core_word,
    grade,
    res,
    simplify,
    unit,
)
from .space_model import SpaceModel, TestFunction

Rule = Callable[[Atom], list]


def _leibniz(model: SpaceModel, terms: dict, rule: Rule, graded: bool) -> dict:
    out: dict = defaultdict(complex)
    for word, c in terms.items():
        sign = 1.0
        for k, atom in enumerate(word):
            for mid, cm in rule(atom):
                out[word[:k] + mid + word[k + 1 :]] += sign * c * cm
            if graded and atom.odd:
                sign = -sign
    return {w: c for w, c in out.items() if c != 0}


def _primed(model: SpaceModel, a: Atom) -> tuple:
    return _key(model.prime_matrix @ a.vec())


def superderivation_bar(expr: Expression) -> Expression:
    """Graded-Leibniz superderivation on the extended algebra."""
    model = expr.model

    def rule(a: Atom):
        if a.kind == CLIFF:
            return [((Atom(FIELD, a.f),), 1.0)]
        if a.kind == FIELD:
            return [((Atom(CLIFF, _primed(model, a)),), 1j)]
        if a.kind == RES:
            r = Atom(RES, a.f, a.lam)
            return [((r, Atom(CLIFF, _primed(model, a)), r), 1j)]
        raise DomainError(f"unexpected atom {a.kind}")

    return Expression(model, _leibniz(model, expr.term_dict, rule, graded=True))


def derivation_bar(expr: Expression) -> Expression:
    """Ordinary-Leibniz derivation generating the shift dynamics."""
    model = expr.model

    def rule(a: Atom):
        if a.kind == CLIFF:
            return [((Atom(CLIFF, _primed(model, a)),), 1j)]
        if a.kind == FIELD:
            return [((Atom(FIELD, _primed(model, a)),), 1j)]
        if a.kind == RES:
            r = Atom(RES, a.f, a.lam)
            return [((r, Atom(FIELD, _primed(model, a)), r), 1j)]
        raise DomainError(f"unexpected atom {a.kind}")

    return Expression(model, _leibniz(model, expr.term_dict, rule, graded=False))


def _require_core(A: Expression) -> dict:
    core = core_form(A)
    if core is None:
        raise DomainError("expression is not in the core algebra (build it from zeta and res)")
    return core


def superderivation_core(A: Expression) -> Expression:
    """Core superderivation on ``*-alg{zeta(f), R(lam,f)}``; result lies in ``F0``."""
    model = A.model
    core = _require_core(A)

    def rule(a: Atom):
        fp = _primed(model, a)
        if a.kind == ZETA:
            r1 = Atom(RES, a.f, 1.0)
            return [
                ((r1,), 1j),
                ((), -1.0),
                ((Atom(CLIFF, a.f), Atom(CLIFF, fp), r1, r1), -1j),
            ]
        if a.kind == RES:
            r = Atom(RES, a.f, a.lam)
            return [((Atom(CLIFF, fp), r, r), 1j)]
        raise DomainError(f"unexpected core generator {a.kind}")

    raw = _leibniz(model, core, rule, graded=True)
    return Expression(model, [(expand_core_word(w), c) for w, c in raw.items()])


def conjugate_superderivation(A: Expression) -> Expression:
    """``d_s*(A) = -(d_s(gamma(A*)))*``, defined on the core algebra."""
    _require_core(A)
    return -adjoint(superderivation_core(grade(adjoint(A))))


# -- mollifiers -----------------------------------------------------------------------


def clifford_support(expr: Expression) -> list[int]:
    """Sorted basis indices of Clifford atoms in the normal form."""
    idx = {a.basis for w in simplify(expr).term_dict for a in w if a.kind == CLIFF}
    return sorted(idx)


def _basis_fn(model: SpaceModel, i: int) -> TestFunction:
    return TestFunction(model, model.clifford_basis[:, i])


def mollifier(A: Expression, lam: float) -> Expression:
    """``M = prod_{g in G} i lam R(lam, g)`` over the Clifford support ``G`` of ``dbar_s(A)``.

    ``G`` is ordered by basis index; each factor has norm one.
    """
    if lam <= 0:
        raise DomainError("mollifier needs lambda > 0")
    _require_core(A)
    model = A.model
    M = unit(model)
    for i in clifford_support(superderivation_bar(A)):
        M = M * res(lam, _basis_fn(model, i)).scale(1j * lam)
    return M


def mollifier_derivative_bound(A: Expression, lam: float) -> float:
    """Norm bound ``sum_g ||c(g')|| / lam`` for ``d_s(M)``."""
    model = A.model
    total = 0.0
    for i in clifford_support(superderivation_bar(A)):
        gp = model.prime_matrix @ model.clifford_basis[:, i]
        total += np.sqrt(gp @ model.tau_matrix @ gp / 2.0)
    return total / lam


def to_core(expr: Expression, atol: float = 1e-12) -> Expression:
    """Rewrite an ``F0`` expression into core words, pairing Clifford factors with resolvents.

    Each basis Clifford atom ``c(b_i)`` in a normal-form term is matched with a
    distinct resolvent ``R(mu, s b_i)`` of the same term and the pair becomes
    ``zeta(s b_i / mu) / s``. Raises :class:`DomainError` when some Clifford
    atom has no partner.
    """
    model = expr.model
    B = model.clifford_basis
    core: dict = defaultdict(complex)
    for word, c in simplify(expr).term_dict.items():
        cl = [a for a in word if a.kind == CLIFF]
        bos = [a for a in word if a.kind != CLIFF]
        if any(a.kind != RES for a in bos):
            raise DomainError("field atoms have no core form")
        used: dict[int, tuple] = {}
        positions = []
        coef = c
        for a in cl:
            b = B[:, a.basis]
            hit = None
            for p, r in enumerate(bos):
                if p in used:
                    continue
                h = r.vec()
                s = float(h @ model.tau_matrix @ b)
                if s != 0 and np.abs(h - s * b).max() <= atol * max(1.0, np.abs(h).max()):
                    hit = (p, s)
                    break
            if hit is None:
                raise DomainError(f"Clifford factor {a.basis} has no resolvent partner")
            p, s = hit
            r = bos[p]
            used[p] = (ZETA, s)
            positions.append(p)
            coef /= s
        inversions = sum(1 for x in range(len(positions)) for y in range(x + 1, len(positions)) if positions[x] > positions[y])
        if inversions % 2:
            coef = -coef
        out = []
        for p, r in enumerate(bos):
            if p in used:
                out.append(Atom(ZETA, _key(r.vec() / r.lam)))
            else:
                out.append(r)
        core[tuple(out)] += coef
    return Expression.from_core(model, core)


def mollified_square(A: Expression, lam: float) -> Expression:
    """``d_s(M d_s(A)) - d_s(M) d_s(A)`` with ``M = mollifier(A, lam)``."""
    M = mollifier(A, lam)
    dA = superderivation_core(A)
    MdA = to_core(M * dA)
    return superderivation_core(MdA) - superderivation_core(M) * dA


# -- approximation nets --------------------------------------------------------------


def density_net(B: Expression, lam: float) -> Expression:
    """Replace every ``c(f)`` in ``B`` by ``i lam zeta(f / lam)``; the result is core."""
    if any(a.kind == FIELD for a in B.atoms()):
        raise DomainError("density net is defined on F0 only")
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    core: dict = defaultdict(complex)
    for word, c in B.term_dict.items():
        out = []
        coef = c
        for a in word:
            if a.kind == CLIFF:
                out.append(Atom(ZETA, _key(a.vec() / lam)))
                coef *= 1j * lam
            else:
                out.append(a)
        core[tuple(out)] += coef
    return Expression.from_core(B.model, core)


def density_factor_bounds(B: Expression) -> list[float]:
    """``sqrt(tau(f,f)/2)`` for every Clifford factor of every word of ``B``."""
    T = B.model.tau_matrix
    return [float(np.sqrt(a.vec() @ T @ a.vec() / 2.0)) for w in B.term_dict for a in w if a.kind == CLIFF]

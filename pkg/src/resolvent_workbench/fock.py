"""Truncated fermion x boson Fock representation.

The Hilbert space is ``C^(2^n) (x) C^(d^n)`` with ``n = N/2``. Fermion
operators are Jordan-Wigner Majoranas scaled so that
``{c(b_i), c(b_k)} = delta_ik`` for the tau-orthonormal basis ``b``. Boson
fields are ``j(f) = sum_k alpha_k q_k + beta_k p_k`` with ``(alpha, beta)``
the Darboux coordinates of ``f`` and ``q, p`` truncated quadratures.

Vectors are stored flat; internally they are viewed as ``(2^n, d^n)``
arrays so fermion factors act on the left and boson factors on the right.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np
import scipy.linalg as sla

from .algebra import CLIFF, FIELD, RES, ZETA, Atom, Expression, _key, cliff, res
from .space_model import DarbouxFrame, SpaceModel, TestFunction, darboux_basis


class BudgetError(ValueError):
    """Total Hilbert dimension exceeds the configured budget."""


@dataclass(frozen=True)
class RepConfig:
    """Truncation parameters.

    Parameters
    ----------
    boson_cutoff : int
        Levels ``0 .. d-1`` per boson mode, ``d >= 4``.
    safe_margin : int
        Occupations above ``d - safe_margin`` are removed by :meth:`Rep.safe_project`.
    solver_tolerance : float
        Max-norm bound on ``(i lam - j) R - I`` for each resolvent solve.
    dimension_budget : int
        Largest admissible total dimension.
    sigma_tolerance : float
        Calibrated tolerance for sigma-dependent identities on safe vectors.
    """

    boson_cutoff: int = 16
    safe_margin: int = 4
    solver_tolerance: float = 1e-10
    dimension_budget: int = 50_000
    sigma_tolerance: float = 1e-6

    def __post_init__(self):
        d, m = self.boson_cutoff, self.safe_margin
        if d < 4:
            raise ValueError(f"boson_cutoff must be >= 4, got {d}")
        if not 0 < m < d / 2:
            raise ValueError(f"safe_margin must satisfy 0 < m < d/2, got m={m}, d={d}")
        if self.solver_tolerance <= 0 or self.sigma_tolerance <= 0:
            raise ValueError("tolerances must be positive")


def ladder(d: int) -> np.ndarray:
    """Truncated annihilation operator on levels ``0 .. d-1``."""
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def quadratures(d: int) -> tuple[np.ndarray, np.ndarray]:
    a = ladder(d)
    ad = a.conj().T
    return (a + ad) / np.sqrt(2), 1j * (ad - a) / np.sqrt(2)


def majoranas(n_modes: int) -> list[np.ndarray]:
    """``2 n`` Jordan-Wigner Majoranas with ``{g_i, g_k} = delta_ik``."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1.0, -1.0]).astype(complex)
    I2 = np.eye(2, dtype=complex)
    out = []
    for k in range(n_modes):
        for P in (X, Y):
            factors = [Z] * k + [P] + [I2] * (n_modes - k - 1)
            m = np.ones((1, 1), dtype=complex)
            for F in factors:
                m = np.kron(m, F)
            out.append(m / np.sqrt(2))
    return out


def _embed_mode(op: np.ndarray, k: int, n: int, d: int) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for i in range(n):
        m = np.kron(m, op if i == k else np.eye(d, dtype=complex))
    return m


class Rep:
    """Regular representation on a truncated Fock space; see the module docstring."""

    def __init__(self, model: SpaceModel, config: Optional[RepConfig] = None):
        self.model = model
        self.config = config or RepConfig()
        d = self.config.boson_cutoff
        n = model.N // 2
        self.n_modes = n
        self.d = d
        self.dim_fermion = 2**n
        self.dim_boson = d**n
        self.dim = self.dim_fermion * self.dim_boson
        if self.dim > self.config.dimension_budget:
            raise BudgetError(
                f"total dimension {self.dim_fermion}*{d}^{n} = {self.dim} exceeds budget {self.config.dimension_budget}"
            )
        self.frame: DarbouxFrame = darboux_basis(model)
        q, p = quadratures(d)
        self._q = [_embed_mode(q, k, n, d) for k in range(n)]
        self._p = [_embed_mode(p, k, n, d) for k in range(n)]
        self._gammas = majoranas(n)
        self._cache: dict = {}

    # -- atom matrices (fermion or boson factor only) ---------------------------------

    def fermion_cliff(self, f) -> np.ndarray:
        u = self.model.clifford_coords_matrix @ np.asarray(f, dtype=float)
        return sum(ui * g for ui, g in zip(u, self._gammas))

    def boson_field(self, f) -> np.ndarray:
        key = ("j", _key(f))
        if key not in self._cache:
            c = self.frame.coords(np.asarray(f, dtype=float))
            J = np.zeros((self.dim_boson, self.dim_boson), dtype=complex)
            for k in range(self.n_modes):
                J += c[2 * k] * self._q[k] + c[2 * k + 1] * self._p[k]
            self._cache[key] = J
        return self._cache[key]

    def boson_resolvent(self, lam: float, f) -> np.ndarray:
        if lam == 0:
            raise ValueError("resolvent needs lambda != 0")
        key = ("R", float(lam), _key(f))
        if key not in self._cache:
            A = 1j * lam * np.eye(self.dim_boson) - self.boson_field(f)
            lu = sla.lu_factor(A)
            R = sla.lu_solve(lu, np.eye(self.dim_boson, dtype=complex))
            resid = np.abs(A @ R - np.eye(self.dim_boson)).max()
            if resid > self.config.solver_tolerance:
                raise ArithmeticError(f"resolvent solve residual {resid:.2e} above tolerance")
            self._cache[key] = R
        return self._cache[key]

    def _atom_factor(self, a: Atom) -> tuple[str, np.ndarray]:
        if a.kind == CLIFF:
            key = ("c", a.f)
            if key not in self._cache:
                self._cache[key] = self.fermion_cliff(a.f)
            return "F", self._cache[key]
        if a.kind == FIELD:
            return "B", self.boson_field(a.f)
        if a.kind == RES:
            return "B", self.boson_resolvent(a.lam, a.f)
        raise ValueError(f"atom kind {a.kind} has no direct matrix")

    def _expand(self, word) -> list[Atom]:
        out = []
        for a in word:
            if a.kind == ZETA:
                out += [Atom(CLIFF, a.f), Atom(RES, a.f, 1.0)]
            else:
                out.append(a)
        return out

    def full(self, fermion: Optional[np.ndarray] = None, boson: Optional[np.ndarray] = None) -> np.ndarray:
        F = np.eye(self.dim_fermion, dtype=complex) if fermion is None else fermion
        B = np.eye(self.dim_boson, dtype=complex) if boson is None else boson
        return np.kron(F, B)

    # -- public operator constructors --------------------------------------------------

    def op_cliff(self, f) -> np.ndarray:
        return self.full(fermion=self.fermion_cliff(_arr(f)))

    def op_field(self, f) -> np.ndarray:
        return self.full(boson=self.boson_field(_arr(f)))

    def op_resolvent(self, lam: float, f) -> np.ndarray:
        return self.full(boson=self.boson_resolvent(lam, _arr(f)))

    def evaluate_word(self, word) -> np.ndarray:
        F = np.eye(self.dim_fermion, dtype=complex)
        B = np.eye(self.dim_boson, dtype=complex)
        for a in self._expand(word):
            side, M = self._atom_factor(a)
            if side == "F":
                F = F @ M
            else:
                B = B @ M
        return np.kron(F, B)

    def evaluate(self, expr: Expression) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, w in expr.terms:
            out += c * self.evaluate_word(w)
        return out

    def strong_apply(self, expr: Expression, v: np.ndarray) -> np.ndarray:
        """``evaluate(expr) @ v`` by right-to-left factor application with suffix reuse."""
        V = np.asarray(v, dtype=complex).reshape(self.dim_fermion, self.dim_boson)
        memo: dict = {(): V}

        def apply(word: tuple) -> np.ndarray:
            if word in memo:
                return memo[word]
            side, M = self._atom_factor(word[0])
            W = apply(word[1:])
            out = M @ W if side == "F" else W @ M.T
            memo[word] = out
            return out

        total = np.zeros_like(V)
        for c, w in expr.terms:
            total = total + c * apply(tuple(self._expand(w)))
        return total.reshape(-1)

    # -- vectors -----------------------------------------------------------------------

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    @cached_property
    def occupations(self) -> np.ndarray:
        """Per-mode occupation numbers of every boson index, shape ``(d^n, n)``."""
        return np.array(list(itertools.product(range(self.d), repeat=self.n_modes)), dtype=int).reshape(
            self.dim_boson, self.n_modes
        )

    def safe_mask(self, margin: Optional[int] = None) -> np.ndarray:
        m = self.config.safe_margin if margin is None else margin
        if not 0 <= m < self.d:
            raise ValueError(f"margin {m} out of range for cutoff {self.d}")
        keep = (self.occupations <= self.d - m).all(axis=1)
        return np.tile(keep, self.dim_fermion)

    def safe_project(self, v: np.ndarray, margin: Optional[int] = None) -> np.ndarray:
        """Zero all amplitudes with some mode occupation above ``d - margin``."""
        return np.where(self.safe_mask(margin), v, 0)

    def embed(self, v: np.ndarray, target: "Rep") -> np.ndarray:
        """Embed a vector into a representation with larger cutoff and the same model."""
        if target.model is not self.model or target.d < self.d:
            raise ValueError("embedding needs the same model and a cutoff at least as large")
        out = np.zeros((self.dim_fermion,) + (target.d,) * self.n_modes, dtype=complex)
        V = np.asarray(v).reshape((self.dim_fermion,) + (self.d,) * self.n_modes)
        out[(slice(None),) + (slice(0, self.d),) * self.n_modes] = V
        return out.reshape(-1)

    def test_vectors(
        self,
        count: int,
        rng: np.random.Generator,
        max_len: int = 3,
        scale: float = 0.5,
        lams: Iterable[float] = (4.0,),
    ) -> list[np.ndarray]:
        """Vacuum plus ``count - 1`` vectors ``pi(W) Omega`` for random F0 words ``W``.

        Words of length ``<= max_len`` are drawn from ``c(f)`` and ``R(lam, f)``
        with ``|f| <= scale``; results are safe-projected and normalized.
        """
        lams = tuple(lams)
        out = [self.vacuum()]
        omega = self.vacuum()
        while len(out) < count:
            length = int(rng.integers(1, max_len + 1))
            e = None
            for _ in range(length):
                f = rng.normal(size=self.model.N)
                f *= scale * rng.uniform(0.2, 1.0) / np.linalg.norm(f)
                tf = TestFunction(self.model, f)
                a = cliff(tf) if rng.random() < 0.4 else res(float(rng.choice(lams)), tf)
                e = a if e is None else e * a
            v = self.safe_project(self.strong_apply(e, omega))
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                out.append(v / nv)
        return out

    def random_vectors(self, count: int, rng: np.random.Generator) -> list[np.ndarray]:
        """Whole-space random unit vectors (no energy restriction)."""
        out = []
        for _ in range(count):
            v = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
            out.append(v / np.linalg.norm(v))
        return out

    # -- state and norms ---------------------------------------------------------------

    def state_expectation(self, expr: Expression, xi: Optional[np.ndarray] = None) -> complex:
        """``<xi, pi(expr) xi>``; ``xi`` defaults to the Fock vacuum."""
        xi = self.vacuum() if xi is None else xi
        return complex(np.vdot(xi, self.strong_apply(expr, xi)))

    def summary(self, op: np.ndarray) -> dict:
        return {
            "dimension": int(op.shape[0]),
            "norm": operator_norm(op),
            "hermiticity_residual": float(np.abs(op - op.conj().T).max()),
        }


def _arr(f) -> np.ndarray:
    return f.coeffs if isinstance(f, TestFunction) else np.asarray(f, dtype=float)


def build_rep(model: SpaceModel, config: Optional[RepConfig] = None) -> Rep:
    return Rep(model, config)


def operator_norm(op: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(op, 2))


def save_operators(path, **ops: np.ndarray) -> None:
    """Write operators or vectors to an ``.npz`` container."""
    np.savez_compressed(path, **ops)

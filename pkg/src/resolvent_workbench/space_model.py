"""Finite-dimensional test-function spaces with a symplectic form and a flow.

A :class:`SpaceModel` is fixed by a real scalar product ``tau`` and a
``tau``-antisymmetric generator ``S``. The symplectic form is derived from
them as ``sigma(f, g) = tau(f, -S g)``, the derivative map is
``f' = -S f`` and the flow is ``T_t = exp(t S)``.

Two concrete models are provided:

* ``canonical_pairs`` -- ``n`` exact canonical pairs, the flow is a rotation;
* ``lightray_hermite`` -- the real line truncated to the first ``N`` Hermite
  functions, with ``S = -d/dx``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np
import scipy.linalg

FLAVORS = ("canonical_pairs", "lightray_hermite", "custom")

_STRUCT_TOL = 1e-12


class ModelError(ValueError):
    """Raised for inconsistent or degenerate model data."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpaceModel:
    """Immutable model of ``(X, sigma, tau, S, T_t)``.

    Models compare by identity; two separately built models with equal
    matrices are treated as different spaces.
    """

    tau_matrix: np.ndarray
    S: np.ndarray
    flavor: str = "custom"

    def __post_init__(self):
        tau = _frozen(self.tau_matrix)
        S = _frozen(self.S)
        object.__setattr__(self, "tau_matrix", tau)
        object.__setattr__(self, "S", S)
        if self.flavor not in FLAVORS:
            raise ModelError(f"unknown flavor {self.flavor!r}")
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1] or S.shape != tau.shape:
            raise ModelError("tau and S must be square matrices of equal size")
        n = tau.shape[0]
        if n < 2 or n % 2:
            raise ModelError(f"dimension N={n} must be even and >= 2 (sigma would be degenerate)")
        scale = max(1.0, np.abs(tau).max())
        if np.abs(tau - tau.T).max() > _STRUCT_TOL * scale:
            raise ModelError("tau is not symmetric")
        if np.linalg.eigvalsh(tau).min() <= 0:
            raise ModelError("tau is not positive definite")
        skew = tau @ S + S.T @ tau
        if np.abs(skew).max() > _STRUCT_TOL * max(1.0, np.abs(S).max()) * scale:
            raise ModelError("S is not tau-antisymmetric")
        sv = np.linalg.svd(S, compute_uv=False)
        if sv.min() <= 1e-10 * max(sv.max(), 1.0):
            raise ModelError("sigma is degenerate (S is singular)")

    @property
    def N(self) -> int:
        return self.tau_matrix.shape[0]

    @cached_property
    def sigma_matrix(self) -> np.ndarray:
        """Matrix ``Omega`` with ``sigma(f, g) = f @ Omega @ g``."""
        return _frozen(-self.tau_matrix @ self.S)

    @cached_property
    def prime_matrix(self) -> np.ndarray:
        return _frozen(-self.S)

    @cached_property
    def clifford_basis(self) -> np.ndarray:
        """Columns form a tau-orthonormal basis ``b_i``.

        Coordinates in this basis are ``L.T @ f`` with ``tau = L L^T``.
        """
        L = np.linalg.cholesky(self.tau_matrix)
        return _frozen(np.linalg.inv(L).T)

    @cached_property
    def clifford_coords_matrix(self) -> np.ndarray:
        return _frozen(np.linalg.cholesky(self.tau_matrix).T)

    # -- test functions -----------------------------------------------------

    def vector(self, coeffs: Sequence[float]) -> "TestFunction":
        return TestFunction(self, coeffs)

    def zero(self) -> "TestFunction":
        return TestFunction(self, np.zeros(self.N))

    def basis_vector(self, i: int) -> "TestFunction":
        e = np.zeros(self.N)
        e[i] = 1.0
        return TestFunction(self, e)

    def basis(self) -> list["TestFunction"]:
        return [self.basis_vector(i) for i in range(self.N)]

    def flow_matrix(self, t: float) -> np.ndarray:
        return scipy.linalg.expm(t * self.S)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"flavor": self.flavor, "N": self.N}
        if self.flavor == "custom":
            out["tau"] = self.tau_matrix.ravel().tolist()
            out["S"] = self.S.ravel().tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SpaceModel":
        flavor = data.get("flavor")
        if flavor == "canonical_pairs":
            n_pairs = data.get("n_pairs")
            if n_pairs is None:
                n_pairs = int(data["N"]) // 2
            return build_canonical_pairs(int(n_pairs))
        if flavor == "lightray_hermite":
            return build_lightray_hermite(int(data["N"]))
        if flavor == "custom":
            n = int(data["N"])
            tau = np.asarray(data["tau"], dtype=float).reshape(n, n)
            S = np.asarray(data["S"], dtype=float).reshape(n, n)
            return cls(tau, S, "custom")
        raise ModelError(f"unknown flavor {flavor!r}")

    @classmethod
    def from_json(cls, text: str) -> "SpaceModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A vector of coordinates in the model's fixed basis."""

    __test__ = False  # keep pytest from collecting this class

    model: SpaceModel
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = _frozen(self.coeffs).ravel()
        if c.shape != (self.model.N,):
            raise ModelError(f"test function has length {c.size}, model dimension is {self.model.N}")
        object.__setattr__(self, "coeffs", c)

    def _check(self, other: "TestFunction") -> None:
        if not isinstance(other, TestFunction):
            raise TypeError(f"expected TestFunction, got {type(other).__name__}")
        if other.model is not self.model:
            raise ModelError("test functions belong to different models")

    def __add__(self, other: "TestFunction") -> "TestFunction":
        self._check(other)
        return TestFunction(self.model, self.coeffs + other.coeffs)

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        self._check(other)
        return TestFunction(self.model, self.coeffs - other.coeffs)

    def __neg__(self) -> "TestFunction":
        return TestFunction(self.model, -self.coeffs)

    def __mul__(self, s: float) -> "TestFunction":
        return TestFunction(self.model, float(s) * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "TestFunction":
        return TestFunction(self.model, self.coeffs / float(s))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TestFunction)
            and other.model is self.model
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self) -> int:
        return hash((id(self.model), self.key()))

    def key(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.coeffs)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def prime(self) -> "TestFunction":
        return prime(self.model, self)

    def flow(self, t: float) -> "TestFunction":
        return flow(self.model, t, self)


def _coeffs(model: SpaceModel, f) -> np.ndarray:
    if isinstance(f, TestFunction):
        if f.model is not model:
            raise ModelError("test function belongs to a different model")
        return f.coeffs
    c = np.asarray(f, dtype=float).ravel()
    if c.shape != (model.N,):
        raise ModelError(f"test function has length {c.size}, model dimension is {model.N}")
    return c


# -- constructors ---------------------------------------------------------------


def build_canonical_pairs(n_pairs: int) -> SpaceModel:
    """``n_pairs`` canonical pairs ``(u_k, v_k)`` with ``S(u, v) = (-v, u)``."""
    if int(n_pairs) != n_pairs or n_pairs < 1:
        raise ModelError("n_pairs must be a positive integer")
    n = 2 * int(n_pairs)
    block = np.array([[0.0, -1.0], [1.0, 0.0]])
    S = np.kron(np.eye(int(n_pairs)), block)
    return SpaceModel(np.eye(n), S, "canonical_pairs")


def hermite_derivative_matrix(N: int) -> np.ndarray:
    """Matrix of ``d/dx`` on the first ``N`` Hermite functions.

    Column ``n`` holds the coordinates of ``h_n'``, from
    ``h_n' = sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}`` (the ``h_N`` part is
    dropped).
    """
    D = np.zeros((N, N))
    for n in range(N):
        if n >= 1:
            D[n - 1, n] = np.sqrt(n / 2.0)
        if n + 1 < N:
            D[n + 1, n] = -np.sqrt((n + 1) / 2.0)
    return D


def build_lightray_hermite(N: int) -> SpaceModel:
    """Hermite truncation of the light-ray model; odd ``N`` is rejected."""
    if int(N) != N or N < 2:
        raise ModelError("N must be an even integer >= 2")
    if N % 2:
        raise ModelError(f"N={N} is odd: the truncated sigma is degenerate")
    return SpaceModel(np.eye(N), -hermite_derivative_matrix(int(N)), "lightray_hermite")


# -- bilinear forms and maps ----------------------------------------------------


def sigma(model: SpaceModel, f, g) -> float:
    return float(_coeffs(model, f) @ model.sigma_matrix @ _coeffs(model, g))


def tau(model: SpaceModel, f, g) -> float:
    return float(_coeffs(model, f) @ model.tau_matrix @ _coeffs(model, g))


def prime(model: SpaceModel, f) -> TestFunction:
    """``f' = -S f``."""
    return TestFunction(model, model.prime_matrix @ _coeffs(model, f))


def generator(model: SpaceModel, f) -> TestFunction:
    """``S f``."""
    return TestFunction(model, model.S @ _coeffs(model, f))


def flow(model: SpaceModel, t: float, f) -> TestFunction:
    """``T_t f = exp(t S) f``."""
    c = _coeffs(model, f)
    if t == 0:
        return TestFunction(model, c)
    return TestFunction(model, model.flow_matrix(t) @ c)


# -- Darboux frames -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DarbouxFrame:
    """Basis ``(e_1, f_1, ..., e_n, f_n)`` (columns of ``B``) in canonical pair form."""

    B: np.ndarray
    n_pairs: int

    def __post_init__(self):
        object.__setattr__(self, "B", _frozen(self.B))

    @cached_property
    def _inv(self) -> np.ndarray:
        return _frozen(np.linalg.inv(self.B))

    def coords(self, f) -> np.ndarray:
        """Darboux coordinates ``(a_1, b_1, ..., a_n, b_n)`` of ``f``."""
        c = f.coeffs if isinstance(f, TestFunction) else np.asarray(f, dtype=float)
        return self._inv @ c

    def residual(self, model: SpaceModel) -> float:
        J = np.kron(np.eye(self.n_pairs), np.array([[0.0, 1.0], [-1.0, 0.0]]))
        return float(np.abs(self.B.T @ model.sigma_matrix @ self.B - J).max())


def darboux_basis(model: SpaceModel, tol: float = 1e-10) -> DarbouxFrame:
    """Symplectic Gram-Schmidt on the model basis.

    Each step takes the first remaining vector, pairs it with the remaining
    vector of largest symplectic overlap, and projects the pair out of the
    rest.
    """
    Omega = model.sigma_matrix

    def sg(x, y):
        return float(x @ Omega @ y)

    remaining = [np.eye(model.N)[:, i] for i in range(model.N)]
    cols = []
    while remaining:
        e = remaining.pop(0)
        overlaps = [abs(sg(e, w)) for w in remaining]
        if not overlaps or max(overlaps) < tol:
            span = np.array([e] + remaining)
            raise ModelError(
                f"sigma degenerate on the subspace spanned by rows of\n{np.array2string(span, precision=4)}"
            )
        k = int(np.argmax(overlaps))
        w = remaining.pop(k)
        f = w / sg(e, w)
        remaining = [x - sg(x, f) * e + sg(x, e) * f for x in remaining]
        cols.extend([e, f])
    frame = DarbouxFrame(np.column_stack(cols), model.N // 2)
    if frame.residual(model) > 1e-12 * max(1.0, np.abs(frame.B).max() ** 2):
        raise ModelError(f"Darboux residual {frame.residual(model):.2e} too large")
    return frame

"""Numerical checks of operator identities and infinitesimal formulas.

Every check returns :class:`CheckReport` objects. A report passes iff every
case satisfies its comparison (``le``: value <= bound, ``ge``: value >= bound).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import algebra as alg
from .algebra import Classification, DomainError, Expression
from .derivations import (
    conjugate_superderivation,
    density_factor_bounds,
    density_net,
    derivation_bar,
    mollified_square,
    mollifier,
    mollifier_derivative_bound,
    superderivation_bar,
    superderivation_core,
)
from .fock import Rep, RepConfig, build_rep, operator_norm
from .space_model import SpaceModel, TestFunction, sigma

log = logging.getLogger(__name__)

GEOMETRIC_GRID = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


@dataclass
class CheckReport:
    check_id: str
    params: dict
    cases: list = field(default_factory=list)
    tolerance: float = 0.0
    notes: list = field(default_factory=list)
    wall_time_ms: float = 0.0

    def add(self, name: str, value: float, bound: float, comparison: str = "le", **extra) -> None:
        self.cases.append({"name": name, "residual": float(value), "tolerance": float(bound), "comparison": comparison, **extra})

    @staticmethod
    def _ok(case: dict) -> bool:
        v, b = case["residual"], case["tolerance"]
        if not math.isfinite(v):
            return False
        return v <= b if case["comparison"] == "le" else v >= b

    @property
    def passed(self) -> bool:
        return all(self._ok(c) for c in self.cases)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def failures(self) -> list:
        return [c for c in self.cases if not self._ok(c)]

    def to_dict(self) -> dict:
        vals = [c["residual"] for c in self.cases if c["comparison"] == "le"]
        per_case = [dict(c, passed=self._ok(c)) for c in self.cases]
        return {
            "check_id": self.check_id,
            "params": self.params,
            "residuals": {
                "max": max(vals) if vals else 0.0,
                "mean": float(np.mean(vals)) if vals else 0.0,
                "per_case": per_case,
            },
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "notes": list(self.notes),
            "wall_time_ms": self.wall_time_ms,
        }


class _Timer:
    def __init__(self, report: CheckReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.wall_time_ms = round((time.perf_counter() - self.t0) * 1e3, 3)
        return False


@dataclass(frozen=True)
class FDScheme:
    """Central finite differences; ``richardson4`` combines steps ``h`` and ``h/2``."""

    h: float = 1e-4
    order: str = "central2"

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("FD step must be positive")
        if self.order not in ("central2", "richardson4"):
            raise ValueError(f"unknown FD order {self.order!r}")

    def derivative(self, g: Callable[[float], np.ndarray]) -> np.ndarray:
        def central(h):
            return (g(h) - g(-h)) / (2 * h)

        if self.order == "central2":
            return central(self.h)
        return (4 * central(self.h / 2) - central(self.h)) / 3

    def to_dict(self) -> dict:
        return {"h": self.h, "order": self.order}


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    ys = np.asarray(ys, dtype=float)
    if np.any(ys <= 0):
        return float("nan")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _vec_norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def default_functions(model: SpaceModel, scale: float = 0.5) -> list[TestFunction]:
    """Low-energy battery ``scale * {e0, e1, 0.6 e0 + 0.8 e1}``."""
    e0, e1 = model.basis_vector(0), model.basis_vector(1)
    return [e0 * scale, e1 * scale, (e0 * 0.6 + e1 * 0.8) * scale]


# -- resolvent battery ------------------------------------------------------------------


def _apply_boson(rep: Rep, B: np.ndarray, v: np.ndarray) -> np.ndarray:
    V = v.reshape(rep.dim_fermion, rep.dim_boson)
    return (V @ B.T).reshape(-1)


def _max_action(rep: Rep, B: np.ndarray, vectors: Iterable[np.ndarray]) -> float:
    return max(_vec_norm(_apply_boson(rep, B, v)) / _vec_norm(v) for v in vectors)


def check_resolvent_battery(
    rep: Rep,
    fs: Optional[Sequence[TestFunction]] = None,
    lams: Sequence[float] = (3.0, 4.0, -3.0),
    rng: Optional[np.random.Generator] = None,
    n_random: int = 20,
    n_safe: int = 6,
    exact_tol: float = 1e-10,
    sigma_tol: Optional[float] = None,
) -> list[CheckReport]:
    """Defining resolvent relations, the field-resolvent identity and the field commutator.

    Sigma-free relations are tested on whole-space random vectors. The
    commutator, product and field-commutator relations involve the
    canonical commutation relations and are tested on safe-projected
    low-energy vectors. Pairs with ``lam + mu = 0`` are skipped in the
    product rule and logged in the report notes.
    """
    model = rep.model
    fs = list(fs) if fs is not None else default_functions(model)
    rng = rng if rng is not None else np.random.default_rng(0)
    sigma_tol = rep.config.sigma_tolerance if sigma_tol is None else sigma_tol
    if any(l == 0 for l in lams):
        raise ValueError("lambda grid must be nonzero")
    rand = rep.random_vectors(n_random, rng)
    safe = rep.test_vectors(n_safe, rng)
    params = {
        "model": model.to_dict(),
        "d": rep.d,
        "margin": rep.config.safe_margin,
        "lambdas": list(map(float, lams)),
        "functions": [list(f.key()) for f in fs],
        "n_random": n_random,
        "n_safe": len(safe),
    }
    R = rep.boson_resolvent
    J = rep.boson_field
    I = np.eye(rep.dim_boson)
    reports = []

    def new(rel: str, tol: float) -> CheckReport:
        r = CheckReport(f"resolvent_battery.{rel}", dict(params, relation=rel), tolerance=tol)
        reports.append(r)
        return r

    t0 = time.perf_counter()
    rep_zero = new("zero_argument", exact_tol)
    for l in lams:
        rep_zero.add(f"lam={l}", _max_action(rep, R(l, np.zeros(model.N)) + 1j / l * I, rand), exact_tol)

    rep_adj = new("adjoint", exact_tol)
    rep_scale = new("scaling", exact_tol)
    rep_same = new("same_argument", exact_tol)
    rep_jres = new("field_resolvent", exact_tol)
    rep_comm = new("commutator", sigma_tol)
    rep_prod = new("product", sigma_tol)
    rep_jcomm = new("field_commutator", sigma_tol)
    for fi, f in enumerate(fs):
        fv = f.coeffs
        for l in lams:
            tag = f"f{fi},lam={l}"
            rep_adj.add(tag, _max_action(rep, R(l, fv).conj().T - R(-l, fv), rand), exact_tol)
            rep_scale.add(tag, _max_action(rep, R(l, fv) - R(1.0, fv / l) / l, rand), exact_tol)
            rep_jres.add(tag, _max_action(rep, J(fv) @ R(l, fv) - (1j * l * R(l, fv) - I), rand), exact_tol)
            for m in lams:
                if m != l:
                    diff = R(l, fv) - R(m, fv) - 1j * (m - l) * R(l, fv) @ R(m, fv)
                    rep_same.add(f"{tag},mu={m}", _max_action(rep, diff, rand), exact_tol)
        for gi, g in enumerate(fs):
            gv = g.coeffs
            s = sigma(model, f, g)
            for l in lams:
                Rg = R(l, gv)
                rep_jcomm.add(
                    f"f{fi},g{gi},lam={l}",
                    _max_action(rep, J(fv) @ Rg - Rg @ J(fv) - 1j * s * Rg @ Rg, safe),
                    sigma_tol,
                )
                for m in lams:
                    tag = f"f{fi},g{gi},lam={l},mu={m}"
                    Rf, Rm = R(l, fv), R(m, gv)
                    comm = Rf @ Rm - Rm @ Rf - 1j * s * Rf @ Rm @ Rm @ Rf
                    rep_comm.add(tag, _max_action(rep, comm, safe), sigma_tol)
                    if l + m == 0:
                        msg = f"product rule skipped for {tag}: lambda + mu = 0"
                        rep_prod.notes.append(msg)
                        log.info(msg)
                        continue
                    prod = Rf @ Rm - R(l + m, fv + gv) @ (Rf + Rm + 1j * s * Rf @ Rf @ Rm)
                    rep_prod.add(tag, _max_action(rep, prod, safe), sigma_tol)
    elapsed = round((time.perf_counter() - t0) * 1e3, 3)
    for r in reports:
        r.wall_time_ms = elapsed
    return reports


def calibrate_sigma_tolerance(
    model: SpaceModel,
    config: RepConfig,
    fs: Optional[Sequence[TestFunction]] = None,
    lams: Sequence[float] = (3.0, 4.0, -3.0),
    seed: int = 0,
    n_safe: int = 6,
) -> dict:
    """Cutoff-doubling study of the sigma-dependent relations.

    Residuals are computed at cutoffs ``d`` and ``2d`` on the same test
    vectors (built at ``d`` and embedded). Returns both maxima, whether the
    larger cutoff stays within ``1.1x`` of the smaller one, and a suggested
    tolerance of ``10x`` the observed maximum at ``d``.
    """
    fs = list(fs) if fs is not None else default_functions(model)
    small = build_rep(model, config)
    big_cfg = RepConfig(
        boson_cutoff=2 * config.boson_cutoff,
        safe_margin=config.safe_margin,
        solver_tolerance=config.solver_tolerance,
        dimension_budget=max(config.dimension_budget, small.dim * 2 ** (model.N // 2) * 4),
        sigma_tolerance=config.sigma_tolerance,
    )
    big = build_rep(model, big_cfg)
    vecs = small.test_vectors(n_safe, np.random.default_rng(seed))
    out = {}
    for name, rep, vv in (("d", small, vecs), ("2d", big, [small.embed(v, big) for v in vecs])):
        worst = 0.0
        for f in fs:
            for g in fs:
                s = sigma(model, f, g)
                for l in lams:
                    for m in lams:
                        Rf, Rm = rep.boson_resolvent(l, f.coeffs), rep.boson_resolvent(m, g.coeffs)
                        comm = Rf @ Rm - Rm @ Rf - 1j * s * Rf @ Rm @ Rm @ Rf
                        worst = max(worst, _max_action(rep, comm, vv))
                        if l + m != 0:
                            prod = Rf @ Rm - rep.boson_resolvent(l + m, f.coeffs + g.coeffs) @ (
                                Rf + Rm + 1j * s * Rf @ Rf @ Rm
                            )
                            worst = max(worst, _max_action(rep, prod, vv))
        out[name] = worst
    return {
        "cutoff": config.boson_cutoff,
        "residual_d": out["d"],
        "residual_2d": out["2d"],
        "monotone": out["2d"] <= 1.1 * out["d"] + 1e-15,
        "suggested_tolerance": 10 * out["d"],
    }


# -- norms and asymptotics --------------------------------------------------------------


def check_norm_law(
    rep: Rep,
    fs: Optional[Sequence[TestFunction]] = None,
    lams: Sequence[float] = (1.0, 2.0, 10.0),
    equality_tol: float = 1e-10,
    roundoff: float = 1e-12,
) -> CheckReport:
    """``||R(lam, f)|| <= 1/|lam|``; equality at odd cutoff, where ``0`` is an eigenvalue of ``j(f)``.

    At odd cutoff the mollified-field norm ``||lam zeta(f/lam)|| = sqrt(tau(f,f)/2)``
    is checked as well.
    """
    model = rep.model
    fs = list(fs) if fs is not None else [model.basis_vector(0), model.basis_vector(1)]
    odd = rep.d % 2 == 1
    report = CheckReport(
        "norm_law",
        {"model": model.to_dict(), "d": rep.d, "lambdas": list(map(float, lams)), "odd_cutoff": odd},
        tolerance=equality_tol,
    )
    if not odd:
        report.notes.append("even cutoff: 0 is not an eigenvalue of j(f); only the bound is asserted")
    with _Timer(report):
        for fi, f in enumerate(fs):
            for l in lams:
                nrm = operator_norm(rep.op_resolvent(l, f))
                report.add(f"bound f{fi},lam={l}", nrm - 1 / abs(l), roundoff)
                if odd:
                    report.add(f"equality f{fi},lam={l}", abs(nrm - 1 / abs(l)), equality_tol)
                    z = alg.zeta(f / l).scale(l)
                    expected = math.sqrt(f.coeffs @ model.tau_matrix @ f.coeffs / 2)
                    report.add(f"zeta f{fi},lam={l}", abs(operator_norm(rep.evaluate(z)) - expected), equality_tol)
    return report


def check_asymptotics(
    rep: Rep,
    fs: Optional[Sequence[TestFunction]] = None,
    vectors: Optional[Sequence[np.ndarray]] = None,
    lams: Sequence[float] = GEOMETRIC_GRID,
    slope_tol: float = 0.15,
    seed: int = 0,
) -> CheckReport:
    """Decay ``||i lam R(lam, f) xi - xi|| = O(1/lam)`` via the log-log slope."""
    model = rep.model
    fs = list(fs) if fs is not None else default_functions(model)[:1]
    if vectors is None:
        vectors = rep.test_vectors(5, np.random.default_rng(seed))
    report = CheckReport(
        "asymptotics",
        {"model": model.to_dict(), "d": rep.d, "lambdas": list(map(float, lams)), "n_vectors": len(vectors)},
        tolerance=slope_tol,
    )
    with _Timer(report):
        for fi, f in enumerate(fs):
            for vi, xi in enumerate(vectors):
                ys = [
                    _vec_norm(1j * l * _apply_boson(rep, rep.boson_resolvent(l, f.coeffs), xi) - xi)
                    for l in lams
                ]
                slope = loglog_slope(lams, ys)
                report.add(f"f{fi},xi{vi}", abs(slope + 1), slope_tol, slope=slope, values=ys)
    return report


# -- generator and supersymmetry --------------------------------------------------------


def _require_bounded(A: Expression) -> None:
    if alg.classify(A) == Classification.E_ONLY:
        raise DomainError("the flow is not defined on expressions containing boson fields")


def generator_residuals(rep: Rep, A: Expression, xi: np.ndarray, scheme: FDScheme) -> dict:
    """``-i d/dt pi(alpha_t(A)) xi`` against ``pi(dbar_h A) xi`` and ``pi(dbar_s^2 A) xi``."""
    _require_bounded(A)
    fd = -1j * scheme.derivative(lambda t: rep.strong_apply(alg.translate(A, t), xi))
    h_vec = rep.strong_apply(derivation_bar(A), xi)
    s_vec = rep.strong_apply(alg.simplify(superderivation_bar(superderivation_bar(A))), xi)
    return {
        "dbar_h": _vec_norm(fd - h_vec),
        "dbar_s_squared": _vec_norm(fd - s_vec),
        "consistency": _vec_norm(h_vec - s_vec),
    }


def check_generator(
    rep: Rep,
    A: Expression,
    xi: np.ndarray,
    scheme: FDScheme = FDScheme(),
    tol: float = 1e-5,
    consistency_tol: float = 1e-10,
    richardson_upgrade: bool = True,
    label: str = "A",
) -> CheckReport:
    """Finite-difference generator of the flow against the time derivation and ``dbar_s^2``.

    With ``richardson_upgrade`` a central-difference residual above ``tol/10``
    is recomputed with the fourth-order scheme at the same step.
    """
    report = CheckReport(
        "generator",
        {"model": rep.model.to_dict(), "d": rep.d, "expr": label, "scheme": scheme.to_dict()},
        tolerance=tol,
    )
    with _Timer(report):
        res = generator_residuals(rep, A, xi, scheme)
        if richardson_upgrade and scheme.order == "central2" and max(res["dbar_h"], res["dbar_s_squared"]) > tol / 10:
            up = FDScheme(scheme.h, "richardson4")
            res = generator_residuals(rep, A, xi, up)
            report.params["scheme"] = up.to_dict()
            report.notes.append("upgraded to richardson4")
        report.add(f"{label} vs dbar_h", res["dbar_h"], tol)
        report.add(f"{label} vs dbar_s^2", res["dbar_s_squared"], tol)
        report.add(f"{label} dbar_h vs dbar_s^2", res["consistency"], consistency_tol)
        report.add(
            f"{label} two-sided agreement",
            abs(res["dbar_h"] - res["dbar_s_squared"]),
            consistency_tol,
        )
    return report


def _require_core(A: Expression) -> None:
    if alg.core_form(A) is None:
        raise DomainError("expression is not in the core algebra")


def susy_core_residual(rep: Rep, A: Expression, lam: float, xi: np.ndarray, scheme: FDScheme) -> float:
    M = mollifier(A, lam)
    fd = -1j * scheme.derivative(lambda t: rep.strong_apply(M * alg.translate(A, t), xi))
    return _vec_norm(fd - rep.strong_apply(mollified_square(A, lam), xi))


def check_susy_core(
    rep: Rep,
    A: Expression,
    lams: Sequence[float] = (1.0, 10.0, 100.0),
    xi: Optional[np.ndarray] = None,
    scheme: FDScheme = FDScheme(),
    tol: float = 1e-5,
    slope_tol: float = 0.2,
    label: str = "A",
) -> CheckReport:
    """Mollified supersymmetry formula per ``lam``, plus mollifier decay diagnostics."""
    _require_core(A)
    xi = rep.vacuum() if xi is None else xi
    report = CheckReport(
        "susy_core",
        {
            "model": rep.model.to_dict(),
            "d": rep.d,
            "expr": label,
            "lambdas": list(map(float, lams)),
            "scheme": scheme.to_dict(),
        },
        tolerance=tol,
    )
    with _Timer(report):
        dist, dnorm, bounds = [], [], []
        for l in lams:
            report.add(f"{label} lam={l}", susy_core_residual(rep, A, l, xi, scheme), tol)
            M = mollifier(A, l)
            dist.append(_vec_norm(rep.strong_apply(M, xi) - xi))
            dnorm.append(operator_norm(rep.evaluate(superderivation_core(M))))
            bounds.append(mollifier_derivative_bound(A, l))
        for l, n, b in zip(lams, dnorm, bounds):
            report.add(f"{label} |d_s M| <= bound lam={l}", n - b, 1e-12)
        if all(v == 0 for v in dist):
            report.notes.append("trivial mollifier: decay slopes not applicable")
        elif len(lams) >= 2:
            s1 = loglog_slope(lams, dist)
            s2 = loglog_slope(lams, dnorm)
            report.add(f"{label} slope |M xi - xi|", abs(s1 + 1), slope_tol, slope=s1, values=dist)
            report.add(f"{label} slope |d_s M|", abs(s2 + 1), slope_tol, slope=s2, values=dnorm)
    return report


def check_susy_identity(
    rep: Rep,
    rng: Optional[np.random.Generator] = None,
    n_words: int = 50,
    max_len: int = 4,
    tol: float = 1e-8,
    maldoub_tol: float = 1e-10,
    battery: Optional[dict] = None,
    lams: Sequence[float] = (10.0, 100.0),
    n_vectors: int = 3,
) -> CheckReport:
    """``dbar_s^2 = dbar_h`` on atoms and random words; mollified-square and core identities."""
    model = rep.model
    rng = rng if rng is not None else np.random.default_rng(0)
    vectors = rep.test_vectors(n_vectors, rng)
    fs = default_functions(model)
    report = CheckReport(
        "susy_identity",
        {"model": model.to_dict(), "d": rep.d, "n_words": n_words, "max_len": max_len, "n_vectors": len(vectors)},
        tolerance=tol,
    )

    def worst(e: Expression) -> float:
        return max(_vec_norm(rep.strong_apply(e, v)) for v in vectors)

    def susy_gap(e: Expression) -> Expression:
        return superderivation_bar(superderivation_bar(e)) - derivation_bar(e)

    def random_atom() -> Expression:
        f = TestFunction(model, rng.normal(size=model.N) * 0.5)
        k = rng.integers(3)
        if k == 0:
            return alg.cliff(f)
        if k == 1:
            return alg.field(f)
        return alg.res(float(rng.choice([1.0, 2.0, -2.0])), f)

    with _Timer(report):
        f = fs[2]
        for name, e in (("cliff", alg.cliff(f)), ("field", alg.field(f)), ("res", alg.res(2.0, f)), ("unit", alg.unit(model))):
            report.add(f"atom {name}", worst(susy_gap(e)), tol)
        for k in range(n_words):
            e = alg.unit(model)
            for _ in range(int(rng.integers(1, max_len + 1))):
                e = e * random_atom()
            report.add(f"word {k}", worst(susy_gap(e)), tol)
        battery = battery if battery is not None else generator_battery(model)
        for name, A in battery.items():
            dsA = superderivation_core(A)
            report.add(f"{name} d_s vs dbar_s", worst(dsA - superderivation_bar(A)), maldoub_tol)
            report.add(f"{name} d_s* vs d_s", worst(conjugate_superderivation(A) - dsA), maldoub_tol)
            for l in lams:
                M = mollifier(A, l)
                gap = mollified_square(A, l) - M * superderivation_bar(superderivation_bar(A))
                report.add(f"{name} mollified square lam={l}", worst(gap), maldoub_tol)
    return report


def generator_battery(model: SpaceModel, scale: float = 0.2) -> dict:
    """Core test elements built from low-energy functions of norm ``scale``."""
    f, g, _ = default_functions(model, scale)
    return {
        "unit": alg.unit(model),
        "zeta(f)": alg.zeta(f),
        "res(2,f)": alg.res(2.0, f),
        "zeta(f)res(1,g)": alg.zeta(f) * alg.res(1.0, g),
        "zeta(f)zeta(g)": alg.zeta(f) * alg.zeta(g),
    }


# -- state conditions and density --------------------------------------------------------


def check_state_conditions(
    rep: Rep,
    fs: Optional[Sequence[TestFunction]] = None,
    scheme: FDScheme = FDScheme(),
    tol: float = 1e-6,
) -> CheckReport:
    """Regularity conditions of the vacuum state.

    The polynomial domain condition holds trivially in finite dimension and is
    recorded as a zero-residual case. Field differentiability compares
    ``d/dt j(T_t f) Omega`` with ``j(S f) Omega`` by finite differences.
    """
    model = rep.model
    fs = list(fs) if fs is not None else model.basis() + [model.zero()]
    report = CheckReport(
        "state_conditions",
        {"model": model.to_dict(), "d": rep.d, "scheme": scheme.to_dict(), "n_functions": len(fs)},
        tolerance=tol,
    )
    omega = rep.vacuum()
    with _Timer(report):
        report.add("domain condition (finite dimension)", 0.0, tol)
        report.add("vacuum normalization", abs(rep.state_expectation(alg.unit(model)) - 1), 1e-12)
        for fi, f in enumerate(fs):
            fd = scheme.derivative(lambda t: rep.strong_apply(alg.field(f.flow(t)), omega))
            exact = rep.strong_apply(alg.field(TestFunction(model, model.S @ f.coeffs)), omega)
            report.add(f"differentiability f{fi}", _vec_norm(fd - exact), tol)
    return report


def check_density_net(
    rep: Rep,
    B: Expression,
    lams: Sequence[float] = GEOMETRIC_GRID[1:],
    xi: Optional[np.ndarray] = None,
    slope_tol: float = 0.15,
    norm_tol: float = 1e-10,
    label: str = "B",
) -> CheckReport:
    """Net replacing each ``c(f)`` by ``i lam zeta(f/lam)``: strong ``O(1/lam)`` convergence and factor norms."""
    _require_bounded(B)
    xi = rep.vacuum() if xi is None else xi
    model = rep.model
    report = CheckReport(
        "density_net",
        {"model": model.to_dict(), "d": rep.d, "expr": label, "lambdas": list(map(float, lams))},
        tolerance=slope_tol,
    )
    with _Timer(report):
        target = rep.strong_apply(B, xi)
        ys = [_vec_norm(rep.strong_apply(density_net(B, l), xi) - target) for l in lams]
        if max(ys) <= 1e-14:
            report.add(f"{label} net residual", max(ys), 1e-12)
            report.notes.append("no Clifford factors: the net is constant")
        else:
            slope = loglog_slope(lams, ys)
            report.add(f"{label} slope", abs(slope + 1), slope_tol, slope=slope, values=ys)
        cliffs = [a for w in B.term_dict for a in w if a.kind == alg.CLIFF]
        for k, (a, bound) in enumerate(zip(cliffs, density_factor_bounds(B))):
            f = TestFunction(model, a.vec())
            for l in (lams[0], lams[-1]):
                nrm = operator_norm(rep.evaluate(alg.zeta(f / l).scale(l)))
                if rep.d % 2:
                    report.add(f"{label} factor {k} norm lam={l}", abs(nrm - bound), norm_tol)
                else:
                    report.add(f"{label} factor {k} norm bound lam={l}", nrm - bound, 1e-12)
    return report


# -- finite-difference order --------------------------------------------------------------


def check_fd_order(
    rep: Rep,
    cases: dict,
    xi: Optional[np.ndarray] = None,
    h: float = 1e-2,
    min_ratio: float = 3.2,
    min_order: float = 1.8,
    floor_factor: float = 10.0,
) -> CheckReport:
    """Halving ``h`` in central differences shrinks FD-dominated residuals about fourfold.

    ``cases`` maps a label to ``("generator", A)`` or ``("susy_core", A, lam)``.
    The non-FD floor of each case is estimated with the fourth-order scheme at
    ``h/2``; cases whose central residual at ``h/2`` is not ``floor_factor``
    above it are not FD-dominated and are recorded as notes only.
    """
    xi = rep.vacuum() if xi is None else xi
    report = CheckReport(
        "fd_order",
        {"model": rep.model.to_dict(), "d": rep.d, "h": h, "cases": list(cases)},
        tolerance=min_ratio,
    )

    def residual(case, sch):
        kind, A = case[0], case[1]
        if kind == "generator":
            return generator_residuals(rep, A, xi, sch)["dbar_h"]
        if kind == "susy_core":
            return susy_core_residual(rep, A, case[2], xi, sch)
        raise ValueError(f"unknown FD case kind {kind!r}")

    with _Timer(report):
        for name, case in cases.items():
            vals = [residual(case, FDScheme(step, "central2")) for step in (h, h / 2)]
            floor = residual(case, FDScheme(h / 2, "richardson4"))
            if vals[1] < floor_factor * floor or vals[1] < 1e-13:
                report.notes.append(f"{name}: residual {vals[1]:.2e} not above floor {floor:.2e}, excluded")
                continue
            ratio = vals[0] / vals[1]
            report.add(f"{name} ratio", ratio, min_ratio, "ge", values=vals, floor=floor)
            report.add(f"{name} order", math.log2(ratio), min_order, "ge")
        if not report.cases:
            report.add("FD-dominated cases available", 0, 1, "ge")
    return report

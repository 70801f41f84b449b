"""Acceptance criteria, each runnable on its own and summarized in one line."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import algebra as alg
from . import verifier as vf
from .fock import RepConfig, build_rep
from .space_model import build_canonical_pairs, build_lightray_hermite


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget_s: float
    detail: str
    reports: list = field(default_factory=list)

    @property
    def within_budget(self) -> bool:
        return self.seconds < self.budget_s

    def line(self) -> str:
        verdict = "PASS" if self.passed and self.within_budget else "FAIL"
        return f"[{verdict}] criterion {self.number}: {self.title} ({self.seconds:.1f}s / {self.budget_s:.0f}s) {self.detail}"


def _summarize(reports: list) -> tuple[bool, str]:
    failed = [(r.check_id, c) for r in reports for c in r.failures()]
    if not failed:
        worst = max(
            (c["residual"] / c["tolerance"] for r in reports for c in r.cases if c["comparison"] == "le" and c["tolerance"] > 0),
            default=0.0,
        )
        return True, f"all {sum(len(r.cases) for r in reports)} cases ok, worst residual/tolerance {worst:.2g}"
    cid, c = failed[0]
    return False, f"{len(failed)} failing cases, first: {cid} / {c['name']} = {c['residual']:.2e} vs {c['tolerance']:.1e}"


def _hermite_functions(model, scale: float):
    f = model.vector([0.8, 0.6, 0.0, 0.0]) * scale
    g = model.vector([0.6, 0.0, 0.8, 0.0]) * scale
    return f, g


def criterion_1() -> list:
    """Resolvent relations on the canonical pair at cutoff 16."""
    model = build_canonical_pairs(1)
    cfg = RepConfig(boson_cutoff=16, safe_margin=4, sigma_tolerance=1e-6)
    rep = build_rep(model, cfg)
    reports = vf.check_resolvent_battery(rep, rng=np.random.default_rng(1), n_random=20)
    study = vf.calibrate_sigma_tolerance(model, cfg)
    cal = vf.CheckReport("calibration", study, tolerance=cfg.sigma_tolerance)
    cal.add("sigma residual at d", study["residual_d"], cfg.sigma_tolerance)
    cal.add("monotone under doubling", study["residual_2d"], 1.1 * study["residual_d"] + 1e-15)
    return reports + [cal]


def criterion_2() -> list:
    model = build_canonical_pairs(1)
    even = vf.check_norm_law(build_rep(model, RepConfig(boson_cutoff=16)))
    odd = vf.check_norm_law(build_rep(model, RepConfig(boson_cutoff=31)))
    return [even, odd]


def criterion_3() -> list:
    model = build_canonical_pairs(1)
    rep = build_rep(model, RepConfig(boson_cutoff=16))
    vecs = rep.test_vectors(5, np.random.default_rng(3))
    return [vf.check_asymptotics(rep, vectors=vecs)]


def _hermite_rep():
    model = build_lightray_hermite(4)
    rep = build_rep(model, RepConfig(boson_cutoff=12, safe_margin=4))
    return model, rep


def criterion_4() -> list:
    model, rep = _hermite_rep()
    f, g = _hermite_functions(model, 1.0)
    vecs = rep.test_vectors(2, np.random.default_rng(4))
    out = []
    for name, A in (("c(f)", alg.cliff(f)), ("R(1,f)", alg.res(1.0, f)), ("c(f)R(1,g)", alg.cliff(f) * alg.res(1.0, g))):
        for k, xi in enumerate(vecs):
            out.append(vf.check_generator(rep, A, xi, vf.FDScheme(1e-4), tol=1e-5, label=f"{name} xi{k}"))
    return out


def _susy_battery(f, g):
    return {
        "zeta(f)": alg.zeta(f),
        "zeta(f)R(1,g)": alg.zeta(f) * alg.res(1.0, g),
        "zeta(f)zeta(g)": alg.zeta(f) * alg.zeta(g),
    }


def criterion_5() -> list:
    """Mollified supersymmetry formula on the canonical pair.

    The residual at ``lam = 1`` carries a cutoff floor that decays with ``d``;
    ``d = 96`` puts it two orders below the tolerance.
    """
    model = build_canonical_pairs(1)
    rep = build_rep(model, RepConfig(boson_cutoff=96, safe_margin=4))
    f, g = model.vector([0.8, 0.6]) * 0.2, model.vector([0.6, -0.8]) * 0.2
    vecs = rep.test_vectors(2, np.random.default_rng(5))
    out = []
    for name, A in _susy_battery(f, g).items():
        for k, xi in enumerate(vecs):
            out.append(vf.check_susy_core(rep, A, (1.0, 10.0, 100.0), xi, vf.FDScheme(1e-4), label=f"{name} xi{k}"))
    return out


def criterion_6() -> list:
    model = build_canonical_pairs(1)
    rep = build_rep(model, RepConfig(boson_cutoff=32, safe_margin=4))
    return [vf.check_susy_identity(rep, np.random.default_rng(6), n_words=50, max_len=4)]


def criterion_7() -> list:
    out = []
    for model, d in ((build_canonical_pairs(1), 16), (build_lightray_hermite(4), 12)):
        out.append(vf.check_state_conditions(build_rep(model, RepConfig(boson_cutoff=d)), scheme=vf.FDScheme(1e-4), tol=1e-6))
    return out


def criterion_8() -> list:
    """FD order on the criterion 4 generator cases and the criterion 5 setup."""
    model, rep = _hermite_rep()
    f, g = _hermite_functions(model, 1.0)
    gen_cases = {
        "generator c(f)": ("generator", alg.cliff(f)),
        "generator R(1,f)": ("generator", alg.res(1.0, f)),
        "generator c(f)R(1,g)": ("generator", alg.cliff(f) * alg.res(1.0, g)),
    }
    cmodel = build_canonical_pairs(1)
    crep = build_rep(cmodel, RepConfig(boson_cutoff=96, safe_margin=4))
    cf, cg = cmodel.vector([0.8, 0.6]) * 0.2, cmodel.vector([0.6, -0.8]) * 0.2
    susy_cases = {}
    for name, A in _susy_battery(cf, cg).items():
        for lam in (1.0, 10.0, 100.0):
            susy_cases[f"susy {name} lam={lam}"] = ("susy_core", A, lam)
    return [vf.check_fd_order(rep, gen_cases, h=1e-2), vf.check_fd_order(crep, susy_cases, h=1e-2)]


CRITERIA: dict[int, tuple[str, float, Callable[[], list]]] = {
    1: ("resolvent battery", 10.0, criterion_1),
    2: ("norm law", 5.0, criterion_2),
    3: ("strong asymptotics", 10.0, criterion_3),
    4: ("generator formula", 60.0, criterion_4),
    5: ("mollified SUSY formula", 120.0, criterion_5),
    6: ("algebraic SUSY identity", 60.0, criterion_6),
    7: ("state conditions", 10.0, criterion_7),
    8: ("FD order", 120.0, criterion_8),
}


def run_criterion(n: int) -> CriterionResult:
    title, budget, fn = CRITERIA[n]
    t0 = time.perf_counter()
    reports = fn()
    elapsed = time.perf_counter() - t0
    passed, detail = _summarize(reports)
    return CriterionResult(n, title, passed, elapsed, budget, detail, reports)


def run_all() -> list[CriterionResult]:
    return [run_criterion(n) for n in CRITERIA]

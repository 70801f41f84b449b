"""Suite orchestration and single-expression evaluation."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import algebra as alg
from . import verifier as vf
from .config import CHECK_IDS, CheckSpec, ConfigError, SuiteConfig
from .derivations import derivation_bar, superderivation_bar
from .fock import Rep, build_rep
from .space_model import SpaceModel, TestFunction
from .textio import ParseError, expression_to_dict, parse_expression, to_text

log = logging.getLogger(__name__)

SCHEMA = 1

_DEFAULT_EXPRS = {
    "generator": ["cliff(f)", "res(1, f)", "cliff(f)*res(1, g)"],
    "susy_core": ["zeta(f)", "zeta(f)*res(1, g)", "zeta(f)*zeta(g)"],
    "density_net": ["cliff(f)", "cliff(f)*res(1, g)"],
}
_DEFAULT_FD_CASES = {
    "generator": ["cliff(f)", "res(1, f)", "cliff(f)*res(1, g)"],
    "susy_core": ["zeta(f)", "zeta(f)*res(1, g)", "zeta(f)*zeta(g)"],
}


class Context:
    """Model, representation and bound names shared by the checks of one suite."""

    def __init__(self, config: SuiteConfig):
        self.config = config
        self.model: SpaceModel = config.build_model()
        self.names = config.bind_functions(self.model)
        self._rep: Optional[Rep] = None

    @property
    def rep(self) -> Rep:
        if self._rep is None:
            try:
                self._rep = build_rep(self.model, self.config.rep.build())
            except ValueError as exc:
                raise ConfigError(f"rep: {exc}") from exc
        return self._rep

    def names_with_defaults(self) -> dict[str, TestFunction]:
        """Bound names plus ``f`` and ``g`` low-energy defaults when not user-defined."""
        f, g, _ = vf.default_functions(self.model, 0.2)
        return {"f": f, "g": g, **self.names}

    def parse(self, text: str, where: str) -> alg.Expression:
        try:
            return parse_expression(text, self.model, self.names_with_defaults())
        except ParseError as exc:
            raise ConfigError(f"{where}: {exc}") from exc

    def functions(self, chk: CheckSpec) -> Optional[list[TestFunction]]:
        if chk.functions is None:
            return None
        return [self.names[n] for n in chk.functions]

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, index])

    def vectors(self, count: int, rng: np.random.Generator) -> list[np.ndarray]:
        return self.rep.test_vectors(count, rng)


def _scheme(chk: CheckSpec, default_h: float = 1e-4) -> vf.FDScheme:
    return vf.FDScheme(chk.h or default_h, chk.order or "central2")


def _kw(chk: CheckSpec, name: str, value):
    return {} if value is None else {name: value}


def run_check(ctx: Context, chk: CheckSpec, index: int = 0) -> list[vf.CheckReport]:
    rep = ctx.rep
    rng = ctx.rng(index)
    where = f"checks[{index}].expr"
    fs = ctx.functions(chk)
    lams = tuple(chk.lambdas) if chk.lambdas else None
    cid = chk.id
    if cid == "resolvent_battery":
        kw = _kw(chk, "sigma_tol", chk.tolerance)
        return vf.check_resolvent_battery(rep, fs, lams or (3.0, 4.0, -3.0), rng=rng, **kw)
    if cid == "calibration":
        study = vf.calibrate_sigma_tolerance(ctx.model, rep.config, fs, lams or (3.0, 4.0, -3.0), seed=ctx.config.seed)
        r = vf.CheckReport("calibration", {"model": ctx.model.to_dict(), **study}, tolerance=rep.config.sigma_tolerance)
        r.add("sigma residual at d", study["residual_d"], rep.config.sigma_tolerance)
        r.add("monotone under doubling", study["residual_2d"], 1.1 * study["residual_d"] + 1e-15)
        return [r]
    if cid == "norm_law":
        return [vf.check_norm_law(rep, fs, lams or (1.0, 2.0, 10.0))]
    if cid == "asymptotics":
        vecs = ctx.vectors(chk.vectors or 5, rng)
        return [vf.check_asymptotics(rep, fs, vecs, lams or vf.GEOMETRIC_GRID, **_kw(chk, "slope_tol", chk.tolerance))]
    if cid == "generator":
        out = []
        vecs = ctx.vectors(chk.vectors or 2, rng)
        for text in chk.exprs() or _DEFAULT_EXPRS["generator"]:
            A = ctx.parse(text, where)
            for k, xi in enumerate(vecs):
                r = vf.check_generator(rep, A, xi, _scheme(chk), label=f"{text} xi{k}", **_kw(chk, "tol", chk.tolerance))
                out.append(r)
        return out
    if cid == "susy_core":
        out = []
        vecs = ctx.vectors(chk.vectors or 2, rng)
        for text in chk.exprs() or _DEFAULT_EXPRS["susy_core"]:
            A = ctx.parse(text, where)
            for k, xi in enumerate(vecs):
                out.append(
                    vf.check_susy_core(
                        rep, A, lams or (1.0, 10.0, 100.0), xi, _scheme(chk), label=f"{text} xi{k}",
                        **_kw(chk, "tol", chk.tolerance),
                    )
                )
        return out
    if cid == "susy_identity":
        battery = None
        if chk.exprs():
            battery = {t: ctx.parse(t, where) for t in chk.exprs()}
        return [
            vf.check_susy_identity(
                rep, rng, n_words=50 if chk.words is None else chk.words, battery=battery,
                lams=lams or (10.0, 100.0), n_vectors=chk.vectors or 3,
            )
        ]
    if cid == "state_conditions":
        return [vf.check_state_conditions(rep, fs, _scheme(chk), **_kw(chk, "tol", chk.tolerance))]
    if cid == "density_net":
        out = []
        xi = ctx.vectors(chk.vectors or 2, rng)[-1]
        for text in chk.exprs() or _DEFAULT_EXPRS["density_net"]:
            out.append(vf.check_density_net(rep, ctx.parse(text, where), lams or vf.GEOMETRIC_GRID[1:], xi, label=text))
        return out
    if cid == "fd_order":
        cases = {}
        if chk.exprs():
            for text in chk.exprs():
                A = ctx.parse(text, where)
                if alg.core_form(A) is not None and alg.classify(A) != alg.Classification.R0:
                    for lam in lams or (10.0,):
                        cases[f"{text} lam={lam}"] = ("susy_core", A, lam)
                else:
                    cases[text] = ("generator", A)
        else:
            for text in _DEFAULT_FD_CASES["generator"]:
                cases[f"generator:{text}"] = ("generator", ctx.parse(text, where))
            for text in _DEFAULT_FD_CASES["susy_core"]:
                for lam in lams or (10.0,):
                    cases[f"susy_core:{text} lam={lam}"] = ("susy_core", ctx.parse(text, where), lam)
        return [vf.check_fd_order(rep, cases, h=chk.h or 1e-2)]
    raise ConfigError(f"checks[{index}].id: unknown check {cid!r}")


def run_suite(
    config: SuiteConfig,
    check_ids: Optional[Sequence[str]] = None,
    out: Optional[str] = None,
) -> tuple[int, list[dict]]:
    """Run the configured checks; write the JSON report array when an output path is set.

    ``check_ids`` filters the configured checks; ids that are not configured
    run with default parameters. Returns ``(exit_status, reports)``.
    """
    ctx = Context(config)
    specs = list(config.checks)
    if check_ids:
        unknown = [c for c in check_ids if c not in CHECK_IDS]
        if unknown:
            raise ConfigError(f"check: unknown id {unknown[0]!r}; choose from {', '.join(CHECK_IDS)}")
        specs = [s for s in specs if s.id in check_ids]
        specs += [CheckSpec(id=c) for c in check_ids if c not in {s.id for s in specs}]
    if not specs:
        specs = [CheckSpec(id="resolvent_battery")]
    reports = []
    for i, chk in enumerate(specs):
        log.info("running %s", chk.id)
        try:
            results = run_check(ctx, chk, i)
        except alg.DomainError as exc:
            raise ConfigError(f"checks[{i}]: {exc}") from exc
        for r in results:
            reports.append({"schema": SCHEMA, "seed": config.seed, **r.to_dict()})
    status = 0 if all(r["verdict"] == "pass" for r in reports) else 1
    path = out or config.output
    if path:
        Path(path).write_text(json.dumps(reports, indent=2) + "\n")
    return status, reports


ACTIONS = ("classify", "simplify", "dbar_s", "dbar_h", "expect")


def eval_expr(config: SuiteConfig, text: str, action: str) -> dict:
    """Apply ``action`` to the parsed expression; returns a JSON-ready result."""
    if action not in ACTIONS:
        raise ConfigError(f"action: unknown action {action!r}; choose from {', '.join(ACTIONS)}")
    ctx = Context(config)
    expr = ctx.parse(text, "expr")
    names = ctx.names_with_defaults()
    if action == "classify":
        return {"action": action, "result": alg.classify(expr).value}
    if action == "expect":
        val = ctx.rep.state_expectation(expr)
        return {"action": action, "result": val.real, "imag": val.imag}
    if action == "simplify":
        res = alg.simplify(expr)
    elif action == "dbar_s":
        res = alg.simplify(superderivation_bar(expr))
    else:
        res = alg.simplify(derivation_bar(expr))
    return {"action": action, "result": expression_to_dict(res), "text": to_text(res, names)}

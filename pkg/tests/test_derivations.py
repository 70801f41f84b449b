"""Superderivations, derivations, mollifiers and approximation nets."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resolvent_workbench import algebra as alg
from resolvent_workbench import derivations as dv
from resolvent_workbench.algebra import Classification as C
from resolvent_workbench.fock import RepConfig, build_rep, operator_norm
from resolvent_workbench.space_model import build_lightray_hermite, prime

MODEL = build_lightray_hermite(4)
REP = build_rep(MODEL, RepConfig(boson_cutoff=10, safe_margin=3))
F = MODEL.vector([0.8, 0.6, 0.0, 0.0]) * 0.5
G = MODEL.vector([0.6, 0.0, 0.8, 0.0]) * 0.5


def diff_norm(a, b):
    return float(np.abs(REP.evaluate(a) - REP.evaluate(b)).max())


def normal_zero(e):
    return alg.simplify(e, resolvent_rules=True).is_zero()


coeff = st.floats(-1, 1, allow_nan=False)
vec = st.tuples(coeff, coeff, coeff, coeff).map(lambda c: MODEL.vector(c))


@st.composite
def words(draw, max_len=3):
    e = None
    for _ in range(draw(st.integers(1, max_len))):
        kind = draw(st.sampled_from(["cliff", "field", "res"]))
        f = draw(vec)
        if kind == "cliff":
            a = alg.cliff(f)
        elif kind == "field":
            a = alg.field(f)
        else:
            a = alg.res(draw(st.sampled_from([-2.0, 1.0, 3.0])), f)
        e = a if e is None else e * a
    return e


# -- atom rules ----------------------------------------------------------------------


def test_dbar_s_atoms():
    fp = prime(MODEL, F)
    assert normal_zero(dv.superderivation_bar(alg.cliff(F)) - alg.field(F))
    assert normal_zero(dv.superderivation_bar(alg.field(F)) - alg.cliff(fp).scale(1j))
    r = alg.res(2.0, F)
    assert diff_norm(dv.superderivation_bar(r), (alg.cliff(fp) * r * r).scale(1j)) <= 1e-12
    assert dv.superderivation_bar(alg.unit(MODEL)).is_zero()


def test_dbar_h_atoms():
    fp = prime(MODEL, F)
    r = alg.res(2.0, F)
    assert normal_zero(dv.derivation_bar(alg.cliff(F)) - alg.cliff(fp).scale(1j))
    assert normal_zero(dv.derivation_bar(r) - (r * alg.field(fp) * r).scale(1j))
    assert dv.derivation_bar(alg.unit(MODEL)).is_zero()


@settings(max_examples=60, deadline=None)
@given(words(), words())
def test_graded_leibniz(a, b):
    lhs = dv.superderivation_bar(a * b)
    gamma_a = alg.grade(a)
    rhs = dv.superderivation_bar(a) * b + gamma_a * dv.superderivation_bar(b)
    assert normal_zero(lhs - rhs)


@settings(max_examples=60, deadline=None)
@given(words(), words())
def test_ordinary_leibniz(a, b):
    lhs = dv.derivation_bar(a * b)
    rhs = dv.derivation_bar(a) * b + a * dv.derivation_bar(b)
    assert normal_zero(lhs - rhs)


@settings(max_examples=60, deadline=None)
@given(words(max_len=4))
def test_square_of_superderivation_is_derivation(e):
    sq = dv.superderivation_bar(dv.superderivation_bar(e))
    assert normal_zero(sq - dv.derivation_bar(e))


# -- core superderivation ------------------------------------------------------------


def test_core_zeta_rule():
    fp = prime(MODEL, F)
    r1 = alg.res(1.0, F)
    expected = r1.scale(1j) - 1 - (alg.cliff(F) * alg.cliff(fp) * r1 * r1).scale(1j)
    got = dv.superderivation_core(alg.zeta(F))
    assert normal_zero(got - expected)
    assert alg.classify(got) == C.F0


def test_core_resolvent_rule():
    r = alg.res(3.0, F)
    expected = (alg.cliff(prime(MODEL, F)) * r * r).scale(1j)
    assert normal_zero(dv.superderivation_core(r) - expected)


@pytest.mark.parametrize(
    "A",
    [alg.zeta(F), alg.res(2.0, G), alg.zeta(F) * alg.res(1.0, G), alg.zeta(F) * alg.zeta(G)],
    ids=["zeta", "res", "zeta-res", "zeta-zeta"],
)
def test_core_agrees_with_extended(A):
    assert diff_norm(dv.superderivation_core(A), dv.superderivation_bar(A)) <= 1e-10


@pytest.mark.parametrize(
    "A",
    [alg.zeta(F), alg.res(2.0, G), alg.zeta(F) * alg.res(1.0, G), alg.unit(MODEL)],
    ids=["zeta", "res", "zeta-res", "unit"],
)
def test_conjugate_superderivation_is_hermitian(A):
    assert diff_norm(dv.conjugate_superderivation(A), dv.superderivation_core(A)) <= 1e-10


def test_core_rejects_non_core():
    with pytest.raises(alg.DomainError):
        dv.superderivation_core(alg.cliff(F))
    with pytest.raises(alg.DomainError):
        dv.conjugate_superderivation(alg.field(F))


# -- mollifiers ----------------------------------------------------------------------


def test_mollifier_of_unit_is_one():
    M = dv.mollifier(alg.unit(MODEL), 5.0)
    assert normal_zero(M - 1)


def test_mollifier_of_resolvent():
    A = alg.res(1.0, F)
    fp = prime(MODEL, F)
    M = dv.mollifier(A, 4.0)
    assert alg.classify(M) == C.R0
    # single Clifford argument f' expands in the basis; each basis direction gets one factor
    support = dv.clifford_support(dv.superderivation_bar(A))
    assert support == [i for i in range(4) if abs(fp.coeffs[i]) > 0]
    assert alg.classify(dv.to_core(M * dv.superderivation_core(A))) == C.CORE_A


@pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
def test_mollifier_factors_have_unit_norm(lam):
    # equality needs 0 in the truncated spectrum, i.e. an odd cutoff
    odd = build_rep(MODEL, RepConfig(boson_cutoff=11, safe_margin=3))
    M = dv.mollifier(alg.zeta(F), lam)
    for _, word in M.terms:
        for a in word:
            op = odd.op_resolvent(a.lam, a.vec()) * (1j * lam)
            assert operator_norm(op) == pytest.approx(1.0, abs=1e-9)
            assert operator_norm(REP.op_resolvent(a.lam, a.vec()) * (1j * lam)) <= 1.0 + 1e-12


def test_mollified_derivative_in_core():
    A = alg.zeta(F)
    M = dv.mollifier(A, 3.0)
    MdA = M * dv.superderivation_core(A)
    core = dv.to_core(MdA)
    assert alg.classify(core) == C.CORE_A
    assert diff_norm(core, MdA) <= 1e-10


def test_mollifier_rejects_bad_lambda():
    with pytest.raises(alg.DomainError):
        dv.mollifier(alg.zeta(F), 0.0)
    with pytest.raises(alg.DomainError):
        dv.mollifier(alg.zeta(F), -1.0)


def test_mollified_square_of_unit_vanishes():
    assert normal_zero(dv.mollified_square(alg.unit(MODEL), 2.0))


def test_to_core_rejects_unpaired_clifford():
    with pytest.raises(alg.DomainError):
        dv.to_core(alg.cliff(F))
    with pytest.raises(alg.DomainError):
        dv.to_core(alg.field(F))


def test_mollifier_derivative_bound_scales():
    A = alg.zeta(F)
    b1, b2 = dv.mollifier_derivative_bound(A, 2.0), dv.mollifier_derivative_bound(A, 4.0)
    assert b2 == pytest.approx(b1 / 2)


# -- density net ---------------------------------------------------------------------


def test_density_net_is_core_and_converges():
    B = alg.cliff(F) * alg.res(1.0, G)
    xi = REP.safe_project(REP.strong_apply(alg.res(4.0, G), REP.vacuum()))
    xi /= np.linalg.norm(xi)
    target = REP.strong_apply(B, xi)
    errs = []
    for lam in (8.0, 16.0, 32.0):
        net = dv.density_net(B, lam)
        assert alg.classify(net) == C.CORE_A
        errs.append(np.linalg.norm(REP.strong_apply(net, xi) - target))
    assert errs[0] > errs[1] > errs[2]


def test_density_net_without_clifford_is_unchanged():
    B = alg.res(1.0, G)
    assert diff_norm(dv.density_net(B, 7.0), B) == 0.0


def test_density_net_rejects_fields():
    with pytest.raises(alg.DomainError):
        dv.density_net(alg.field(F), 2.0)


def test_density_factor_bounds():
    assert dv.density_factor_bounds(alg.cliff(F)) == [pytest.approx(np.sqrt(F.coeffs @ F.coeffs / 2))]

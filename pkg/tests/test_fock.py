"""Truncated Fock representation: spectra, resolvents, vacuum and strong action."""

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss
from scipy.integrate import quad

from resolvent_workbench import algebra as alg
from resolvent_workbench.fock import BudgetError, RepConfig, build_rep, ladder, majoranas, operator_norm, save_operators
from resolvent_workbench.space_model import build_canonical_pairs, build_lightray_hermite, sigma, tau


@pytest.fixture(scope="module")
def rep31():
    return build_rep(build_canonical_pairs(1), RepConfig(boson_cutoff=31))


def test_position_spectrum_is_hermite_roots(rep31):
    q = rep31.boson_field([1.0, 0.0])
    ev = np.sort(np.linalg.eigvalsh(q))
    nodes, _ = hermgauss(31)
    assert np.allclose(ev, np.sort(nodes), atol=1e-10)
    assert np.min(np.abs(ev)) <= 1e-12


def _resolvent_integral():
    """``int pi^(-1/2) e^(-x^2) / (i - x) dx`` by adaptive quadrature."""
    w = lambda x: np.exp(-(x**2)) / np.sqrt(np.pi)
    re = quad(lambda x: w(x) * (-x) / (1 + x**2), -np.inf, np.inf, epsabs=1e-13)[0]
    im = quad(lambda x: w(x) * (-1.0) / (1 + x**2), -np.inf, np.inf, epsabs=1e-13)[0]
    return complex(re, im)


def _vacuum_resolvent(d):
    model = build_canonical_pairs(1)
    rep = build_rep(model, RepConfig(boson_cutoff=d))
    return rep.state_expectation(alg.res(1.0, model.vector([1.0, 0.0])))


def test_vacuum_resolvent_is_gauss_hermite_rule():
    # the truncated position matrix turns the vacuum expectation into the d-node rule
    x, w = hermgauss(31)
    rule = np.sum(w / (1j - x)) / np.sqrt(np.pi)
    assert abs(_vacuum_resolvent(31) - rule) <= 1e-12


def test_vacuum_resolvent_converges_to_integral():
    exact = _resolvent_integral()
    errs = [abs(_vacuum_resolvent(d) - exact) for d in (21, 31, 33, 41)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[2] <= 1e-6


@pytest.mark.xfail(strict=True, reason="31-node rule is 1.18e-6 from the integral; 1e-6 is first met at d=33")
def test_vacuum_resolvent_within_1e6_at_d31():
    assert abs(_vacuum_resolvent(31) - _resolvent_integral()) <= 1e-6


def test_resolvent_norm_at_odd_cutoff(rep31):
    n = operator_norm(rep31.op_resolvent(2.0, [1.0, 0.0]))
    assert 0.4999 <= n <= 0.5


@pytest.mark.parametrize("lam", [1.0, 2.0, 10.0, -3.0])
def test_resolvent_norm_bound(rep_canonical, lam):
    assert operator_norm(rep_canonical.op_resolvent(lam, [0.6, -0.8])) <= 1 / abs(lam) + 1e-12


def test_resolvent_solves_shifted_system(rep_hermite):
    f = rep_hermite.model.vector([0.8, 0.6, 0.0, 0.0])
    lam = 1.5
    R = rep_hermite.op_resolvent(lam, f)
    J = rep_hermite.op_field(f)
    I = np.eye(rep_hermite.dim)
    assert np.abs((1j * lam * I - J) @ R - I).max() <= rep_hermite.config.solver_tolerance
    assert np.abs(J @ R - (1j * lam * R - I)).max() <= 1e-10


def test_zero_argument_resolvent(rep_canonical):
    R = rep_canonical.op_resolvent(2.0, [0.0, 0.0])
    assert np.allclose(R, -0.5j * np.eye(rep_canonical.dim))
    assert np.allclose(rep_canonical.evaluate(alg.res(2.0, rep_canonical.model.zero())), R)


def test_resolvent_zero_lambda_rejected(rep_canonical):
    with pytest.raises(ValueError):
        rep_canonical.op_resolvent(0.0, [1.0, 0.0])


def test_hermite_dimension(rep_hermite):
    assert rep_hermite.dim == 576


def test_budget_error_reports_size():
    with pytest.raises(BudgetError, match="4096"):
        build_rep(build_lightray_hermite(4), RepConfig(boson_cutoff=32, dimension_budget=1000))


def test_config_validation():
    with pytest.raises(ValueError):
        RepConfig(boson_cutoff=3)
    with pytest.raises(ValueError):
        RepConfig(boson_cutoff=8, safe_margin=4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_majorana_anticommutators(n):
    gs = majoranas(n)
    for i, a in enumerate(gs):
        for k, b in enumerate(gs):
            target = np.eye(2**n) if i == k else 0
            assert np.abs(a @ b + b @ a - target).max() <= 1e-12


def test_clifford_anticommutator_is_tau(rep_hermite):
    model = rep_hermite.model
    rng = np.random.default_rng(0)
    for _ in range(5):
        f, g = rng.normal(size=4), rng.normal(size=4)
        A, B = rep_hermite.fermion_cliff(f), rep_hermite.fermion_cliff(g)
        assert np.abs(A @ B + B @ A - tau(model, f, g) * np.eye(4)).max() <= 1e-12


def test_clifford_square_and_unit(rep_hermite):
    model = rep_hermite.model
    f = model.vector([0.3, -0.2, 0.9, 0.1])
    op = rep_hermite.evaluate(alg.cliff(f) * alg.cliff(f))
    assert np.allclose(op, tau(model, f, f) / 2 * np.eye(rep_hermite.dim), atol=1e-12)
    assert np.allclose(rep_hermite.evaluate(alg.unit(model)), np.eye(rep_hermite.dim))
    assert rep_hermite.state_expectation(alg.cliff(f) * alg.cliff(f)) == pytest.approx(tau(model, f, f) / 2)
    assert rep_hermite.state_expectation(alg.unit(model)) == pytest.approx(1.0)


def test_ccr_on_low_occupation(rep_hermite):
    model = rep_hermite.model
    f, g = model.vector([0.8, 0.6, 0.0, 0.0]), model.vector([0.0, 0.3, 0.0, 1.0])
    A, B = rep_hermite.op_field(f), rep_hermite.op_field(g)
    comm = A @ B - B @ A - 1j * sigma(model, f, g) * np.eye(rep_hermite.dim)
    rng = np.random.default_rng(2)
    for v in rep_hermite.random_vectors(3, rng):
        v = rep_hermite.safe_project(v, margin=2)
        assert np.linalg.norm(comm @ v) <= 1e-10 * np.linalg.norm(v)


def test_field_leaves_low_levels(rep_canonical):
    v = rep_canonical.op_field([0.4, 0.7]) @ rep_canonical.vacuum()
    occ = rep_canonical.occupations[:, 0]
    high = np.tile(occ > 1, rep_canonical.dim_fermion)
    assert np.abs(v[high]).max() == 0


def test_vacuum_and_safe_projection(rep_canonical):
    v = rep_canonical.vacuum()
    assert np.linalg.norm(v) == 1.0
    assert np.array_equal(rep_canonical.safe_project(v), v)
    with pytest.raises(ValueError):
        rep_canonical.safe_project(v, margin=16)


def test_evaluate_is_star_homomorphism(rep_hermite):
    model = rep_hermite.model
    f, g = model.vector([0.8, 0.6, 0.0, 0.0]), model.vector([0.6, 0.0, 0.8, 0.0])
    a = alg.cliff(f) * alg.res(2.0, g)
    b = alg.zeta(g) + alg.res(-1.0, f).scale(0.5j)
    Ea, Eb = rep_hermite.evaluate(a), rep_hermite.evaluate(b)
    assert np.allclose(rep_hermite.evaluate(a * b), Ea @ Eb, atol=1e-12)
    assert np.allclose(rep_hermite.evaluate(a + b), Ea + Eb, atol=1e-12)
    assert np.allclose(rep_hermite.evaluate(alg.adjoint(a)), Ea.conj().T, atol=1e-12)


def test_strong_apply_matches_evaluate(rep_hermite):
    model = rep_hermite.model
    f, g = model.vector([0.8, 0.6, 0.0, 0.0]), model.vector([0.6, 0.0, 0.8, 0.0])
    e = alg.zeta(f) * alg.res(1.0, g) * alg.cliff(g) + alg.field(f) * alg.res(3.0, f)
    rng = np.random.default_rng(5)
    for v in rep_hermite.random_vectors(2, rng):
        assert np.allclose(rep_hermite.strong_apply(e, v), rep_hermite.evaluate(e) @ v, atol=1e-12)
        assert np.array_equal(rep_hermite.strong_apply(alg.unit(model), v), v)


def test_translate_then_evaluate(rep_hermite):
    model = rep_hermite.model
    f = model.vector([0.8, 0.6, 0.0, 0.0])
    t = 0.3
    lhs = rep_hermite.evaluate(alg.translate(alg.res(1.0, f), t))
    rhs = rep_hermite.op_resolvent(1.0, model.flow_matrix(t) @ f.coeffs)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_state_positive(rep_hermite):
    model = rep_hermite.model
    a = alg.cliff(model.vector([0.2, 0.5, 0.0, 0.1])) * alg.res(1.0, model.vector([1.0, 0.0, 0.0, 0.0]))
    val = rep_hermite.state_expectation(alg.adjoint(a) * a)
    assert val.real >= -1e-14 and abs(val.imag) <= 1e-14


def test_test_vectors_are_safe_and_normalized(rep_hermite):
    vecs = rep_hermite.test_vectors(4, np.random.default_rng(7))
    assert np.array_equal(vecs[0], rep_hermite.vacuum())
    mask = rep_hermite.safe_mask()
    for v in vecs:
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert np.abs(v[~mask]).max() == 0


def test_embed_preserves_amplitudes(rep_canonical):
    big = build_rep(rep_canonical.model, RepConfig(boson_cutoff=32))
    v = rep_canonical.random_vectors(1, np.random.default_rng(3))[0]
    w = rep_canonical.embed(v, big)
    assert np.linalg.norm(w) == pytest.approx(1.0)
    assert np.allclose(w.reshape(2, 32)[:, :16], v.reshape(2, 16))


def test_ladder_and_save(tmp_path):
    a = ladder(5)
    assert np.allclose(np.diag(a.T @ a), np.arange(5))
    save_operators(tmp_path / "ops.npz", a=a)
    assert np.allclose(np.load(tmp_path / "ops.npz")["a"], a)

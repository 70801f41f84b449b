"""Test-function spaces, symplectic form, flow and Darboux frames."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite import hermgauss, hermval

from resolvent_workbench.space_model import (
    ModelError,
    SpaceModel,
    build_canonical_pairs,
    build_lightray_hermite,
    darboux_basis,
    flow,
    generator,
    prime,
    sigma,
    tau,
)


def hermite_function(n, x):
    """Orthonormal Hermite function from physicists' polynomials."""
    c = np.zeros(n + 1)
    c[n] = 1.0
    norm = 1.0 / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    return norm * hermval(x, c) * np.exp(-(x**2) / 2)


def quad_overlap(m, n, h=1e-5, deg=60):
    """``int h_m h_n'`` by Gauss-Hermite quadrature with a central-difference derivative."""
    x, w = hermgauss(deg)
    dn = (hermite_function(n, x + h) - hermite_function(n, x - h)) / (2 * h)
    return float(np.sum(w * np.exp(x**2) * hermite_function(m, x) * dn))


def test_canonical_normalization():
    m = build_canonical_pairs(1)
    assert m.N == 2
    assert sigma(m, [1, 0], [0, 1]) == pytest.approx(1.0)
    assert np.allclose(m.flow_matrix(2 * np.pi), np.eye(2), atol=1e-12)


def test_canonical_two_pairs_block_diagonal():
    m = build_canonical_pairs(2)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert np.allclose(m.sigma_matrix, np.kron(np.eye(2), J))


def test_canonical_prime_and_quarter_turn():
    m = build_canonical_pairs(1)
    assert np.allclose(prime(m, [0.3, -0.7]).coeffs, [-0.7, -0.3])
    g = flow(m, np.pi / 2, [1.0, 0.0])
    assert np.allclose(g.coeffs, m.S @ [1.0, 0.0], atol=1e-12)
    assert np.linalg.norm(g.coeffs) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m,n", [(0, 1), (1, 0), (1, 2), (2, 3), (0, 3)])
def test_hermite_sigma_matches_quadrature(m, n):
    model = build_lightray_hermite(4)
    e = np.eye(4)
    assert sigma(model, e[m], e[n]) == pytest.approx(quad_overlap(m, n), abs=1e-8)


def test_hermite_two_level_values():
    model = build_lightray_hermite(2)
    assert sigma(model, [1, 0], [0, 1]) == pytest.approx(math.sqrt(0.5), abs=1e-7)
    assert sigma(model, [0, 1], [1, 0]) == pytest.approx(-math.sqrt(0.5), abs=1e-7)


def test_hermite_prime_of_ground_state():
    model = build_lightray_hermite(4)
    x = np.linspace(-3, 3, 41)
    h = 1e-5
    fd = (hermite_function(0, x + h) - hermite_function(0, x - h)) / (2 * h)
    c = prime(model, [1, 0, 0, 0]).coeffs
    recon = sum(c[k] * hermite_function(k, x) for k in range(4))
    assert np.allclose(recon, fd, atol=1e-8)
    assert c[1] == pytest.approx(-math.sqrt(0.5))


def test_odd_hermite_rejected():
    with pytest.raises(ModelError, match="degenerate"):
        build_lightray_hermite(3)


def test_dimension_mismatch():
    with pytest.raises(ModelError):
        sigma(build_canonical_pairs(1), [1, 0, 0], [0, 1])


def test_flow_central_difference():
    model = build_lightray_hermite(6)
    f = np.eye(6)[0]
    h = 1e-5
    fd = (flow(model, h, f).coeffs - flow(model, -h, f).coeffs) / (2 * h)
    assert np.linalg.norm(fd - generator(model, f).coeffs) <= 1e-8


@pytest.mark.parametrize("model", [build_canonical_pairs(2), build_lightray_hermite(4), build_lightray_hermite(6)])
def test_structural_invariants(model):
    tS = model.tau_matrix @ model.S
    assert np.abs(tS + tS.T).max() <= 1e-12
    assert np.abs(model.sigma_matrix + model.sigma_matrix.T).max() <= 1e-12


@settings(max_examples=40, deadline=None)
@given(
    s=st.floats(-3, 3),
    t=st.floats(-3, 3),
    f=st.lists(st.floats(-2, 2), min_size=4, max_size=4),
    g=st.lists(st.floats(-2, 2), min_size=4, max_size=4),
)
def test_flow_group_law_and_symplectic(s, t, f, g):
    model = build_lightray_hermite(4)
    lhs = flow(model, s, flow(model, t, f)).coeffs
    assert np.allclose(lhs, flow(model, s + t, f).coeffs, atol=1e-12)
    assert sigma(model, flow(model, t, f), flow(model, t, g)) == pytest.approx(sigma(model, f, g), abs=1e-11)
    assert tau(model, f, g) == pytest.approx(tau(model, g, f))
    assert sigma(model, f, f) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(f=st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_prime_twice_is_S_squared(f):
    model = build_lightray_hermite(4)
    assert np.allclose(prime(model, prime(model, f)).coeffs, model.S @ model.S @ f, atol=1e-12)


def test_prime_of_zero_and_flow_at_zero():
    model = build_lightray_hermite(4)
    assert prime(model, model.zero()).is_zero()
    assert np.array_equal(flow(model, 0.0, [1, 2, 3, 4]).coeffs, [1, 2, 3, 4])


def test_darboux_canonical_identity():
    frame = darboux_basis(build_canonical_pairs(2))
    assert np.allclose(frame.B, np.eye(4))


def test_darboux_hermite_two_scaling():
    model = build_lightray_hermite(2)
    frame = darboux_basis(model)
    assert frame.residual(model) <= 1e-12
    e1, f1 = frame.B[:, 0], frame.B[:, 1]
    assert sigma(model, e1, f1) == pytest.approx(1.0)
    assert abs(f1[1]) == pytest.approx(1 / math.sqrt(0.5))


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_darboux_residual(N):
    model = build_lightray_hermite(N)
    assert darboux_basis(model).residual(model) <= 1e-12


def test_darboux_degenerate_names_subspace():
    S = np.zeros((4, 4))
    S[0, 1], S[1, 0] = -1.0, 1.0
    with pytest.raises(ModelError, match="degenerate"):
        SpaceModel(np.eye(4), S)
    # below tolerance the pairing step fails and reports the remaining span
    with pytest.raises(ModelError, match="degenerate on the subspace"):
        darboux_basis(build_lightray_hermite(4), tol=10.0)


def test_model_json_round_trip():
    model = build_lightray_hermite(4)
    back = SpaceModel.from_json(model.to_json())
    assert back.flavor == model.flavor
    assert np.array_equal(back.S, model.S)


def test_non_antisymmetric_generator_rejected():
    with pytest.raises(ModelError):
        SpaceModel(np.eye(2), np.array([[1.0, 0.0], [0.0, 0.0]]))

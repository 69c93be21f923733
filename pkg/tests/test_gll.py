import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as npoly

from pmlcorner.gll import MAX_DEGREE, gll_rule, lagrange_basis, lagrange_derivative_matrix


def test_two_point_rule_is_trapezoid():
    q = gll_rule(1)
    np.testing.assert_array_equal(q.points, [0.0, 1.0])
    np.testing.assert_allclose(q.weights, [0.5, 0.5], rtol=0, atol=1e-15)


def test_three_point_rule_matches_moment_equations():
    # Oracle: solve sum_i w_i x_i^k = 1/(k+1), k = 0..2, on the nodes {0, 1/2, 1}.
    nodes = np.array([0.0, 0.5, 1.0])
    V = np.vander(nodes, 3, increasing=True).T
    w_oracle = np.linalg.solve(V, 1.0 / np.arange(1, 4))
    np.testing.assert_allclose(w_oracle, [1 / 6, 2 / 3, 1 / 6], atol=1e-15)

    q = gll_rule(2)
    np.testing.assert_allclose(q.points, nodes, atol=1e-15)
    np.testing.assert_allclose(q.weights, w_oracle, atol=1e-15)


def test_six_point_rule_integrates_degree_nine():
    q = gll_rule(5)
    assert q.n_points == 6
    assert abs(q.integrate(q.points**9) - 0.1) <= 1e-12 * 0.1


@pytest.mark.parametrize("r", range(1, 9))
def test_exactness_sweep(r):
    q = gll_rule(r)
    for k in range(2 * r):
        exact = 1.0 / (k + 1)
        assert abs(q.integrate(q.points**k) - exact) <= 1e-12 * exact


@pytest.mark.parametrize("r", [1, 2, 3, 5, 8, 12, MAX_DEGREE])
def test_rule_invariants(r):
    q = gll_rule(r)
    assert q.points[0] == 0.0 and q.points[-1] == 1.0
    assert np.all(np.diff(q.points) > 0)
    assert np.all(q.weights > 0)
    assert abs(q.weights.sum() - 1.0) < 1e-14
    np.testing.assert_allclose(q.points, 1.0 - q.points[::-1], atol=1e-15)
    np.testing.assert_allclose(q.weights, q.weights[::-1], atol=1e-15)
    np.testing.assert_allclose(q.deriv_matrix.sum(axis=1), 0.0, atol=1e-10 * r**2)


def test_gauss_lobatto_is_not_exact_at_degree_2r():
    q = gll_rule(3)
    assert abs(q.integrate(q.points**6) - 1 / 7) > 1e-6


@pytest.mark.parametrize("r", [0, -1, MAX_DEGREE + 1])
def test_rejects_unsupported_degree(r):
    with pytest.raises(ValueError):
        gll_rule(r)


def test_linear_derivative_matrix():
    np.testing.assert_allclose(gll_rule(1).deriv_matrix, [[-1, 1], [-1, 1]], atol=1e-15)


def test_quadratic_differentiation():
    q = gll_rule(2)
    np.testing.assert_allclose(q.deriv_matrix @ q.points**2, 2 * q.points, atol=1e-12)


def test_derivative_matrix_standalone_matches_rule():
    q = gll_rule(4)
    np.testing.assert_array_equal(lagrange_derivative_matrix(q), q.deriv_matrix)


@settings(max_examples=60, deadline=None)
@given(r=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_differentiation_exact_for_degree_r(r, seed):
    coeffs = np.random.default_rng(seed).uniform(-1, 1, r + 1)
    q = gll_rule(r)
    values = npoly.polyval(q.points, coeffs)
    expected = npoly.polyval(q.points, npoly.polyder(coeffs))
    np.testing.assert_allclose(q.deriv_matrix @ values, expected, atol=1e-10)


def test_lagrange_basis_is_cardinal():
    q = gll_rule(4)
    np.testing.assert_allclose(lagrange_basis(q.points, q.points), np.eye(5), atol=1e-14)
    x = np.linspace(0, 1, 17)
    np.testing.assert_allclose(lagrange_basis(q.points, x).sum(axis=1), 1.0, atol=1e-13)

"""Tests for the dense linear algebra layer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from markov_embed import catalog
from markov_embed.errors import (
    InvalidMatrix,
    MatrixError,
    NonRealResult,
    OverflowGuard,
    SpectrumOnClosedNegativeAxis,
)
from markov_embed.linalg import (
    as_real_matrix,
    eigen_decompose,
    expm,
    logm_principal,
    negative_axis_distance,
    op_norm,
    require_real,
)


class TestInputCoercion:
    """Matrix shape and finiteness checks."""

    def test_rejects_non_square(self):
        with pytest.raises(InvalidMatrix):
            as_real_matrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])

    def test_rejects_empty(self):
        with pytest.raises(InvalidMatrix):
            as_real_matrix(np.zeros((0, 0)))

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidMatrix):
            as_real_matrix([[1.0, math.nan], [0.0, 1.0]])

    def test_rejects_text(self):
        with pytest.raises(InvalidMatrix):
            as_real_matrix([["a", "b"], ["c", "d"]])

    def test_invalid_matrix_is_a_value_error(self):
        with pytest.raises(ValueError):
            as_real_matrix([1.0, 2.0])
        assert issubclass(InvalidMatrix, MatrixError)


class TestOpNorm:
    def test_max_absolute_row_sum(self):
        assert op_norm([[1.0, -2.0], [3.0, 4.0]]) == 7.0

    def test_stochastic_matrix_has_norm_one(self, example_one):
        assert op_norm(example_one.values) == pytest.approx(1.0, abs=1e-15)


class TestEigenDecompose:
    """Deterministic ordering and diagnostics."""

    def test_descending_modulus(self):
        decomposition = eigen_decompose(np.diag([0.2, 1.0, 0.5]))
        np.testing.assert_allclose(decomposition.eigenvalues, [1.0, 0.5, 0.2])

    def test_conjugates_ordered_by_argument(self):
        decomposition = eigen_decompose([[0.0, -1.0], [1.0, 0.0]])
        np.testing.assert_allclose(decomposition.eigenvalues, [-1j, 1j], atol=1e-15)

    def test_eigenpairs(self, example_one):
        decomposition = eigen_decompose(example_one.values)
        np.testing.assert_allclose(
            decomposition.eigenvalues, catalog.EXAMPLE_ONE_EIGENVALUES, atol=1e-12
        )
        assert decomposition.residual < 1e-12
        assert decomposition.is_distinct

    def test_repeated_eigenvalues_flagged(self):
        decomposition = eigen_decompose(np.eye(3))
        assert not decomposition.is_distinct
        assert decomposition.min_gap == 0.0

    def test_one_by_one(self):
        decomposition = eigen_decompose([[0.5]])
        assert decomposition.is_distinct
        assert decomposition.n == 1

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_spectrum_invariant_under_relabeling(self, seed):
        rng = np.random.default_rng(seed)
        A = catalog.twogen_matrix().values
        P = rng.permutation(np.eye(3))
        key = lambda z: (round(z.real, 9), round(z.imag, 9))
        before = sorted(eigen_decompose(A).eigenvalues, key=key)
        after = sorted(eigen_decompose(P @ A @ P.T).eigenvalues, key=key)
        np.testing.assert_allclose(after, before, atol=1e-12)


class TestExpm:
    def test_zero_gives_identity(self):
        np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(expm(np.diag([0.0, -1.0])), np.diag([1.0, math.exp(-1.0)]))

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuard):
            expm(2e4 * np.eye(2))

    def test_generator_gives_stochastic(self):
        A = expm(catalog.cyclic_generator(4, 1.5).values)
        assert A.min() >= 0
        np.testing.assert_allclose(A.sum(axis=1), 1.0, atol=1e-14)

    @given(
        arrays(
            np.float64,
            st.integers(min_value=2, max_value=6).map(lambda n: (n, n)),
            elements=st.floats(min_value=-0.5, max_value=0.5),
        )
    )
    @settings(deadline=None, max_examples=60)
    def test_determinant_is_exp_trace(self, M):
        assert np.linalg.det(expm(M)) == pytest.approx(math.exp(np.trace(M)), rel=1e-9)


class TestRequireReal:
    def test_drops_small_residue(self):
        result = require_real(np.array([[1.0 + 1e-14j]]), 1e-8, "test")
        assert result.dtype == np.float64
        assert result[0, 0] == 1.0

    def test_rejects_large_residue(self):
        with pytest.raises(NonRealResult):
            require_real(np.array([[1.0 + 1e-3j]]), 1e-8, "test")


class TestLogmPrincipal:
    """Principal logarithm through the eigenvector route and its guards."""

    def test_identity(self):
        np.testing.assert_allclose(logm_principal(np.eye(4)), np.zeros((4, 4)), atol=1e-15)

    def test_example_one_matches_printed_log(self, example_one):
        L = logm_principal(example_one.values)
        np.testing.assert_allclose(L, catalog.EXAMPLE_ONE_LOG, atol=catalog.PRINTED_PRECISION)
        np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-12)

    def test_rotation_inside_strip(self):
        theta = 2.5
        R = np.array([[0.0, -theta], [theta, 0.0]])
        np.testing.assert_allclose(logm_principal(expm(R)), R, atol=1e-12)

    def test_rotation_outside_strip_wraps(self):
        theta = 4.0
        R = np.array([[0.0, -theta], [theta, 0.0]])
        wrapped = (theta - 2 * math.pi) / theta * R
        np.testing.assert_allclose(logm_principal(expm(R)), wrapped, atol=1e-12)

    def test_negative_spectrum_raises(self, negative_spectrum):
        with pytest.raises(SpectrumOnClosedNegativeAxis) as excinfo:
            logm_principal(negative_spectrum.values)
        assert excinfo.value.eigenvalue.real < 0

    def test_zero_eigenvalue_raises(self):
        with pytest.raises(SpectrumOnClosedNegativeAxis):
            logm_principal([[0.5, 0.5], [0.5, 0.5]])

    def test_defective_matrix_uses_schur_route(self):
        N = np.array([[0.0, 0.3], [0.0, 0.0]])
        np.testing.assert_allclose(logm_principal(expm(N)), N, atol=1e-10)

    @given(
        arrays(
            np.float64,
            st.integers(min_value=3, max_value=5).map(lambda n: (n, n)),
            elements=st.floats(min_value=0.0, max_value=0.3),
        )
    )
    @settings(deadline=None, max_examples=60)
    def test_generator_round_trip(self, rates):
        np.fill_diagonal(rates, 0.0)
        np.fill_diagonal(rates, -rates.sum(axis=1))
        L = logm_principal(expm(rates))
        assert op_norm(L - rates) < 1e-6


class TestNegativeAxisDistance:
    def test_positive_real(self):
        assert negative_axis_distance(2.0 + 0j) == 2.0

    def test_left_half_plane(self):
        assert negative_axis_distance(complex(-1.0, 0.25)) == 0.25

    def test_on_axis(self):
        assert negative_axis_distance(complex(-0.5, 0.0)) == 0.0

"""End-to-end reproduction of the worked examples and the randomized sweeps."""

import itertools
import math

import numpy as np
import pytest
from click.testing import CliRunner

from markov_embed import catalog
from markov_embed.checks import CheckResult, RunnenbergCheck, run_battery
from markov_embed.errors import SpectrumOnClosedNegativeAxis
from markov_embed.linalg import eigen_decompose, expm, logm_principal, op_norm
from markov_embed.main import cli
from markov_embed.matrices import validate_generator, validate_row_zero, validate_stochastic
from markov_embed.regularization import (
    decompose_row,
    diagonal_adjust,
    optimality_gap,
    regularize,
)
from markov_embed.search import (
    ExhaustedEnumeration,
    UniquenessCertificate,
    VerdictStatus,
    decide_embeddable,
    enumerate_branches,
    uniqueness_certificate,
)
from markov_embed.sweep import error_bound_sweep, soundness_sweep


def row_lp_minimum(row: np.ndarray, i: int) -> float:
    """
    min sum_j |l_j - g_j| over g_j >= 0 (j != i), sum_j g_j = 0, by vertex enumeration.

    With g_i = -sum_{j != i} g_j eliminated the objective is
    |sum_j (g_j - l_j)| + sum_j |g_j - l_j| over the off-diagonal g >= 0.
    Its minimum sits at a vertex of the arrangement g_j in {0, max(l_j, 0)}
    plus at most one coordinate fixed by sum_j (g_j - l_j) = 0.
    """
    others = [j for j in range(len(row)) if j != i]
    l = row[others]
    breakpoints = [sorted({0.0, max(x, 0.0)}) for x in l]

    def objective(g: np.ndarray) -> float:
        return abs(float(np.sum(g - l))) + float(np.sum(np.abs(g - l)))

    best = math.inf
    for choice in itertools.product(*breakpoints):
        g = np.array(choice)
        best = min(best, objective(g))
        for k in range(len(l)):
            free = float(np.sum(l) - (np.sum(g) - g[k]))
            if free >= 0.0:
                h = g.copy()
                h[k] = free
                best = min(best, objective(h))
    return best


def random_row_zero(rng: np.random.Generator):
    n = int(rng.integers(2, 7))
    values = rng.uniform(-1.0, 1.0, size=(n, n))
    np.fill_diagonal(values, 0.0)
    np.fill_diagonal(values, -values.sum(axis=1))
    return validate_row_zero(values)


class TestExampleOne:
    """Printed logarithm, regularization and verdict of the 3x3 example."""

    def test_reproduction(self, example_one):
        L = logm_principal(example_one.values)
        np.testing.assert_allclose(L, catalog.EXAMPLE_ONE_LOG, atol=catalog.PRINTED_PRECISION)

        result = regularize(example_one)
        np.testing.assert_allclose(
            result.B.values, catalog.EXAMPLE_ONE_GENERATOR, atol=catalog.PRINTED_PRECISION
        )
        np.testing.assert_allclose(
            result.regularized, catalog.EXAMPLE_ONE_REGULARIZED, atol=catalog.PRINTED_PRECISION
        )
        deviation = np.abs(example_one.values - result.regularized).max()
        assert deviation < catalog.EXAMPLE_ONE_MAX_DEVIATION

    def test_verdict(self, example_one):
        verdict = decide_embeddable(example_one)
        assert verdict.status == VerdictStatus.NOT_EMBEDDABLE
        assert isinstance(verdict.certificate, ExhaustedEnumeration)
        assert uniqueness_certificate(example_one) == UniquenessCertificate.UNIQUE_PRINCIPAL
        assert np.linalg.det(example_one.values) == pytest.approx(0.0512, abs=1e-12)
        assert 0.0512 > math.exp(-math.pi)


class TestLsFamily:
    def test_sigma(self):
        sigma = catalog.sigma_bisect(1e-4)
        assert -0.5722 <= sigma <= -0.5702

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
    def test_embeddable(self, s):
        assert decide_embeddable(catalog.ls_matrix(s)).status == VerdictStatus.EMBEDDABLE

    @pytest.mark.parametrize("s", [-0.1, -0.3, -0.5])
    def test_stochastic_but_not_embeddable(self, s):
        A = catalog.ls_matrix(s)
        verdict = decide_embeddable(A)
        assert verdict.status == VerdictStatus.NOT_EMBEDDABLE
        spectral = isinstance(verdict.certificate, ExhaustedEnumeration) or (
            isinstance(verdict.certificate, CheckResult)
            and verdict.certificate.name == RunnenbergCheck.name
        )
        assert spectral


class TestTwoGenerators:
    def test_both_branches(self, twogen):
        B = catalog.cyclic_generator(3, 4.0).values
        branches = enumerate_branches(twogen)
        assert len(branches) == 2
        assert all(b.is_generator for b in branches)

        principal = [b for b in branches if b.is_principal]
        other = [b for b in branches if not b.is_principal]
        assert len(principal) == 1 and len(other) == 1
        np.testing.assert_allclose(other[0].generator.values, B, atol=1e-6)

        printed = np.array(catalog.TWOGEN_PRINCIPAL_OFFDIAGONALS)
        for entry in principal[0].generator.values[~np.eye(3, dtype=bool)]:
            assert np.abs(printed - entry).min() < catalog.PRINTED_PRECISION


class TestCyclicFive:
    def test_eigenvalues(self):
        B = catalog.cyclic_generator(5, 4.0)
        key = lambda z: (round(z.real, 3), round(z.imag, 3))
        found = sorted(eigen_decompose(B.values).eigenvalues, key=key)
        expected = sorted(catalog.CYCLIC_FIVE_EIGENVALUES, key=key)
        found, expected = np.array(found), np.array(expected)
        # printed to four decimals in each coordinate
        np.testing.assert_allclose(found.real, expected.real, atol=catalog.PRINTED_PRECISION)
        np.testing.assert_allclose(found.imag, expected.imag, atol=catalog.PRINTED_PRECISION)

    def test_principal_log_not_a_generator(self, cyclic_five):
        L = logm_principal(cyclic_five.values)
        assert L[~np.eye(5, dtype=bool)].min() < 0

    def test_embeddable_with_original_generator(self, cyclic_five):
        verdict = decide_embeddable(cyclic_five)
        assert verdict.status == VerdictStatus.EMBEDDABLE
        np.testing.assert_allclose(
            verdict.witness.values, catalog.cyclic_generator(5, 4.0).values, atol=1e-6
        )

    @pytest.mark.parametrize("c", [5.0, 5.5])
    def test_embeddable_at_larger_rates(self, c):
        B = catalog.cyclic_generator(5, c).values
        verdict = decide_embeddable(validate_stochastic(expm(B)))
        assert verdict.status == VerdictStatus.EMBEDDABLE
        assert any(op_norm(g.generator.values - B) < 1e-6 for g in verdict.generators)

    def test_tiny_determinant_passes_battery(self):
        # det = exp(-30), smallest |lambda| near 2e-5
        A = validate_stochastic(expm(catalog.cyclic_generator(5, 6.0).values))
        results = run_battery(A)
        assert all(r.passed for r in results)
        det_range = next(r for r in results if r.name == "det_range")
        assert det_range.margin == pytest.approx(30.0, abs=1e-6)


class TestNegativeSpectrumGuard:
    def test_principal_log_refused(self, negative_spectrum):
        with pytest.raises(SpectrumOnClosedNegativeAxis):
            logm_principal(negative_spectrum.values)

    def test_cli_inconclusive(self, matrix_file, negative_spectrum):
        path = matrix_file("negative.csv", negative_spectrum.values)
        result = CliRunner().invoke(cli, ["--quiet", "analyze", str(path)])
        assert result.exit_code == 3


class TestOptimality:
    """Diagonal adjustment against an independent per-row linear program."""

    def test_row_lp_oracle(self):
        rng = np.random.default_rng(20)
        for _ in range(200):
            L = random_row_zero(rng)
            for i in range(L.n):
                expected = decompose_row(L, i).cost
                assert row_lp_minimum(L.values[i], i) == pytest.approx(expected, abs=1e-9)
            costs = [decompose_row(L, i).cost for i in range(L.n)]
            assert op_norm(L.values - diagonal_adjust(L).values) == pytest.approx(max(costs))

    def test_no_generator_is_closer(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            L = random_row_zero(rng)
            off = rng.uniform(0.0, 1.0, size=(L.n, L.n))
            np.fill_diagonal(off, 0.0)
            np.fill_diagonal(off, -off.sum(axis=1))
            assert optimality_gap(L, validate_generator(off)) >= -1e-12


class TestSweeps:
    def test_soundness(self):
        result = soundness_sweep(1000, seed=0)
        assert result.count == 1000
        assert result.battery_rate == 1.0, result.failures
        assert result.embeddable_rate == 1.0, result.failures
        assert result.max_round_trip < 1e-6

    def test_error_bound(self, example_one):
        result = error_bound_sweep(1000, seed=0)
        assert result.violations == 0
        assert result.regularized > 0

        fixture = regularize(example_one)
        print(
            f"tightest bound/actual over sweep: {result.tightest_ratio:.3g}; "
            f"example-one: {fixture.exp_error_bound / fixture.exp_error_actual:.3g}"
        )


"""
Randomized soundness sweeps over seeded Markov generators.

Every matrix exp(tB) of a generator B is embeddable, so the battery must
pass on all of them and the decision procedure must find a witness. The
battery also runs on sparse generators with rates of several units at
several times t, where det(A) and some eigenvalues fall far below the
entry tolerance. The
perturbed sweep mixes exp(B) with a random permutation matrix and compares the
regularization error with its bound.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import structlog

from markov_embed.checks import run_battery
from markov_embed.config import DEFAULT_SEARCH, DEFAULT_TOLERANCES, SearchConfig, Tolerances
from markov_embed.errors import EmbeddingError
from markov_embed.linalg import eigen_decompose, expm, logm_principal, op_norm
from markov_embed.matrices import (
    GeneratorMatrix,
    StochasticMatrix,
    validate_generator,
    validate_stochastic,
)
from markov_embed.regularization import regularize
from markov_embed.search import VerdictStatus, decide_embeddable

logger = structlog.get_logger()

DIMENSIONS = (3, 4, 5, 6, 7, 8)
RATE_RANGE = (0.05, 0.5)
WIDE_RATE_RANGE = (0.1, 4.0)
WEIGHT_RANGE = (0.1, 1.0)
SPARSE_DENSITY = 0.6
BATTERY_TIMES = (0.1, 1.0, 5.0)
ROUND_TRIP_LIMIT = 1e-6
BOUND_SLACK = 1e-9


def random_generator(
    rng: np.random.Generator,
    n: int,
    rates: tuple[float, float] = RATE_RANGE,
    density: float = 1.0,
) -> GeneratorMatrix:
    """
    Generator with exit rate q_i ~ U(rates) spread over the other states.

    With density < 1 each off-diagonal entry is kept with that probability,
    at least one per row. The default rates keep the spectrum in the disc
    |z| <= 2 max q_i <= 1 by Gershgorin, well inside the strip |Im z| < pi.
    """
    weights = rng.uniform(*WEIGHT_RANGE, size=(n, n))
    np.fill_diagonal(weights, 0.0)
    if density < 1.0:
        keep = rng.random(size=(n, n)) < density
        np.fill_diagonal(keep, False)
        for i in np.flatnonzero(~keep.any(axis=1)):
            j = int(rng.integers(n - 1))
            keep[i, j if j < i else j + 1] = True
        weights *= keep
    weights /= weights.sum(axis=1, keepdims=True)
    exit_rates = rng.uniform(*rates, size=n)
    values = weights * exit_rates[:, None]
    np.fill_diagonal(values, -exit_rates)
    return validate_generator(values)


def random_permutation(rng: np.random.Generator, n: int) -> StochasticMatrix:
    return validate_stochastic(rng.permutation(np.eye(n)))


@dataclass
class SweepResult:
    """Counts from the generator sweep; rates are over the relevant subsets."""

    count: int = 0
    strip_contained: int = 0
    battery_checked: int = 0
    battery_passed: int = 0
    distinct: int = 0
    embeddable_distinct: int = 0
    max_round_trip: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def battery_rate(self) -> float:
        return self.battery_passed / self.battery_checked if self.battery_checked else 1.0

    @property
    def embeddable_rate(self) -> float:
        return self.embeddable_distinct / self.distinct if self.distinct else 1.0

    @property
    def ok(self) -> bool:
        return (
            self.battery_rate == 1.0
            and self.embeddable_rate == 1.0
            and self.max_round_trip < ROUND_TRIP_LIMIT
        )


@dataclass
class ErrorBoundResult:
    """Regularization error against min{2, e^eps - 1} on perturbed matrices."""

    count: int = 0
    regularized: int = 0  # eps > 0
    skipped: int = 0  # no real principal logarithm
    violations: int = 0
    tightest_ratio: float = math.inf  # min bound / actual over eps > 0


def _record_battery(
    A: StochasticMatrix,
    tol: Tolerances,
    result: SweepResult,
    label: str,
) -> None:
    battery = run_battery(A, tol)
    result.battery_checked += 1
    if all(r.passed for r in battery):
        result.battery_passed += 1
    else:
        failed = [r.name for r in battery if not r.passed]
        result.failures.append(f"{label}: battery failed {failed}")


def soundness_sweep(
    count: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    search: SearchConfig = DEFAULT_SEARCH,
    times: tuple[float, ...] = BATTERY_TIMES,
) -> SweepResult:
    """
    Battery, verdict and log/exp round trip on exp(B) for random generators B,
    plus the battery on exp(tW) for a sparse wide-rate generator W at each t.
    """
    rng = np.random.default_rng(seed)
    result = SweepResult()

    for index in range(count):
        n = int(rng.choice(DIMENSIONS))
        B = random_generator(rng, n)
        W = random_generator(rng, n, rates=WIDE_RATE_RANGE, density=SPARSE_DENSITY)
        result.count += 1

        for t in times:
            A_t = validate_stochastic(expm(t * W.values), tol)
            _record_battery(A_t, tol, result, f"#{index} n={n} sparse t={t:g}")

        if np.any(np.abs(eigen_decompose(B.values, tol).eigenvalues.imag) >= math.pi):
            continue
        result.strip_contained += 1

        A = validate_stochastic(expm(B.values), tol)
        _record_battery(A, tol, result, f"#{index} n={n}")

        try:
            round_trip = op_norm(logm_principal(A.values, tol) - B.values)
        except EmbeddingError as e:
            result.failures.append(f"#{index} n={n}: principal log failed: {e}")
            round_trip = math.inf
        result.max_round_trip = max(result.max_round_trip, round_trip)

        if eigen_decompose(A.values, tol).is_distinct:
            result.distinct += 1
            verdict = decide_embeddable(A, tol, search)
            if verdict.status == VerdictStatus.EMBEDDABLE:
                result.embeddable_distinct += 1
            else:
                result.failures.append(f"#{index} n={n}: verdict {verdict.status.value}")

    logger.info(
        "Soundness sweep finished",
        count=result.count,
        battery_rate=result.battery_rate,
        embeddable_rate=result.embeddable_rate,
        max_round_trip=result.max_round_trip,
    )
    return result


def error_bound_sweep(
    count: int,
    seed: int,
    mix: float = 0.3,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ErrorBoundResult:
    """Regularize (1 - mix) exp(B) + mix P, P a random permutation, against the error bound."""
    rng = np.random.default_rng(seed)
    result = ErrorBoundResult()

    for _ in range(count):
        n = int(rng.choice(DIMENSIONS))
        B = random_generator(rng, n)
        R = random_permutation(rng, n)
        A = validate_stochastic((1.0 - mix) * expm(B.values) + mix * R.values, tol)
        result.count += 1

        try:
            outcome = regularize(A, tol)
        except EmbeddingError:
            result.skipped += 1
            continue

        if outcome.exp_error_actual > outcome.exp_error_bound + BOUND_SLACK:
            result.violations += 1
            logger.warning(
                "Exponential error bound violated",
                n=n,
                epsilon=outcome.epsilon,
                actual=outcome.exp_error_actual,
                bound=outcome.exp_error_bound,
            )
        if outcome.epsilon > 0:
            result.regularized += 1
            if outcome.exp_error_actual > 0:
                result.tightest_ratio = min(
                    result.tightest_ratio, outcome.exp_error_bound / outcome.exp_error_actual
                )

    logger.info(
        "Error bound sweep finished",
        count=result.count,
        regularized=result.regularized,
        skipped=result.skipped,
        violations=result.violations,
        tightest_ratio=result.tightest_ratio,
    )
    return result

"""
Reference matrices with known embeddability behaviour.

Exact constructors for the worked examples, plus the printed four-decimal
values they are compared against. The printed matrices are comparison
targets, never inputs.
"""

import math
from typing import Callable

import numpy as np
import structlog

from markov_embed.linalg import expm
from markov_embed.matrices import (
    GeneratorMatrix,
    RowZeroMatrix,
    StochasticMatrix,
    validate_generator,
    validate_row_zero,
    validate_stochastic,
)

logger = structlog.get_logger()

# Printed values carry four decimals.
PRINTED_PRECISION = 5e-5

EXAMPLE_ONE_EIGENVALUES = (1.0, 0.32, 0.16)

EXAMPLE_ONE_LOG = np.array([
    [-1.5272, 0.5991, 0.9281],
    [0.3054, -0.2371, -0.0683],
    [0.3054, 0.9023, -1.2078],
])

EXAMPLE_ONE_GENERATOR = np.array([
    [-1.5272, 0.5991, 0.9281],
    [0.3054, -0.3054, 0.0],
    [0.3054, 0.9023, -1.2078],
])

EXAMPLE_ONE_REGULARIZED = np.array([
    [0.3000, 0.4383, 0.2617],
    [0.1400, 0.8046, 0.0554],
    [0.1400, 0.5057, 0.3543],
])

EXAMPLE_ONE_MAX_DEVIATION = 0.036

TWOGEN_ROUNDED = np.array([
    [0.3318, 0.3337, 0.3346],
    [0.3346, 0.3318, 0.3337],
    [0.3337, 0.3346, 0.3318],
])

TWOGEN_PRINCIPAL_OFFDIAGONALS = (0.3724, 3.6276)

CYCLIC_FIVE_EIGENVALUES = (
    0.0,
    complex(-7.2361, 2.3511),
    complex(-7.2361, -2.3511),
    complex(-2.7639, 3.8042),
    complex(-2.7639, -3.8042),
)

NEGATIVE_SPECTRUM_RATE = 2.0 * math.pi / math.sqrt(3.0)

SIGMA_APPROX = -0.5712
SIGMA_BRACKET = (-1.0, 0.0)
SIGMA_MAX_ITERATIONS = 80


def example_one() -> StochasticMatrix:
    """3x3 Markov matrix with eigenvalues 1, 0.32, 0.16 whose log is not a generator."""
    return validate_stochastic([
        [0.30, 0.45, 0.25],
        [0.14, 0.84, 0.02],
        [0.14, 0.52, 0.34],
    ])


def two_state_example() -> StochasticMatrix:
    """Symmetric 2x2 Markov matrix with spectrum {1, -1/3}."""
    return validate_stochastic([
        [1.0 / 3.0, 2.0 / 3.0],
        [2.0 / 3.0, 1.0 / 3.0],
    ])


def l_s(s: float) -> RowZeroMatrix:
    """Circulant row-zero matrix with rows (-1-s, 1, s) shifted cyclically."""
    d = -(1.0 + s)
    return validate_row_zero([
        [d, 1.0, s],
        [s, d, 1.0],
        [1.0, s, d],
    ])


def l_s_spectrum(s: float) -> tuple[complex, complex, complex]:
    """Closed-form spectrum {0, -3(1+s)/2 +- sqrt(3)(1-s)i/2}."""
    re = -1.5 * (1.0 + s)
    im = math.sqrt(3.0) * (1.0 - s) / 2.0
    return 0j, complex(re, im), complex(re, -im)


def ls_matrix(s: float) -> StochasticMatrix:
    """exp(L_s); stochastic for s >= sigma, embeddable for s >= 0."""
    return validate_stochastic(expm(l_s(s).values))


def sigma_predicate(s: float) -> bool:
    """exp(L_s) has no negative entry (exact sign, no tolerance)."""
    return bool(expm(l_s(s).values).min() >= 0.0)


def sigma_bisect(tol: float) -> float:
    """
    Smallest s for which exp(L_s) is non-negative, to within tol.

    The admissible set is an interval [sigma, inf) with sigma in [-1, 0];
    the returned value always satisfies the predicate.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")

    lo, hi = SIGMA_BRACKET
    if not sigma_predicate(hi) or sigma_predicate(lo):
        raise RuntimeError("sigma bracket does not straddle the boundary")

    for iteration in range(SIGMA_MAX_ITERATIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if sigma_predicate(mid):
            hi = mid
        else:
            lo = mid

    logger.debug("Sigma bisection finished", sigma=hi, width=hi - lo, iterations=iteration)
    return hi


def cyclic_generator(n: int, c: float) -> GeneratorMatrix:
    """c (P - I) with P the cyclic shift e_r -> e_{r+1 mod n}."""
    if n < 2:
        raise ValueError(f"cyclic generator needs n >= 2, got {n}")
    if c <= 0:
        raise ValueError(f"cyclic rate must be positive, got {c}")
    identity = np.eye(n)
    return validate_generator(c * (np.roll(identity, 1, axis=1) - identity))


def twogen_matrix() -> StochasticMatrix:
    """exp of the 3x3 cyclic generator with c = 4; it has two generators."""
    return validate_stochastic(expm(cyclic_generator(3, 4.0).values))


def negative_spectrum_matrix() -> StochasticMatrix:
    """exp of the 3x3 cyclic generator with c = 2 pi / sqrt 3; double negative eigenvalue."""
    return validate_stochastic(expm(cyclic_generator(3, NEGATIVE_SPECTRUM_RATE).values))


def cyclic_five_matrix() -> StochasticMatrix:
    """exp of the 5x5 cyclic generator with c = 4; principal log is not a generator."""
    return validate_stochastic(expm(cyclic_generator(5, 4.0).values))


FIXTURES: dict[str, Callable[..., StochasticMatrix]] = {
    "example-one": example_one,
    "two-state": two_state_example,
    "twogen": twogen_matrix,
    "negative-spectrum": negative_spectrum_matrix,
    "cyclic-five": cyclic_five_matrix,
    "l-s": ls_matrix,
}


def get_fixture(name: str, s: float = 0.0) -> StochasticMatrix:
    """Look up a catalog matrix by name; ``s`` parametrizes the l-s family."""
    key = name.lower().strip()
    if key not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    if key == "l-s":
        return FIXTURES[key](s)
    return FIXTURES[key]()

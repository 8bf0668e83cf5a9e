"""
Diagonal adjustment: the closest Markov generator to a row-zero matrix.

In the infinity operator norm the distance splits into independent row
costs. For row i with positive off-diagonal mass l_P and negative mass
l_N, zeroing the negative entries and moving the diagonal to -l_P costs
exactly 2 l_N, and no generator does better.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from markov_embed.config import DEFAULT_TOLERANCES, Tolerances
from markov_embed.linalg import RealMatrix, expm, logm_principal, op_norm
from markov_embed.matrices import (
    GeneratorMatrix,
    RowZeroMatrix,
    StochasticMatrix,
    validate_generator,
    validate_row_zero,
)

logger = structlog.get_logger()


@dataclass(frozen=True)
class RowDecomposition:
    """Split of one row of L into kept (P) and zeroed (N) off-diagonal entries."""

    row_index: int
    l: tuple[float, ...]
    P: tuple[int, ...]
    N: tuple[int, ...]
    l_P: float
    l_N: float

    @property
    def cost(self) -> float:
        """1-norm distance from the row to its diagonal adjustment."""
        return 2.0 * self.l_N


@dataclass(frozen=True, eq=False)
class RegularizationResult:
    L: RowZeroMatrix
    B: GeneratorMatrix
    epsilon: float
    regularized: RealMatrix  # expm(B)
    exp_error_actual: Optional[float]
    exp_error_bound: float
    loose_bound: float

    @property
    def is_exact(self) -> bool:
        return self.epsilon == 0.0


def decompose_row(L: RowZeroMatrix, i: int) -> RowDecomposition:
    row = L.values[i]
    others = [j for j in range(L.n) if j != i]
    # l_j = 0 counts as kept
    P = tuple(j for j in others if row[j] >= 0)
    N = tuple(j for j in others if row[j] < 0)
    return RowDecomposition(
        row_index=i,
        l=tuple(float(x) for x in row),
        P=P,
        N=N,
        l_P=float(sum(row[j] for j in P)),
        l_N=float(-sum(row[j] for j in N)),
    )


def diagonal_adjust(L: RowZeroMatrix, tol: Tolerances = DEFAULT_TOLERANCES) -> GeneratorMatrix:
    """Zero the negative off-diagonal entries of L and repair the diagonal."""
    n = L.n
    off = ~np.eye(n, dtype=bool)
    values = np.where(off, np.maximum(L.values, 0.0), 0.0)
    np.fill_diagonal(values, -values.sum(axis=1))
    return validate_generator(values, tol)


def optimality_gap(L: RowZeroMatrix, G: GeneratorMatrix) -> float:
    """op_norm(L - G) minus the diagonal-adjustment distance; never negative."""
    return op_norm(L.values - G.values) - op_norm(L.values - diagonal_adjust(L).values)


def exp_error_bound(epsilon: float) -> float:
    """Bound on op_norm(A - expm(B)) when op_norm(log(A) - B) = epsilon."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    return min(2.0, math.expm1(epsilon))


def loose_exp_error_bound(epsilon: float) -> float:
    """min{2, 2 epsilon}; dominates exp_error_bound for epsilon <= ln 3."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    return min(2.0, 2.0 * epsilon)


def regularize_logarithm(
    L: RowZeroMatrix,
    A: Optional[StochasticMatrix] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RegularizationResult:
    """Project L onto the generator cone and report the exponential error."""
    B = diagonal_adjust(L, tol)
    epsilon = op_norm(L.values - B.values)
    row_costs = max(decompose_row(L, i).cost for i in range(L.n))
    if not math.isclose(epsilon, row_costs, rel_tol=1e-9, abs_tol=1e-14):
        logger.warning("Row cost mismatch", epsilon=epsilon, row_costs=row_costs)

    regularized = expm(B.values)
    actual = op_norm(A.values - regularized) if A is not None else None
    bound = exp_error_bound(epsilon)

    logger.debug(
        "Regularized",
        n=L.n,
        epsilon=epsilon,
        exp_error_actual=actual,
        exp_error_bound=bound,
    )
    return RegularizationResult(
        L=L,
        B=B,
        epsilon=epsilon,
        regularized=regularized,
        exp_error_actual=actual,
        exp_error_bound=bound,
        loose_bound=loose_exp_error_bound(epsilon),
    )


def regularize(A: StochasticMatrix, tol: Tolerances = DEFAULT_TOLERANCES) -> RegularizationResult:
    """Principal logarithm, diagonal adjustment, exponential."""
    L = validate_row_zero(logm_principal(A.values, tol), tol)
    return regularize_logarithm(L, A, tol)

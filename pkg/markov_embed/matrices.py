"""Validated stochastic, row-zero and generator matrices."""

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import structlog

from markov_embed.config import DEFAULT_TOLERANCES, Tolerances
from markov_embed.errors import NotGenerator, NotRowZero, NotStochastic
from markov_embed.linalg import RealMatrix, as_real_matrix, expm

logger = structlog.get_logger()

# Rows already exact up to accumulated rounding are left untouched, which
# keeps every validator idempotent.
_ROUNDING = 4 * np.finfo(np.float64).eps


def _frozen(values: RealMatrix) -> RealMatrix:
    values = np.array(values, dtype=np.float64)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class _ValidatedMatrix:
    values: RealMatrix
    row_repairs: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if not self.row_repairs:
            object.__setattr__(self, "row_repairs", (0.0,) * self.n)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def max_repair(self) -> float:
        return max(self.row_repairs, default=0.0)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class StochasticMatrix(_ValidatedMatrix):
    """Non-negative entries, unit row sums."""


@dataclass(frozen=True, eq=False)
class RowZeroMatrix(_ValidatedMatrix):
    """Real square matrix whose rows sum to zero."""


@dataclass(frozen=True, eq=False)
class GeneratorMatrix(RowZeroMatrix):
    """Row-zero matrix with non-negative off-diagonal entries."""

    @property
    def delta(self) -> float:
        """Largest exit rate, max_i |B_ii|."""
        return float(np.abs(np.diag(self.values)).max())

    @property
    def jump_part(self) -> RealMatrix:
        """C in B = C - delta*I; every entry of C is non-negative."""
        return self.values + self.delta * np.eye(self.n)


def _off_diagonal(n: int) -> npt.NDArray[np.bool_]:
    return ~np.eye(n, dtype=bool)


def validate_stochastic(
    raw: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> StochasticMatrix:
    """
    Accept a Markov matrix up to rounding noise.

    Entries down to -tol.entry are clamped to zero and rows within
    tol.row_sum of one are rescaled; anything worse raises NotStochastic.
    No entry moves by more than tol.row_sum + tol.entry.
    """
    original = as_real_matrix(raw)
    n = original.shape[0]

    negative = np.argwhere(original < -tol.entry)
    if negative.size:
        i, j = (int(x) for x in negative[0])
        raise NotStochastic(
            f"entry ({i}, {j}) = {original[i, j]:.6g} is negative",
            {"row": i, "column": j, "value": float(original[i, j])},
        )

    values = np.maximum(original, 0.0)
    sums = values.sum(axis=1)
    for i in range(n):
        if abs(sums[i] - 1.0) > tol.row_sum:
            raise NotStochastic(
                f"row {i} sums to {sums[i]:.12g}",
                {"row": i, "row_sum": float(sums[i])},
            )
        if abs(sums[i] - 1.0) > n * _ROUNDING:
            values[i] /= sums[i]

    repairs = tuple(float(x) for x in np.abs(values - original).max(axis=1))
    if max(repairs) > 0:
        logger.debug("Stochastic matrix repaired", n=n, max_repair=max(repairs))
    return StochasticMatrix(values=values, row_repairs=repairs)


def _validate_row_zero_values(
    raw: npt.ArrayLike,
    tol: Tolerances,
    error: type[NotRowZero] | type[NotGenerator],
    clamp_off_diagonal: bool,
) -> tuple[RealMatrix, tuple[float, ...]]:
    original = as_real_matrix(raw)
    n = original.shape[0]
    off = _off_diagonal(n)

    values = original.copy()
    if clamp_off_diagonal:
        negative = np.argwhere(off & (original < -tol.entry))
        if negative.size:
            i, j = (int(x) for x in negative[0])
            raise error(
                f"off-diagonal entry ({i}, {j}) = {original[i, j]:.6g} is negative",
                {"row": i, "column": j, "value": float(original[i, j])},
            )
        values[off] = np.maximum(values[off], 0.0)

    sums = original.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums) > tol.row_sum)
    if bad.size:
        i = int(bad[0])
        raise error(
            f"row {i} sums to {sums[i]:.12g}",
            {"row": i, "row_sum": float(sums[i])},
        )

    # residual goes to the diagonal
    np.fill_diagonal(values, 0.0)
    np.fill_diagonal(values, -values.sum(axis=1))

    repairs = tuple(float(x) for x in np.abs(values - original).max(axis=1))
    return values, repairs


def validate_row_zero(
    raw: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RowZeroMatrix:
    """Accept a matrix whose rows sum to zero within tol.row_sum."""
    values, repairs = _validate_row_zero_values(raw, tol, NotRowZero, clamp_off_diagonal=False)
    return RowZeroMatrix(values=values, row_repairs=repairs)


def validate_generator(
    raw: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> GeneratorMatrix:
    """
    Accept a Markov generator up to rounding noise.

    Off-diagonal entries down to -tol.entry are clamped to zero and the
    diagonal is recomputed so every row sums to zero. Off-diagonal entries
    move by at most tol.entry; the diagonal absorbs the row-sum residual and
    every clamp, so it moves by at most tol.row_sum + (n - 1) * tol.entry.
    """
    values, repairs = _validate_row_zero_values(raw, tol, NotGenerator, clamp_off_diagonal=True)
    if max(repairs) > tol.row_sum:
        logger.debug("Generator repaired", n=values.shape[0], max_repair=max(repairs))
    return GeneratorMatrix(values=values, row_repairs=repairs)


def semigroup_at(
    generator: GeneratorMatrix,
    t: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> StochasticMatrix:
    """Transition matrix exp(t*G) of the semigroup generated by G."""
    if t < 0:
        raise ValueError(f"semigroup time must be non-negative, got {t}")
    return validate_stochastic(expm(t * generator.values), tol)

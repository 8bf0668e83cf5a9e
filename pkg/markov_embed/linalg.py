"""
Dense linear algebra for small real matrices.

Eigendecomposition, matrix exponential, principal matrix logarithm and the
infinity operator norm (maximum absolute row sum), which is the norm every
bound in this package is stated in.
"""

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.linalg
import structlog

from markov_embed.config import DEFAULT_TOLERANCES, Tolerances
from markov_embed.errors import (
    ConvergenceFailure,
    IllConditionedBasis,
    InvalidMatrix,
    NonRealResult,
    OverflowGuard,
    SpectrumOnClosedNegativeAxis,
)

logger = structlog.get_logger()

RealMatrix = npt.NDArray[np.float64]
ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]

EXPM_NORM_LIMIT = 1e4
MAX_BASIS_CONDITION = 1e8
SCHUR_LOGM_MAX_ERROR = 1e-6
LOGM_ROUND_TRIP = 1e-9


def as_real_matrix(data: Any) -> RealMatrix:
    """Coerce input to a fresh finite square float64 array."""
    try:
        matrix = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidMatrix(f"not a real matrix: {e}") from e

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise InvalidMatrix(
            f"expected a non-empty square matrix, got shape {matrix.shape}",
            {"shape": list(matrix.shape)},
        )
    if not np.all(np.isfinite(matrix)):
        raise InvalidMatrix("matrix has non-finite entries")
    return matrix


def op_norm(M: npt.ArrayLike) -> float:
    """Infinity operator norm: max over rows of the absolute row sum."""
    return float(np.abs(np.asarray(M)).sum(axis=1).max())


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in deterministic order with their eigenvector basis."""

    eigenvalues: ComplexVector
    eigenvectors: ComplexMatrix
    basis_condition: float
    is_distinct: bool
    min_gap: float
    residual: float  # max column residual of M v - lambda v, relative to op_norm(M)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def moduli(self) -> npt.NDArray[np.float64]:
        return np.abs(self.eigenvalues)


def spectral_order(eigenvalues: ComplexVector) -> npt.NDArray[np.intp]:
    """Descending modulus, then ascending argument."""
    return np.lexsort((np.angle(eigenvalues), -np.abs(eigenvalues)))


def eigen_decompose(
    M: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SpectralDecomposition:
    """
    Complex eigendecomposition of a real matrix.

    LAPACK geev (Hessenberg reduction plus shifted QR) does the iteration;
    conjugate pairs come back exactly conjugate for real input.
    """
    matrix = as_real_matrix(M)
    n = matrix.shape[0]

    try:
        eigenvalues, eigenvectors = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {e}", {"n": n}) from e

    eigenvalues = eigenvalues.astype(np.complex128)
    eigenvectors = eigenvectors.astype(np.complex128)
    order = spectral_order(eigenvalues)
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    norm = op_norm(matrix)
    scale = norm if norm > 0 else 1.0

    columns = matrix @ eigenvectors - eigenvectors * eigenvalues
    residual = float(np.abs(columns).max()) / scale

    with np.errstate(divide="ignore", invalid="ignore"):
        condition = float(np.linalg.cond(eigenvectors))
    if not math.isfinite(condition):
        condition = math.inf

    if n > 1:
        gaps = np.abs(eigenvalues[:, None] - eigenvalues[None, :])
        np.fill_diagonal(gaps, np.inf)
        min_gap = float(gaps.min())
    else:
        min_gap = math.inf
    is_distinct = min_gap > tol.separation * scale

    logger.debug(
        "Eigendecomposition computed",
        n=n,
        basis_condition=condition,
        min_gap=min_gap,
        is_distinct=is_distinct,
        residual=residual,
    )

    return SpectralDecomposition(
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        basis_condition=condition,
        is_distinct=is_distinct,
        min_gap=min_gap,
        residual=residual,
    )


def expm(M: npt.ArrayLike) -> RealMatrix:
    """Matrix exponential by scaling and squaring with Pade approximants."""
    matrix = as_real_matrix(M)
    norm = op_norm(matrix)
    if norm > EXPM_NORM_LIMIT:
        raise OverflowGuard(
            f"op_norm {norm:.6g} exceeds the exponential guard {EXPM_NORM_LIMIT:g}",
            {"norm": norm, "limit": EXPM_NORM_LIMIT},
        )
    return np.asarray(scipy.linalg.expm(matrix), dtype=np.float64)


def negative_axis_distance(value: complex) -> float:
    """Distance from a complex number to the closed half-line (-inf, 0]."""
    if value.real <= 0:
        return abs(value.imag)
    return abs(value)


def require_real(
    values: npt.ArrayLike,
    limit: float,
    what: str,
) -> RealMatrix:
    """Drop an imaginary residue below ``limit``; raise otherwise."""
    array = np.asarray(values)
    if np.iscomplexobj(array):
        residue = float(np.abs(array.imag).max()) if array.size else 0.0
        if residue >= limit:
            raise NonRealResult(
                f"{what} has imaginary residue {residue:.3g} (limit {limit:.3g})",
                {"residue": residue, "limit": limit},
            )
        array = array.real
    return np.ascontiguousarray(array, dtype=np.float64)


def reconstruct(eigenvectors: ComplexMatrix, values: ComplexVector) -> ComplexMatrix:
    """V diag(values) V^-1 without forming the inverse."""
    # X V = V D  <=>  V^T X^T = (V D)^T
    return np.linalg.solve(eigenvectors.T, (eigenvectors * values).T).T


def logm_principal(
    M: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RealMatrix:
    """
    Principal matrix logarithm of a real matrix.

    The spectrum must avoid the closed negative real axis; the result is the
    unique real logarithm with all eigenvalues in the strip |Im z| < pi.
    Diagonalizable input with a well-conditioned basis goes through
    V log(D) V^-1, everything else through the Schur-based inverse scaling
    and squaring of scipy.
    """
    matrix = as_real_matrix(M)
    norm = op_norm(matrix)
    scale = norm if norm > 0 else 1.0

    decomposition = eigen_decompose(matrix, tol)
    for eigenvalue in decomposition.eigenvalues:
        distance = negative_axis_distance(complex(eigenvalue))
        if distance <= tol.axis * scale:
            raise SpectrumOnClosedNegativeAxis(complex(eigenvalue), distance)

    reality_limit = tol.reality * (1.0 + norm)

    if decomposition.basis_condition <= MAX_BASIS_CONDITION:
        log_values = np.log(decomposition.eigenvalues)
        log_matrix = reconstruct(decomposition.eigenvectors, log_values)
        result = require_real(log_matrix, reality_limit, "principal logarithm")
        route = "eigenvectors"
    else:
        logger.info(
            "Eigenvector basis ill-conditioned, using Schur fallback",
            basis_condition=decomposition.basis_condition,
        )
        log_matrix = _schur_logm(matrix, decomposition.basis_condition)
        try:
            result = require_real(log_matrix, reality_limit, "principal logarithm")
        except NonRealResult as e:
            raise IllConditionedBasis(decomposition.basis_condition, str(e)) from e
        route = "schur"

    round_trip = op_norm(expm(result) - matrix)
    if round_trip > LOGM_ROUND_TRIP * scale:
        logger.warning(
            "Principal logarithm round trip above target",
            round_trip=round_trip,
            route=route,
            basis_condition=decomposition.basis_condition,
        )
    logger.debug("Principal logarithm computed", route=route, round_trip=round_trip)
    return result


def _schur_logm(matrix: RealMatrix, condition: float) -> ComplexMatrix:
    try:
        log_matrix, error_estimate = scipy.linalg.logm(matrix, disp=False)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise IllConditionedBasis(condition, f"Schur logarithm failed: {e}") from e

    if not np.all(np.isfinite(log_matrix)):
        raise IllConditionedBasis(condition, "Schur logarithm is not finite")
    if error_estimate > SCHUR_LOGM_MAX_ERROR:
        raise IllConditionedBasis(
            condition, f"Schur logarithm error estimate {error_estimate:.3g}"
        )
    return np.asarray(log_matrix)

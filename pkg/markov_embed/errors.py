"""Exception hierarchy for markov-embed."""

from typing import Any, Optional


class EmbeddingError(Exception):
    """Base class for every error raised by the library."""

    def __init__(self, message: str, detail: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.detail: dict[str, Any] = detail or {}


# Matrix validation

class MatrixError(EmbeddingError, ValueError):
    """Input does not belong to the requested matrix class."""


class InvalidMatrix(MatrixError):
    """Not a finite, non-empty, square real matrix."""


class NotStochastic(MatrixError):
    """Negative entry or row sum away from one beyond tolerance."""


class NotRowZero(MatrixError):
    """Row sum away from zero beyond tolerance."""


class NotGenerator(MatrixError):
    """Negative off-diagonal entry or non-zero row sum beyond tolerance."""


# Dense linear algebra

class LinalgError(EmbeddingError):
    """A dense linear algebra routine could not produce a trustworthy result."""


class ConvergenceFailure(LinalgError):
    """The eigenvalue iteration did not converge."""


class OverflowGuard(LinalgError):
    """Matrix norm too large for a safe exponential."""


class SpectrumOnClosedNegativeAxis(LinalgError):
    """An eigenvalue lies on (-inf, 0]; the principal logarithm is undefined."""

    def __init__(self, eigenvalue: complex, distance: float):
        super().__init__(
            f"eigenvalue {eigenvalue:.6g} lies on the closed negative real axis",
            {"eigenvalue": [eigenvalue.real, eigenvalue.imag], "distance": distance},
        )
        self.eigenvalue = eigenvalue


class IllConditionedBasis(LinalgError):
    """Eigenvector basis too ill-conditioned and the Schur fallback failed."""

    def __init__(self, condition: float, reason: str):
        super().__init__(
            f"eigenvector basis condition {condition:.3g}: {reason}",
            {"basis_condition": condition, "reason": reason},
        )
        self.condition = condition


class NonRealResult(LinalgError):
    """A result that must be real kept an imaginary part above tolerance."""


# Generator search

class SearchError(EmbeddingError):
    """The generator search cannot run or produced inconsistent output."""


class DegenerateSpectrum(SearchError):
    """Repeated eigenvalues: the logarithms form a continuum."""


class NotInvertible(SearchError):
    """Zero eigenvalue: no logarithm exists."""


class EnumerationLimitExceeded(SearchError):
    """The number of offset tuples exceeds the configured cap."""


class WitnessMismatch(SearchError):
    """exp(B) does not reproduce A within tolerance."""


class InconsistentDiagnostics(SearchError):
    """The determinant/trace/norm/spectrum implication chain was violated."""


# Input

class InputFormatError(EmbeddingError):
    """A matrix file could not be parsed."""

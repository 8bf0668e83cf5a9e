"""Base necessary-condition check abstraction."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Optional

from markov_embed.config import DEFAULT_TOLERANCES, Tolerances
from markov_embed.linalg import SpectralDecomposition, eigen_decompose
from markov_embed.matrices import StochasticMatrix


@dataclass(frozen=True)
class RunnenbergDatum:
    """Polar data of one eigenvalue against the spiral bound r(theta)."""

    eigenvalue: complex
    r: float
    theta: float  # |arg| in [0, pi]
    bound: float  # exp(-theta * tan(pi/n))

    @property
    def margin(self) -> float:
        return self.bound - self.r


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one necessary condition, with a witness when it fails."""

    name: str
    passed: bool
    margin: float  # signed distance to the pass/fail boundary, inf if unconstrained
    certificate: Optional[dict[str, Any]] = None
    applicable: bool = True
    runnenberg: tuple[RunnenbergDatum, ...] = field(default=())

    def __post_init__(self):
        if not self.passed and self.certificate is None:
            raise ValueError(f"failed check {self.name!r} needs a certificate")


class BaseCheck(ABC):
    """A necessary condition for embeddability."""

    name: str = "base"

    def run(
        self,
        A: StochasticMatrix,
        tol: Tolerances = DEFAULT_TOLERANCES,
        decomposition: Optional[SpectralDecomposition] = None,
    ) -> CheckResult:
        """Evaluate the check, decomposing A unless a decomposition is supplied."""
        if decomposition is None:
            decomposition = eigen_decompose(A.values, tol)
        return self.evaluate(A, tol, decomposition)

    @abstractmethod
    def evaluate(
        self,
        A: StochasticMatrix,
        tol: Tolerances,
        decomposition: SpectralDecomposition,
    ) -> CheckResult:
        """Evaluate the check on A and its spectrum."""
        pass

    def passed(self, margin: float) -> CheckResult:
        return CheckResult(name=self.name, passed=True, margin=margin)

    def failed(self, margin: float, **certificate: Any) -> CheckResult:
        return CheckResult(name=self.name, passed=False, margin=margin, certificate=certificate)

"""Spectral necessary conditions: zero/negative eigenvalues, Elfving, Runnenberg."""

import math

import numpy as np

from markov_embed.checks.base import BaseCheck, CheckResult, RunnenbergDatum
from markov_embed.config import DEFAULT_TOLERANCES, Tolerances
from markov_embed.linalg import SpectralDecomposition, op_norm
from markov_embed.matrices import StochasticMatrix


def karpelevic_cot(n: int) -> float:
    """
    Slope cot(pi/n) of the sector {-u + iv : u >= 0, |v| <= u cot(pi/n)}.

    For n <= 2 the spectrum of C - I is real, so the sector degenerates to
    the negative half-line and the slope is 0.
    """
    if n <= 2:
        return 0.0
    return 1.0 / math.tan(math.pi / n)


def runnenberg_radius(theta: float, n: int) -> float:
    """r(theta) = exp(-theta tan(pi/n)); the n -> 2 limit for n <= 2."""
    theta = abs(theta)
    if n <= 2:
        return 1.0 if theta == 0 else 0.0
    return math.exp(-theta * math.tan(math.pi / n))


def runnenberg_data(eigenvalues: np.ndarray, n: int) -> tuple[RunnenbergDatum, ...]:
    data = []
    for eigenvalue in eigenvalues:
        value = complex(eigenvalue)
        theta = abs(math.atan2(value.imag, value.real))
        data.append(
            RunnenbergDatum(
                eigenvalue=value,
                r=abs(value),
                theta=theta,
                bound=runnenberg_radius(theta, n),
            )
        )
    return tuple(data)


def _pair(value: complex) -> list[float]:
    return [value.real, value.imag]


class ZeroNegativeSpectrumCheck(BaseCheck):
    """
    No zero eigenvalue; negative eigenvalues have even multiplicity.

    A zero eigenvalue is refuted only on an exactly singular LU
    factorization. An eigenvalue below tol.axis * op_norm(A) on a
    nonsingular factorization cannot be told apart from a tiny genuine one,
    so the zero test is reported inapplicable instead.
    """

    name = "zero_and_negative_spectrum"

    def evaluate(
        self,
        A: StochasticMatrix,
        tol: Tolerances,
        decomposition: SpectralDecomposition,
    ) -> CheckResult:
        scale = op_norm(A.values) or 1.0
        eigenvalues = decomposition.eigenvalues
        moduli = np.abs(eigenvalues)
        zero_limit = tol.axis * scale

        smallest = int(np.argmin(moduli))
        unresolved = bool(moduli[smallest] < zero_limit)
        if unresolved and np.linalg.slogdet(A.values)[0] == 0:
            return self.failed(
                float(moduli[smallest] - zero_limit),
                reason="zero eigenvalue",
                eigenvalue=_pair(complex(eigenvalues[smallest])),
            )

        resolved = moduli >= zero_limit
        negative = np.sort(
            eigenvalues[
                resolved
                & (np.abs(eigenvalues.imag) < zero_limit)
                & (eigenvalues.real < -zero_limit)
            ].real
        )
        # clusters of numerically equal negative eigenvalues
        radius = tol.separation * scale
        clusters: list[list[float]] = []
        for value in negative:
            if clusters and value - clusters[-1][-1] <= radius:
                clusters[-1].append(float(value))
            else:
                clusters.append([float(value)])

        for cluster in clusters:
            if len(cluster) % 2:
                value = float(np.mean(cluster))
                return self.failed(
                    -abs(value),
                    reason="negative eigenvalue of odd multiplicity",
                    eigenvalue=[value, 0.0],
                    multiplicity=len(cluster),
                )

        if unresolved:
            return CheckResult(
                name=self.name,
                passed=True,
                margin=float(moduli[smallest] - zero_limit),
                certificate={
                    "inapplicable": "smallest eigenvalue below resolution",
                    "eigenvalue": _pair(complex(eigenvalues[smallest])),
                },
                applicable=False,
            )
        return self.passed(float(moduli[smallest] - zero_limit))


class ElfvingCheck(BaseCheck):
    """Every eigenvalue other than 1 lies strictly inside the unit disc."""

    name = "elfving"

    def evaluate(
        self,
        A: StochasticMatrix,
        tol: Tolerances,
        decomposition: SpectralDecomposition,
    ) -> CheckResult:
        eigenvalues = decomposition.eigenvalues
        peripheral = eigenvalues[np.abs(eigenvalues - 1.0) > tol.separation]
        if peripheral.size == 0:
            return self.passed(math.inf)

        moduli = np.abs(peripheral)
        worst = int(np.argmax(moduli))
        margin = float(1.0 - tol.entry - moduli[worst])
        if margin <= 0:
            return self.failed(
                margin,
                eigenvalue=_pair(complex(peripheral[worst])),
                modulus=float(moduli[worst]),
            )
        return self.passed(margin)


class RunnenbergCheck(BaseCheck):
    """For n >= 3 the spectrum lies inside the spiral r <= exp(-theta tan(pi/n))."""

    name = "runnenberg"

    def evaluate(
        self,
        A: StochasticMatrix,
        tol: Tolerances,
        decomposition: SpectralDecomposition,
    ) -> CheckResult:
        n = A.n
        data = runnenberg_data(decomposition.eigenvalues, n)
        if n < 3:
            return CheckResult(
                name=self.name,
                passed=True,
                margin=math.inf,
                certificate={"inapplicable": "requires n >= 3"},
                applicable=False,
                runnenberg=data,
            )

        # the eigenvalue 1 sits on the boundary of every stochastic spectrum
        informative = [d for d in data if abs(d.eigenvalue - 1.0) > tol.separation]
        margin = min((d.margin for d in informative), default=math.inf)

        violations = [d for d in data if d.r > d.bound + tol.sector]
        if violations:
            worst = min(violations, key=lambda d: d.margin)
            return CheckResult(
                name=self.name,
                passed=False,
                margin=margin,
                certificate={
                    "eigenvalue": _pair(worst.eigenvalue),
                    "r": worst.r,
                    "theta": worst.theta,
                    "bound": worst.bound,
                },
                runnenberg=data,
            )
        return CheckResult(name=self.name, passed=True, margin=margin, runnenberg=data)


def check_zero_and_negative_spectrum(
    A: StochasticMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> CheckResult:
    return ZeroNegativeSpectrumCheck().run(A, tol)


def check_elfving(A: StochasticMatrix, tol: Tolerances = DEFAULT_TOLERANCES) -> CheckResult:
    return ElfvingCheck().run(A, tol)


def check_runnenberg(A: StochasticMatrix, tol: Tolerances = DEFAULT_TOLERANCES) -> CheckResult:
    return RunnenbergCheck().run(A, tol)

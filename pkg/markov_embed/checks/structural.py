"""Checks on the determinant and on the positivity pattern of A."""

import math

import numpy as np

from markov_embed.checks.base import BaseCheck, CheckResult
from markov_embed.config import DEFAULT_TOLERANCES, Tolerances
from markov_embed.linalg import SpectralDecomposition, op_norm
from markov_embed.matrices import StochasticMatrix


class DetRangeCheck(BaseCheck):
    """
    det(A) = exp(tr B) must lie in (0, 1] for any generator B.

    The sign comes from the spectrum: conjugate pairs contribute a positive
    factor, so det(A) < 0 exactly when an odd number of resolved eigenvalues
    is negative real. Eigenvalues below the resolution tol.axis * op_norm(A)
    carry no sign information; only an exactly singular LU factorization
    refutes on them. The margin is log(1 + tol.row_sum) - log|det(A)|.
    """

    name = "det_range"

    def evaluate(
        self,
        A: StochasticMatrix,
        tol: Tolerances,
        decomposition: SpectralDecomposition,
    ) -> CheckResult:
        eigenvalues = decomposition.eigenvalues
        moduli = decomposition.moduli
        resolution = tol.axis * (op_norm(A.values) or 1.0)
        with np.errstate(divide="ignore"):
            log_det = float(np.sum(np.log(moduli)))
        log_upper = math.log1p(tol.row_sum)

        lu_sign, _ = np.linalg.slogdet(A.values)
        if lu_sign == 0:
            return self.failed(0.0, determinant=0.0, violated="lower", bound=0.0)

        resolved = moduli > resolution
        negative = resolved & (np.abs(eigenvalues.imag) <= resolution) & (eigenvalues.real < 0)
        if np.count_nonzero(negative) % 2:
            determinant = -math.exp(log_det)
            return self.failed(
                determinant,
                determinant=determinant,
                log_abs_determinant=log_det,
                violated="lower",
                bound=0.0,
            )

        margin = log_upper - log_det
        if margin < 0:
            return self.failed(
                margin,
                determinant=math.exp(log_det),
                log_abs_determinant=log_det,
                violated="upper",
                bound=1.0 + tol.row_sum,
            )
        return self.passed(margin)


class PositivityTransitivityCheck(BaseCheck):
    """
    A_ij > 0 and A_jk > 0 must imply A_ik > 0.

    Entries above tol.entry count as positive and only entries that are
    exactly zero after validation count as zero. An entry in between is
    neither, since exp(tB) can be positive yet far below tol.entry.
    """

    name = "positivity_transitivity"

    def evaluate(
        self,
        A: StochasticMatrix,
        tol: Tolerances,
        decomposition: SpectralDecomposition,
    ) -> CheckResult:
        values = A.values
        positive = values > tol.entry
        zero = values <= 0.0

        # paths[i, j, k]: A_ij > 0 and A_jk > 0
        paths = positive[:, :, None] & positive[None, :, :]
        violations = paths & zero[:, None, :]
        reachable = paths.any(axis=1)

        if violations.any():
            i, j, k = (int(x) for x in np.argwhere(violations)[0])
            return self.failed(
                -float(min(values[i, j], values[j, k])),
                triple=[i, j, k],
                a_ij=float(values[i, j]),
                a_jk=float(values[j, k]),
                a_ik=float(values[i, k]),
            )

        return self.passed(float(values[reachable].min()))


def check_det_range(A: StochasticMatrix, tol: Tolerances = DEFAULT_TOLERANCES) -> CheckResult:
    return DetRangeCheck().run(A, tol)


def check_positivity_transitivity(
    A: StochasticMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> CheckResult:
    return PositivityTransitivityCheck().run(A, tol)

"""Necessary conditions for embeddability of a Markov matrix."""

import structlog

from markov_embed.config import DEFAULT_TOLERANCES, Tolerances
from markov_embed.linalg import eigen_decompose
from markov_embed.matrices import StochasticMatrix

from .base import BaseCheck, CheckResult, RunnenbergDatum
from .spectral import (
    ElfvingCheck,
    RunnenbergCheck,
    ZeroNegativeSpectrumCheck,
    check_elfving,
    check_runnenberg,
    check_zero_and_negative_spectrum,
    karpelevic_cot,
    runnenberg_data,
    runnenberg_radius,
)
from .structural import (
    DetRangeCheck,
    PositivityTransitivityCheck,
    check_det_range,
    check_positivity_transitivity,
)

logger = structlog.get_logger()

# Evaluation order is part of the report format.
BATTERY: tuple[BaseCheck, ...] = (
    DetRangeCheck(),
    ZeroNegativeSpectrumCheck(),
    PositivityTransitivityCheck(),
    ElfvingCheck(),
    RunnenbergCheck(),
)


def run_battery(
    A: StochasticMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> list[CheckResult]:
    """
    Run every necessary condition on A.

    A failure proves A is not embeddable; passing everything proves nothing.
    """
    decomposition = eigen_decompose(A.values, tol)
    results = [check.run(A, tol, decomposition) for check in BATTERY]
    logger.debug(
        "Battery evaluated",
        n=A.n,
        failed=[r.name for r in results if not r.passed],
    )
    return results


def first_failure(results: list[CheckResult]) -> CheckResult | None:
    return next((r for r in results if not r.passed), None)


__all__ = [
    "BATTERY",
    "BaseCheck",
    "CheckResult",
    "DetRangeCheck",
    "ElfvingCheck",
    "PositivityTransitivityCheck",
    "RunnenbergCheck",
    "RunnenbergDatum",
    "ZeroNegativeSpectrumCheck",
    "check_det_range",
    "check_elfving",
    "check_positivity_transitivity",
    "check_runnenberg",
    "check_zero_and_negative_spectrum",
    "first_failure",
    "karpelevic_cot",
    "run_battery",
    "runnenberg_data",
    "runnenberg_radius",
]

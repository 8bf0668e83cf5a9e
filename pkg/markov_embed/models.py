"""Pydantic models for analysis reports."""

import math
from typing import Annotated, Any, Literal, Optional

import numpy as np
import numpy.typing as npt
from pydantic import AfterValidator, BaseModel, Field

from markov_embed import __version__
from markov_embed.checks import CheckResult, RunnenbergDatum
from markov_embed.config import SearchConfig, Tolerances
from markov_embed.regularization import RegularizationResult
from markov_embed.search import (
    CuthbertDiagnostics,
    EmbeddabilityVerdict,
    ExhaustedEnumeration,
    UniquenessCertificate,
    VerdictStatus,
)

SCHEMA_VERSION = 1
SIGNIFICANT_DIGITS = 12


def round_significant(value: Optional[float]) -> Optional[float]:
    """Round to 12 significant digits; non-finite values become None."""
    if value is None or not math.isfinite(value):
        return None
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def _round_nested(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return round_significant(value)
    if isinstance(value, dict):
        return {k: _round_nested(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_nested(v) for v in value]
    return value


Number = Annotated[Optional[float], AfterValidator(round_significant)]
Matrix = list[list[Number]]


def matrix_payload(M: npt.ArrayLike) -> list[list[float]]:
    return [[float(x) for x in row] for row in np.asarray(M, dtype=np.float64)]


class ComplexValue(BaseModel):
    re: Number
    im: Number

    @classmethod
    def of(cls, value: complex) -> "ComplexValue":
        value = complex(value)
        return cls(re=value.real, im=value.imag)


class InputReport(BaseModel):
    """Echo of the validated input and the repairs applied to it."""
    source: Optional[str] = None
    n: int
    matrix: Matrix
    row_repairs: list[Number]
    max_repair: Number


class RunnenbergEntry(BaseModel):
    eigenvalue: ComplexValue
    r: Number
    theta: Number
    bound: Number
    margin: Number

    @classmethod
    def from_datum(cls, datum: RunnenbergDatum) -> "RunnenbergEntry":
        return cls(
            eigenvalue=ComplexValue.of(datum.eigenvalue),
            r=datum.r,
            theta=datum.theta,
            bound=datum.bound,
            margin=datum.margin,
        )


class CheckReport(BaseModel):
    name: str
    passed: bool
    applicable: bool = True
    margin: Number  # null when the check places no constraint
    certificate: Optional[dict[str, Any]] = None

    @classmethod
    def from_result(cls, result: CheckResult) -> "CheckReport":
        return cls(
            name=result.name,
            passed=result.passed,
            applicable=result.applicable,
            margin=result.margin,
            certificate=_round_nested(result.certificate),
        )


class CuthbertReport(BaseModel):
    det_A: Number
    trace_B: Number
    beta: Number
    norm_B_plus_beta: Number
    spectral_strip_ok: bool
    conditions: list[bool]
    residual: Number

    @classmethod
    def from_diagnostics(cls, diagnostics: CuthbertDiagnostics) -> "CuthbertReport":
        return cls(
            det_A=diagnostics.det_A,
            trace_B=diagnostics.trace_B,
            beta=diagnostics.beta,
            norm_B_plus_beta=diagnostics.norm_B_plus_beta,
            spectral_strip_ok=diagnostics.spectral_strip_ok,
            conditions=list(diagnostics.conditions),
            residual=diagnostics.residual,
        )


class GeneratorReport(BaseModel):
    """A generator of A; offsets are null when it was not found by enumeration."""
    offsets: Optional[list[int]] = None
    principal: bool
    matrix: Matrix
    residual: Number
    sector_margins: list[Number] = Field(default_factory=list)
    cuthbert: Optional[CuthbertReport] = None
    cuthbert_error: Optional[str] = None


class RegularizationReport(BaseModel):
    L: Matrix
    B: Matrix
    epsilon: Number
    regularized: Matrix
    exp_error_actual: Number
    exp_error_bound: Number
    loose_bound: Number

    @classmethod
    def from_result(cls, result: RegularizationResult) -> "RegularizationReport":
        return cls(
            L=matrix_payload(result.L.values),
            B=matrix_payload(result.B.values),
            epsilon=result.epsilon,
            regularized=matrix_payload(result.regularized),
            exp_error_actual=result.exp_error_actual,
            exp_error_bound=result.exp_error_bound,
            loose_bound=result.loose_bound,
        )


class VerdictReport(BaseModel):
    status: VerdictStatus
    certificate_kind: Optional[Literal["check", "exhausted_enumeration", "uniqueness"]] = None
    failed_check: Optional[str] = None
    reason: Optional[str] = None
    generator_count_lower_bound: int = 0
    branches_examined: Optional[int] = None
    witness: Optional[Matrix] = None

    @classmethod
    def from_verdict(cls, verdict: EmbeddabilityVerdict) -> "VerdictReport":
        kind = None
        failed = None
        if isinstance(verdict.certificate, CheckResult):
            kind, failed = "check", verdict.certificate.name
        elif isinstance(verdict.certificate, ExhaustedEnumeration):
            kind = "exhausted_enumeration"
        elif isinstance(verdict.certificate, UniquenessCertificate):
            kind = "uniqueness"
        witness = verdict.witness
        return cls(
            status=verdict.status,
            certificate_kind=kind,
            failed_check=failed,
            reason=verdict.reason,
            generator_count_lower_bound=verdict.generator_count_lower_bound,
            branches_examined=verdict.branches_examined,
            witness=matrix_payload(witness.values) if witness is not None else None,
        )


class AnalysisReport(BaseModel):
    """Full analysis of one Markov matrix."""
    schema_version: Literal[1] = SCHEMA_VERSION
    tool_version: str = __version__
    input: InputReport
    spectrum: list[RunnenbergEntry]
    battery: list[CheckReport]
    verdict: VerdictReport
    uniqueness: UniquenessCertificate
    generators: list[GeneratorReport]
    regularization: Optional[RegularizationReport] = None
    regularization_error: Optional[str] = None
    tolerances: Tolerances
    search: SearchConfig


class BatchFailure(BaseModel):
    source: str
    error: str


class BatchReport(BaseModel):
    """Reports for every matrix file of a directory."""
    schema_version: Literal[1] = SCHEMA_VERSION
    tool_version: str = __version__
    reports: list[AnalysisReport]
    failures: list[BatchFailure]

"""
Logarithm branch enumeration and embeddability verdicts.

For an invertible Markov matrix with distinct eigenvalues every real
logarithm is V diag(mu) V^-1 with mu_r = Log(lambda_r) + 2 pi i k_r.
A Markov generator must keep each mu_r inside the Karpelevic sector
|Im mu| <= -Re(mu) cot(pi/n), which leaves finitely many offsets k_r.
"""

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np
import structlog

from markov_embed.checks import CheckResult, first_failure, karpelevic_cot, run_battery
from markov_embed.checks.spectral import runnenberg_radius
from markov_embed.config import DEFAULT_SEARCH, DEFAULT_TOLERANCES, SearchConfig, Tolerances
from markov_embed.errors import (
    DegenerateSpectrum,
    EmbeddingError,
    EnumerationLimitExceeded,
    IllConditionedBasis,
    InconsistentDiagnostics,
    LinalgError,
    NonRealResult,
    NotGenerator,
    NotInvertible,
    SearchError,
    WitnessMismatch,
)
from markov_embed.linalg import (
    ComplexVector,
    RealMatrix,
    SpectralDecomposition,
    eigen_decompose,
    expm,
    logm_principal,
    op_norm,
    require_real,
)
from markov_embed.matrices import GeneratorMatrix, StochasticMatrix, validate_generator

logger = structlog.get_logger()

TWO_PI = 2.0 * math.pi


class VerdictStatus(str, Enum):
    """Three-valued embeddability outcome."""
    EMBEDDABLE = "embeddable"
    NOT_EMBEDDABLE = "not_embeddable"
    INCONCLUSIVE = "inconclusive"


class UniquenessCertificate(str, Enum):
    """What is known about the number of generators of A."""
    UNIQUE_PRINCIPAL = "unique_principal"  # only the principal log can be a generator
    AT_MOST_FINITE = "at_most_finite"      # finitely many candidates
    UNKNOWN = "unknown"                    # repeated or zero eigenvalues


@dataclass(frozen=True, eq=False)
class LogBranch:
    """One real logarithm of A, labelled by its eigenvalue offsets."""

    offsets: tuple[int, ...]
    mu: ComplexVector
    matrix: RealMatrix
    sector_margins: tuple[float, ...]
    generator: Optional[GeneratorMatrix] = None

    @property
    def is_generator(self) -> bool:
        return self.generator is not None

    @property
    def is_principal(self) -> bool:
        return not any(self.offsets)

    @property
    def weight(self) -> int:
        return sum(abs(k) for k in self.offsets)

    def residual(self, A: StochasticMatrix) -> float:
        """op_norm(expm(matrix) - A)."""
        return op_norm(expm(self.matrix) - A.values)


@dataclass(frozen=True)
class ExhaustedEnumeration:
    """Every admissible branch was examined and none is a generator."""
    branches_examined: int


Certificate = Union[CheckResult, ExhaustedEnumeration, UniquenessCertificate]


@dataclass(frozen=True, eq=False)
class EmbeddabilityVerdict:
    """Verdict with the evidence that supports it."""

    status: VerdictStatus
    witness: Optional[GeneratorMatrix] = None
    certificate: Optional[Certificate] = None
    generator_count_lower_bound: int = 0
    reason: Optional[str] = None
    generators: tuple[LogBranch, ...] = field(default=())
    battery: tuple[CheckResult, ...] = field(default=())
    branches_examined: Optional[int] = None

    def __post_init__(self):
        if self.status == VerdictStatus.EMBEDDABLE and self.witness is None:
            raise ValueError("an embeddable verdict needs a witness")
        if self.status == VerdictStatus.NOT_EMBEDDABLE and self.certificate is None:
            raise ValueError("a non-embeddable verdict needs a certificate")


@dataclass(frozen=True)
class CuthbertDiagnostics:
    """Determinant, trace, norm and spectral-strip conditions for a pair (A, B)."""

    det_A: float
    trace_B: float
    beta: float
    norm_B_plus_beta: float
    spectral_strip_ok: bool
    conditions: tuple[bool, bool, bool, bool]
    residual: float

    @property
    def chain_holds(self) -> bool:
        one, two, three, four = self.conditions
        return (not one or two) and (not two or three) and (not three or four)


@dataclass
class _Enumeration:
    branches: list[LogBranch]
    truncated: bool


def sign_slack(
    matrix: RealMatrix,
    decomposition: SpectralDecomposition,
    tol: Tolerances,
) -> float:
    """
    How far below zero an off-diagonal entry of a computed logarithm may sit
    and still count as a rounding error of a true zero.

    Rounding in Log(lambda) grows like eps / |lambda|, and the change of
    basis amplifies it by the eigenvector condition number. The slack never
    exceeds the imaginary residue accepted by require_real at the same scale.
    """
    scale = max(1.0, op_norm(matrix))
    cap = tol.reality * scale
    smallest = max(float(decomposition.moduli.min()), np.finfo(np.float64).tiny)
    rounding = np.finfo(np.float64).eps * decomposition.n / smallest
    slack = max(tol.entry, rounding) * scale * decomposition.basis_condition
    if not math.isfinite(slack):
        slack = cap
    return max(tol.entry, min(slack, cap))


def _as_generator(
    matrix: RealMatrix,
    decomposition: SpectralDecomposition,
    tol: Tolerances,
) -> GeneratorMatrix:
    slack = sign_slack(matrix, decomposition, tol)
    return validate_generator(matrix, tol.model_copy(update={"entry": slack}))


def principal_generator(
    A: StochasticMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Optional[GeneratorMatrix]:
    """The principal logarithm of A if it is a Markov generator."""
    log_matrix = logm_principal(A.values, tol)
    decomposition = eigen_decompose(A.values, tol)
    try:
        return _as_generator(log_matrix, decomposition, tol)
    except NotGenerator as e:
        logger.debug("Principal logarithm is not a generator", detail=e.detail)
        return None


def _offset_range(eigenvalue: complex, cot: float, tol: Tolerances) -> tuple[int, int]:
    # |Arg(lambda) + 2 pi k| <= -ln|lambda| cot(pi/n) + slack
    arg = math.atan2(eigenvalue.imag, eigenvalue.real)
    bound = -math.log(abs(eigenvalue)) * cot + tol.sector
    if bound < 0:
        return 1, 0
    return math.ceil((-bound - arg) / TWO_PI), math.floor((bound - arg) / TWO_PI)


def _enumerate(
    A: StochasticMatrix,
    tol: Tolerances,
    search: SearchConfig,
) -> _Enumeration:
    values = A.values
    decomposition = eigen_decompose(values, tol)
    n = decomposition.n
    scale = op_norm(values) or 1.0

    if not decomposition.is_distinct:
        raise DegenerateSpectrum(
            f"repeated eigenvalues (min gap {decomposition.min_gap:.3g}); "
            "logarithms form a continuum",
            {"min_gap": decomposition.min_gap},
        )
    if decomposition.moduli.min() <= tol.axis * scale:
        raise NotInvertible(
            "A has a zero eigenvalue",
            {"min_modulus": float(decomposition.moduli.min())},
        )

    eigenvalues = decomposition.eigenvalues
    real = np.abs(eigenvalues.imag) <= tol.axis * scale
    if np.any(real & (eigenvalues.real < 0)):
        logger.debug("Simple negative eigenvalue, no real logarithm exists")
        return _Enumeration(branches=[], truncated=False)

    principal = np.log(eigenvalues)
    principal[real] = np.log(eigenvalues[real].real)

    cot = karpelevic_cot(n)
    pairs: list[tuple[int, int]] = []
    ranges: list[range] = []
    truncated = False
    for r in np.flatnonzero(~real & (eigenvalues.imag > 0)):
        conjugates = np.flatnonzero(~real & (eigenvalues.imag < 0))
        s = int(conjugates[np.argmin(np.abs(eigenvalues[conjugates] - np.conj(eigenvalues[r])))])
        low, high = _offset_range(complex(eigenvalues[r]), cot, tol)
        if low > high:
            logger.debug("No admissible offset", eigenvalue=complex(eigenvalues[r]))
            return _Enumeration(branches=[], truncated=False)
        if low < -search.max_offset or high > search.max_offset:
            truncated = True
            low, high = max(low, -search.max_offset), min(high, search.max_offset)
            if low > high:
                return _Enumeration(branches=[], truncated=True)
        pairs.append((int(r), s))
        ranges.append(range(low, high + 1))

    total = math.prod(len(r) for r in ranges)
    if total > search.max_branches:
        raise EnumerationLimitExceeded(
            f"{total} offset tuples exceed the limit of {search.max_branches}",
            {"tuples": total, "limit": search.max_branches},
        )

    eigenvectors = decomposition.eigenvectors
    try:
        inverse = np.linalg.inv(eigenvectors)
    except np.linalg.LinAlgError as e:
        raise IllConditionedBasis(
            decomposition.basis_condition, f"eigenvector inverse: {e}"
        ) from e
    off = ~np.eye(n, dtype=bool)

    branches: list[LogBranch] = []
    for combo in itertools.product(*ranges):
        offsets = np.zeros(n, dtype=int)
        mu = principal.copy()
        for (r, s), k in zip(pairs, combo):
            offsets[r], offsets[s] = k, -k
            mu[r] += TWO_PI * 1j * k
            mu[s] -= TWO_PI * 1j * k

        candidate = (eigenvectors * mu) @ inverse
        try:
            matrix = require_real(
                candidate, tol.reality * (1.0 + op_norm(candidate.real)), "logarithm branch"
            )
        except NonRealResult as e:
            logger.debug("Dropping non-real branch", offsets=offsets.tolist(), detail=e.detail)
            continue

        u, v = -mu.real, np.abs(mu.imag)
        if np.any(v > np.abs(mu.real) * cot + tol.sector):
            continue

        generator = None
        if matrix[off].min(initial=0.0) >= -sign_slack(matrix, decomposition, tol):
            try:
                generator = _as_generator(matrix, decomposition, tol)
            except NotGenerator:
                generator = None

        branches.append(
            LogBranch(
                offsets=tuple(int(k) for k in offsets),
                mu=mu,
                matrix=matrix,
                sector_margins=tuple(float(x) for x in u * cot - v),
                generator=generator,
            )
        )

    branches.sort(key=lambda b: (b.weight, b.offsets))
    logger.debug(
        "Branches enumerated",
        n=n,
        tuples=total,
        branches=len(branches),
        generators=sum(b.is_generator for b in branches),
        truncated=truncated,
    )
    return _Enumeration(branches=branches, truncated=truncated)


def enumerate_branches(
    A: StochasticMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
    search: SearchConfig = DEFAULT_SEARCH,
) -> list[LogBranch]:
    """
    Every real logarithm of A whose spectrum lies in the Karpelevic sector.

    Branches are sorted by total |offset|, then lexicographically, so the
    principal logarithm (all offsets zero) comes first when admissible.
    Raises DegenerateSpectrum for repeated eigenvalues, NotInvertible for a
    zero eigenvalue and EnumerationLimitExceeded when search limits would
    make the list incomplete.
    """
    enumeration = _enumerate(A, tol, search)
    if enumeration.truncated:
        raise EnumerationLimitExceeded(
            f"admissible offsets exceed max_offset={search.max_offset}",
            {"max_offset": search.max_offset},
        )
    return enumeration.branches


def uniqueness_certificate(
    A: StochasticMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> UniquenessCertificate:
    """
    Classify how many generators A can have.

    Distinct eigenvalues with every |lambda| above exp(-pi tan(pi/n)), or
    det(A) above exp(-pi), leave the principal logarithm as the only
    candidate.
    """
    decomposition = eigen_decompose(A.values, tol)
    scale = op_norm(A.values) or 1.0
    moduli = decomposition.moduli
    if not decomposition.is_distinct or moduli.min() <= tol.axis * scale:
        return UniquenessCertificate.UNKNOWN

    threshold = runnenberg_radius(math.pi, decomposition.n)
    det = float(np.prod(decomposition.eigenvalues).real)
    if np.all(moduli > threshold) or det > math.exp(-math.pi):
        return UniquenessCertificate.UNIQUE_PRINCIPAL
    return UniquenessCertificate.AT_MOST_FINITE


def cuthbert_diagnostics(
    A: StochasticMatrix,
    B: GeneratorMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> CuthbertDiagnostics:
    """Evaluate the four conditions det -> trace -> norm -> strip for A = exp(B)."""
    n = A.n
    residual = op_norm(expm(B.values) - A.values)
    if residual > tol.witness * n:
        raise WitnessMismatch(
            f"op_norm(expm(B) - A) = {residual:.3g}",
            {"residual": residual, "limit": tol.witness * n},
        )

    det_A = float(np.linalg.det(A.values))
    trace_B = float(np.trace(B.values))
    beta = B.delta
    norm_B_plus_beta = op_norm(B.values + beta * np.eye(n))
    spectrum = eigen_decompose(B.values, tol).eigenvalues
    strip = bool(np.all(np.abs(spectrum.imag) < math.pi))

    diagnostics = CuthbertDiagnostics(
        det_A=det_A,
        trace_B=trace_B,
        beta=beta,
        norm_B_plus_beta=norm_B_plus_beta,
        spectral_strip_ok=strip,
        conditions=(
            math.exp(-math.pi) < det_A <= 1.0 + tol.row_sum,
            -math.pi < trace_B <= tol.row_sum,
            norm_B_plus_beta < math.pi,
            strip,
        ),
        residual=residual,
    )
    if not diagnostics.chain_holds:
        raise InconsistentDiagnostics(
            f"implication chain violated: {diagnostics.conditions}",
            {"conditions": list(diagnostics.conditions)},
        )
    return diagnostics


def decide_embeddable(
    A: StochasticMatrix,
    tol: Tolerances = DEFAULT_TOLERANCES,
    search: SearchConfig = DEFAULT_SEARCH,
) -> EmbeddabilityVerdict:
    """
    Decide whether A = exp(B) for some Markov generator B.

    A generator found by the principal logarithm or by branch enumeration
    wins; otherwise a failed necessary condition refutes; otherwise an
    exhaustive enumeration without generators refutes; otherwise the
    answer is inconclusive. Never raises for a validated A.
    """
    try:
        battery = tuple(run_battery(A, tol))
    except EmbeddingError as e:
        logger.warning("Battery failed", error=str(e))
        return EmbeddabilityVerdict(status=VerdictStatus.INCONCLUSIVE, reason=f"battery: {e}")

    notes: list[str] = []
    principal: Optional[GeneratorMatrix] = None
    try:
        principal = principal_generator(A, tol)
    except LinalgError as e:
        notes.append(f"principal logarithm: {e}")

    enumeration: Optional[_Enumeration] = None
    try:
        enumeration = _enumerate(A, tol, search)
    except (SearchError, LinalgError) as e:
        notes.append(f"branch enumeration: {e}")

    generators: tuple[LogBranch, ...] = ()
    examined = None
    if enumeration is not None:
        generators = tuple(b for b in enumeration.branches if b.is_generator)
        examined = len(enumeration.branches)
        if enumeration.truncated:
            notes.append(f"branch enumeration truncated at max_offset={search.max_offset}")

    count = max(len(generators), 1 if principal is not None else 0)
    candidates = ([principal] if principal is not None else []) + [b.generator for b in generators]
    unverified = 0
    for candidate in candidates:
        try:
            residual = op_norm(expm(candidate.values) - A.values)
        except LinalgError as e:
            notes.append(f"generator candidate: {e}")
            unverified += 1
            continue
        if residual <= tol.witness * A.n:
            try:
                uniqueness = uniqueness_certificate(A, tol)
            except EmbeddingError:
                uniqueness = UniquenessCertificate.UNKNOWN
            logger.info("Embeddable", n=A.n, generators=count, uniqueness=uniqueness.value)
            return EmbeddabilityVerdict(
                status=VerdictStatus.EMBEDDABLE,
                witness=candidate,
                certificate=uniqueness,
                generator_count_lower_bound=count,
                generators=generators,
                battery=battery,
                branches_examined=examined,
            )
        logger.warning("Generator candidate rejected", residual=residual)
        notes.append(f"generator candidate rejected, residual {residual:.3g}")
        unverified += 1

    failure = first_failure(list(battery))
    if failure is not None:
        logger.info("Not embeddable", n=A.n, check=failure.name)
        return EmbeddabilityVerdict(
            status=VerdictStatus.NOT_EMBEDDABLE,
            certificate=failure,
            battery=battery,
            branches_examined=examined,
        )

    if enumeration is not None and not enumeration.truncated and not unverified:
        logger.info("Not embeddable", n=A.n, branches_examined=examined)
        return EmbeddabilityVerdict(
            status=VerdictStatus.NOT_EMBEDDABLE,
            certificate=ExhaustedEnumeration(branches_examined=examined),
            battery=battery,
            branches_examined=examined,
        )

    reason = "; ".join(notes) or "no generator found and no certificate available"
    logger.info("Inconclusive", n=A.n, reason=reason)
    return EmbeddabilityVerdict(
        status=VerdictStatus.INCONCLUSIVE,
        reason=reason,
        battery=battery,
        branches_examined=examined,
    )

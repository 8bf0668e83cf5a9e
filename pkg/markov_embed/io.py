"""Matrix file formats: CSV rows or a JSON object with a "matrix" field."""

from pathlib import Path
from typing import Literal, Optional

import numpy as np
import numpy.typing as npt
import structlog
from pydantic import BaseModel, ValidationError

from markov_embed.errors import InputFormatError
from markov_embed.linalg import RealMatrix

logger = structlog.get_logger()

MatrixFormat = Literal["csv", "json"]

FORMATS: tuple[MatrixFormat, ...] = ("csv", "json")


class MatrixDocument(BaseModel):
    """JSON matrix file: {"matrix": [[...], ...]}."""

    matrix: list[list[float]]


def infer_format(path: str | Path, override: Optional[str] = None) -> MatrixFormat:
    """Format from --format if given, else from the file extension."""
    if override:
        fmt = override.lower()
        if fmt not in FORMATS:
            raise InputFormatError(f"unknown matrix format {override!r}", {"format": override})
        return fmt  # type: ignore[return-value]

    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in FORMATS:
        raise InputFormatError(
            f"cannot infer matrix format from {Path(path).name!r}; use --format",
            {"path": str(path)},
        )
    return suffix  # type: ignore[return-value]


def parse_matrix(text: str, fmt: MatrixFormat) -> RealMatrix:
    """Parse matrix text. Shape and finiteness are checked by the validators."""
    if fmt == "json":
        try:
            document = MatrixDocument.model_validate_json(text)
        except ValidationError as e:
            raise InputFormatError(f"invalid JSON matrix: {e.errors()[0]['msg']}") from e
        rows = document.matrix
        if not rows:
            raise InputFormatError("JSON matrix is empty")
        if len({len(row) for row in rows}) != 1:
            raise InputFormatError("JSON matrix rows have different lengths")
        return np.array(rows, dtype=np.float64).reshape(len(rows), -1)

    lines = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise InputFormatError("CSV matrix is empty")
    try:
        return np.loadtxt(lines, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as e:
        raise InputFormatError(f"invalid CSV matrix: {e}") from e


def read_matrix(path: str | Path, fmt: Optional[str] = None) -> RealMatrix:
    """Read a matrix file, inferring the format from its extension."""
    path = Path(path)
    matrix_format = infer_format(path, fmt)
    try:
        text = path.read_text()
    except OSError as e:
        raise InputFormatError(f"cannot read {path}: {e.strerror}", {"path": str(path)}) from e

    matrix = parse_matrix(text, matrix_format)
    logger.debug("Matrix read", path=str(path), format=matrix_format, shape=list(matrix.shape))
    return matrix


def format_matrix(M: npt.ArrayLike, fmt: MatrixFormat) -> str:
    """Serialize at full precision; reading the output back gives the same floats."""
    rows = [[float(x) for x in row] for row in np.asarray(M, dtype=np.float64)]
    if fmt == "json":
        return MatrixDocument(matrix=rows).model_dump_json() + "\n"
    return "".join(",".join(repr(x) for x in row) + "\n" for row in rows)


def write_matrix(M: npt.ArrayLike, path: str | Path, fmt: Optional[str] = None) -> None:
    Path(path).write_text(format_matrix(M, infer_format(path, fmt)))

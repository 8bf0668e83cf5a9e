"""Tests for matrix file formats."""

import numpy as np
import pytest

from markov_embed import catalog
from markov_embed.errors import InputFormatError
from markov_embed.io import format_matrix, infer_format, parse_matrix, read_matrix, write_matrix


class TestInferFormat:
    def test_from_extension(self):
        assert infer_format("a/b/matrix.CSV") == "csv"
        assert infer_format("matrix.json") == "json"

    def test_override(self):
        assert infer_format("matrix.txt", "JSON") == "json"

    def test_unknown_extension(self):
        with pytest.raises(InputFormatError):
            infer_format("matrix.txt")

    def test_unknown_override(self):
        with pytest.raises(InputFormatError):
            infer_format("matrix.csv", "xml")


class TestParse:
    def test_csv(self):
        M = parse_matrix("0.3,0.7\n0.6,0.4\n", "csv")
        np.testing.assert_array_equal(M, [[0.3, 0.7], [0.6, 0.4]])

    def test_csv_comments_and_blank_lines(self):
        M = parse_matrix("# generator\n\n-1,1\n2,-2\n", "csv")
        assert M.shape == (2, 2)

    def test_csv_single_entry(self):
        assert parse_matrix("1.0\n", "csv").shape == (1, 1)

    def test_csv_garbage(self):
        with pytest.raises(InputFormatError):
            parse_matrix("a,b\nc,d\n", "csv")

    def test_csv_empty(self):
        with pytest.raises(InputFormatError):
            parse_matrix("\n", "csv")

    def test_json(self):
        M = parse_matrix('{"matrix": [[1, 0], [0.5, 0.5]]}', "json")
        np.testing.assert_array_equal(M, [[1.0, 0.0], [0.5, 0.5]])

    def test_json_missing_field(self):
        with pytest.raises(InputFormatError):
            parse_matrix('{"rows": [[1]]}', "json")

    def test_json_ragged(self):
        with pytest.raises(InputFormatError):
            parse_matrix('{"matrix": [[1, 0], [1]]}', "json")


class TestFullPrecision:
    """Written matrices read back to the same floats."""

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_exact_floats(self, fmt):
        M = catalog.twogen_matrix().values
        np.testing.assert_array_equal(parse_matrix(format_matrix(M, fmt), fmt), M)

    def test_write_and_read(self, tmp_path):
        path = tmp_path / "m.json"
        write_matrix(np.eye(2) / 3.0, path)
        np.testing.assert_array_equal(read_matrix(path), np.eye(2) / 3.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFormatError):
            read_matrix(tmp_path / "absent.csv")

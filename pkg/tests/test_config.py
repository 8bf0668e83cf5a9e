"""Tests for configuration loading."""

import importlib

import pytest
import structlog
import yaml
from pydantic import ValidationError

import markov_embed
from markov_embed import catalog
from markov_embed.config import (
    DEFAULT_SEARCH,
    DEFAULT_TOLERANCES,
    AnalysisConfig,
    Settings,
    Tolerances,
    get_default_config,
    load_config,
)
from markov_embed.search import decide_embeddable


class TestDefaults:
    def test_default_tolerances(self):
        assert DEFAULT_TOLERANCES.row_sum == 1e-9
        assert DEFAULT_TOLERANCES.entry == 1e-12
        assert DEFAULT_TOLERANCES.separation == 1e-8
        assert DEFAULT_TOLERANCES.axis == 1e-10
        assert DEFAULT_TOLERANCES.reality == 1e-8
        assert DEFAULT_TOLERANCES.sector == 1e-9

    def test_default_search(self):
        assert DEFAULT_SEARCH.max_offset == 64

    def test_default_dict_matches_models(self):
        config = AnalysisConfig.model_validate(get_default_config())
        assert config.tolerances == DEFAULT_TOLERANCES
        assert config.search == DEFAULT_SEARCH


class TestValidation:
    def test_tolerances_must_be_positive(self):
        with pytest.raises(ValidationError):
            Tolerances(row_sum=0.0)

    def test_tolerances_are_frozen(self):
        with pytest.raises(ValidationError):
            DEFAULT_TOLERANCES.row_sum = 1.0


class TestLoadConfig:
    def test_missing_file_gives_defaults(self, tmp_path):
        config = load_config(str(tmp_path / "absent.yaml"))
        assert config.tolerances == DEFAULT_TOLERANCES

    def test_partial_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({"tolerances": {"sector": 1e-6}, "search": {"max_offset": 3}}))
        config = load_config(str(path))
        assert config.tolerances.sector == 1e-6
        assert config.tolerances.row_sum == 1e-9
        assert config.search.max_offset == 3

    def test_empty_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("")
        assert load_config(str(path)).search == DEFAULT_SEARCH

    def test_invalid_value(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({"tolerances": {"entry": -1.0}}))
        with pytest.raises(ValidationError):
            load_config(str(path))


class TestSettings:
    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("MARKOV_EMBED_LOG_LEVEL", "DEBUG")
        assert Settings().log_level == "DEBUG"

    def test_no_environment_required(self, monkeypatch):
        monkeypatch.delenv("MARKOV_EMBED_LOG_LEVEL", raising=False)
        assert Settings().log_level == "WARNING"


class TestLibraryLogging:
    """Logging when the package is used without the command line."""

    def test_default_drops_debug_and_info(self, capsys):
        structlog.reset_defaults()
        importlib.reload(markov_embed)
        structlog.get_logger().debug("hidden debug")
        structlog.get_logger().info("hidden info")
        structlog.get_logger().warning("shown warning")
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "hidden" not in captured.err
        assert "shown warning" in captured.err

    def test_analysis_writes_nothing_to_stdout(self, capsys):
        structlog.reset_defaults()
        importlib.reload(markov_embed)
        decide_embeddable(catalog.cyclic_five_matrix())
        assert capsys.readouterr().out == ""

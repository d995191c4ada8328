"""Tests for configuration loading."""

import pytest

from reebvolmin.config import Config, load_config
from reebvolmin.errors import ConfigError


class TestConfigLoading:
    """Test configuration loading."""

    def test_load_config_defaults(self):
        """Unset variables fall back to the defaults."""
        config = load_config()
        assert config == Config()
        assert config.threads is None
        assert config.tolerance == 1e-10
        assert config.max_iterations == 200

    def test_load_config_with_env_vars(self, monkeypatch):
        """Test loading config from environment variables."""
        monkeypatch.setenv("REEBVOLMIN_THREADS", "4")
        monkeypatch.setenv("REEBVOLMIN_TOLERANCE", "1e-8")
        monkeypatch.setenv("REEBVOLMIN_MAX_ITERATIONS", "50")
        monkeypatch.setenv("REEBVOLMIN_COORDINATE_TOLERANCE", "0.001")

        config = load_config()
        assert config.threads == 4
        assert config.tolerance == 1e-8
        assert config.max_iterations == 50
        assert config.coordinate_tolerance == 0.001

    def test_empty_value_uses_default(self, monkeypatch):
        monkeypatch.setenv("REEBVOLMIN_THREADS", "")
        assert load_config().threads is None

    @pytest.mark.parametrize(
        ("name", "value"),
        [
            ("REEBVOLMIN_TOLERANCE", "abc"),
            ("REEBVOLMIN_TOLERANCE", "-1"),
            ("REEBVOLMIN_THREADS", "0"),
            ("REEBVOLMIN_MAX_ITERATIONS", "many"),
        ],
    )
    def test_invalid_values(self, monkeypatch, name, value):
        monkeypatch.setenv(name, value)
        with pytest.raises(ConfigError, match=name):
            load_config()

    def test_dotenv_is_read(self, monkeypatch):
        """load_dotenv runs before the environment is read."""
        calls = []

        def fake_load_dotenv(*_args, **_kwargs):
            calls.append(True)
            monkeypatch.setenv("REEBVOLMIN_THREADS", "2")
            return True

        monkeypatch.setattr("reebvolmin.config.load_dotenv", fake_load_dotenv)
        assert load_config().threads == 2
        assert calls == [True]


class TestOverrides:
    """Test command line overrides."""

    def test_none_keeps_value(self):
        config = Config(tolerance=1e-6)
        assert config.with_overrides(tolerance=None).tolerance == 1e-6

    def test_value_replaces(self):
        config = Config().with_overrides(tolerance=1e-4, threads=3)
        assert config.tolerance == 1e-4
        assert config.threads == 3

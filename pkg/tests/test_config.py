"""Defaults, file parsing, and command-line overrides."""

import math

import pytest

from zkfinger.config import Config, ConfigError, apply_overrides, load_config


class TestDefaults:
    def test_documented_constants(self):
        cfg = Config()
        assert cfg.k == 5
        assert cfg.cx == 4.0
        assert cfg.cy == math.pi / 8
        assert cfg.d_max == 100.0
        assert cfg.p == 60
        assert cfg.bit_width == 20
        assert cfg.threshold == 30
        assert cfg.curve == "bn254"

    def test_validation(self):
        with pytest.raises(ConfigError):
            Config(k=0)
        with pytest.raises(ConfigError):
            Config(threshold=101)
        with pytest.raises(ConfigError):
            Config(curve="bls12-381")
        with pytest.raises(ConfigError):
            Config(cx=-1.0)


class TestFileFormat:
    def test_parse(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text(
            "# grid\nk = 4\ncx = 2.5\nthreshold = 45  # percent\nresize_400 = false\n"
        )
        cfg = load_config(path)
        assert cfg.k == 4
        assert cfg.cx == 2.5
        assert cfg.threshold == 45
        assert cfg.resize_400 is False

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text("mystery = 1\n")
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(path)

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text("k = 5\nthreshold = soon\n")
        with pytest.raises(ConfigError, match=":2:"):
            load_config(path)

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "app.conf"
        path.write_text("threshold 45\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestOverrides:
    def test_none_means_keep(self):
        cfg = apply_overrides(Config(), threshold=None, store_path=None)
        assert cfg == Config()

    def test_replace(self):
        cfg = apply_overrides(Config(), threshold=55)
        assert cfg.threshold == 55
        assert cfg.k == 5

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            apply_overrides(Config(), nope=1)

    def test_override_still_validated(self):
        with pytest.raises(ConfigError):
            apply_overrides(Config(), threshold=400)

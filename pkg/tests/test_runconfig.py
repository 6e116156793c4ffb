"""Tests for runconfig.py — YAML validation, overrides and the config hash."""

from pathlib import Path

import pytest

from exceptions import ConfigError
from runconfig import apply_overrides, config_hash, load_config, parse_config


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# TestParseConfig
# ---------------------------------------------------------------------------

class TestParseConfig:
    """Tests for parse_config() defaults and validation."""

    def test_burgers_defaults(self, tmp_path):
        """A bare burgers config should use Re ~ U with mean 800, cv 0.25 and PCE on."""
        config = parse_config({"problem": "burgers"}, base_dir=tmp_path)
        inputs = config.inputs()
        re = inputs.parameters[0]
        assert inputs.names == ["Re"]
        assert (re.lower + re.upper) / 2 == pytest.approx(800.0)
        assert config.pce_enabled is True
        assert config.hyperparameters.p == (2,)

    def test_ackley_defaults(self, tmp_path):
        """Ackley should have three inputs on [-1, 1] and PCE off."""
        config = parse_config({"problem": "ackley"}, base_dir=tmp_path)
        assert config.inputs().names == ["xi1", "xi2", "xi3"]
        assert config.pce_enabled is False
        assert config.degrees(3) == (2, 2, 2)

    def test_unknown_key_suggests_closest(self, tmp_path):
        """A misspelled key should be rejected with a suggestion."""
        with pytest.raises(ConfigError, match="Did you mean 'eps_s'"):
            parse_config(
                {"problem": "ackley", "hyperparameters": {"epss": 1e-5}}, base_dir=tmp_path
            )

    def test_unknown_top_level_key(self, tmp_path):
        """Top-level typos should name the key."""
        with pytest.raises(ConfigError, match="'sed'"):
            parse_config({"problem": "ackley", "sed": 3}, base_dir=tmp_path)

    @pytest.mark.parametrize("eps", [1.5, 0.0, -1e-3, "abc"])
    def test_rejects_bad_tolerance(self, tmp_path, eps):
        """Tolerances outside (0, 1) should be refused."""
        with pytest.raises(ConfigError, match="eps_t"):
            parse_config(
                {"problem": "burgers", "hyperparameters": {"eps_t": eps}}, base_dir=tmp_path
            )

    def test_string_tolerance_is_coerced(self, tmp_path):
        """YAML loads 1e-10 without a dot as text; it should still parse."""
        path = _write(tmp_path, "problem: burgers\nhyperparameters:\n  eps_s: 1e-10\n")
        assert load_config(path).hyperparameters.eps_s == 1e-10

    def test_unknown_problem(self, tmp_path):
        """Should list the supported problems."""
        with pytest.raises(ConfigError, match="ackley, burgers, external"):
            parse_config({"problem": "heat"}, base_dir=tmp_path)

    def test_external_needs_snapshots_and_inputs(self, tmp_path):
        """External runs must name a snapshot stem and declare inputs."""
        with pytest.raises(ConfigError, match="snapshot stem"):
            parse_config({"problem": "external"}, base_dir=tmp_path)
        with pytest.raises(ConfigError, match="declare their inputs"):
            parse_config({"problem": "external", "snapshots": "data/set"}, base_dir=tmp_path)

    def test_external_resolves_relative_paths(self, tmp_path):
        """Relative snapshot and output paths should resolve against the config directory."""
        config = parse_config(
            {
                "problem": "external",
                "snapshots": "data/set",
                "distribution": {"Re": {"lower": 100, "upper": 300}},
                "output_dir": "out",
            },
            base_dir=tmp_path,
        )
        assert config.snapshots == tmp_path / "data" / "set"
        assert config.output_dir == tmp_path / "out"
        assert config.inputs().parameters[0].upper == 300.0

    def test_mean_cv_and_bounds_exclusive(self, tmp_path):
        """A parameter cannot mix mean/cv with lower/upper."""
        with pytest.raises(ConfigError, match="either mean/cv or lower/upper"):
            parse_config(
                {
                    "problem": "burgers",
                    "distribution": {"Re": {"mean": 200, "cv": 0.25, "lower": 1}},
                },
                base_dir=tmp_path,
            )

    def test_per_dimension_mismatch(self, tmp_path):
        """p with the wrong number of entries should be refused."""
        config = parse_config(
            {"problem": "ackley", "hyperparameters": {"p": [2, 3]}}, base_dir=tmp_path
        )
        with pytest.raises(ConfigError, match="one per dimension"):
            config.degrees(3)

    def test_invalid_yaml(self, tmp_path):
        """Malformed YAML should raise ConfigError, not a parser exception."""
        with pytest.raises(ConfigError, match="not valid YAML"):
            load_config(_write(tmp_path, "problem: [burgers\n"))

    def test_bench_sweep(self, tmp_path):
        """Sweep values should be parsed and validated."""
        config = parse_config(
            {"problem": "burgers", "bench": {"eps": [1e-3, "1e-5"], "nx": [2, 3], "kde": False}},
            base_dir=tmp_path,
        )
        assert config.bench.eps == (1e-3, 1e-5)
        assert config.bench.nx == (2, 3)
        assert config.bench.kde is False


# ---------------------------------------------------------------------------
# TestOverrides
# ---------------------------------------------------------------------------

class TestOverrides:
    """Tests for apply_overrides()."""

    def test_values_replace_config(self, tmp_path):
        """Given overrides should replace the file values; None keeps them."""
        config = parse_config({"problem": "ackley", "seed": 4}, base_dir=tmp_path)
        updated = apply_overrides(config, p=[1], nx=[3, 4, 5], eps_s=1e-6, seed=None, threads=2)
        assert updated.hyperparameters.p == (1,)
        assert updated.elements(3) == (3, 4, 5)
        assert updated.hyperparameters.eps_s == 1e-6
        assert updated.seed == 4
        assert updated.threads == 2

    def test_invalid_override(self, tmp_path):
        """Override values go through the same validation as the file."""
        config = parse_config({"problem": "ackley"}, base_dir=tmp_path)
        with pytest.raises(ConfigError, match="--eps-t"):
            apply_overrides(config, eps_t=2.0)


# ---------------------------------------------------------------------------
# TestConfigHash
# ---------------------------------------------------------------------------

class TestConfigHash:
    """Tests for config_hash()."""

    def test_ignores_threads_and_output_dir(self, tmp_path):
        """Execution-only settings should not change the hash."""
        config = parse_config({"problem": "burgers", "threads": 1}, base_dir=tmp_path)
        other = apply_overrides(config, threads=8, output_dir=tmp_path / "elsewhere")
        assert config_hash(config) == config_hash(other)

    def test_tracks_numerical_settings(self, tmp_path):
        """Changing a tolerance or the seed should change the hash."""
        config = parse_config({"problem": "burgers"}, base_dir=tmp_path)
        assert config_hash(config) != config_hash(apply_overrides(config, eps_t=1e-5))
        assert config_hash(config) != config_hash(apply_overrides(config, seed=1))

    def test_is_hex_sha256(self, tmp_path):
        """Should be a 64-character hex digest."""
        digest = config_hash(parse_config({"problem": "ackley"}, base_dir=tmp_path))
        assert len(digest) == 64
        int(digest, 16)

"""Tests for main.py — subcommands end to end and exit-code mapping."""

from pathlib import Path

import numpy as np
import pytest

from config import EXIT_CONFIG_ERROR, EXIT_IO_ERROR, EXIT_NUMERIC_ERROR, EXIT_OK
from exceptions import ConfigError, NumericalError, SnapshotFormatError, SurrogateFormatError
from export import payload_path, read_csv
from main import exit_code_for, main
from rom import load_surrogate

BURGERS_CONFIG = """\
problem: burgers
distribution:
  Re: {{lower: 120.0, upper: 280.0}}
hyperparameters:
  p: 1
  nx: 2
  eps_t: 1.0e-10
  eps_s: 1.0e-10
baseline:
  pce_order: 2
  reference_samples: 200
bench:
  eps: [1.0e-3, 1.0e-8]
  kde_samples: 500
seed: 5
threads: 1
output_dir: {output}
"""

EXTERNAL_CONFIG = """\
problem: external
snapshots: snaps
distribution:
  Re: {{lower: 120.0, upper: 280.0}}
hyperparameters:
  p: 1
  nx: {nx}
  eps_t: 1.0e-10
  eps_s: 1.0e-10
threads: 1
output_dir: ext
"""


def _config(tmp_path: Path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _build(tmp_path: Path, *extra: str) -> Path:
    config = _config(tmp_path, "burgers.yaml", BURGERS_CONFIG.format(output="out"))
    assert main(["build", config, *extra]) == EXIT_OK
    return tmp_path / "out"


# ---------------------------------------------------------------------------
# TestExitCodes
# ---------------------------------------------------------------------------

class TestExitCodes:
    """Tests for exit_code_for()."""

    @pytest.mark.parametrize("exc, code", [
        (ConfigError("a", "b", "c"), EXIT_CONFIG_ERROR),
        (ValueError("bad"), EXIT_CONFIG_ERROR),
        (FileNotFoundError("gone"), EXIT_IO_ERROR),
        (SnapshotFormatError("s.yaml", "short"), EXIT_IO_ERROR),
        (SurrogateFormatError("s.yaml", "old"), EXIT_IO_ERROR),
        (NumericalError("pod", "zero"), EXIT_NUMERIC_ERROR),
        (np.linalg.LinAlgError("singular"), EXIT_NUMERIC_ERROR),
        (RuntimeError("boom"), 1),
    ])
    def test_mapping(self, exc, code):
        """Should map each failure class to its documented code."""
        assert exit_code_for(exc) == code

    def test_no_command(self):
        """Should print help and return the configuration error code."""
        assert main([]) == EXIT_CONFIG_ERROR

    def test_invalid_config(self, tmp_path):
        """An out-of-range tolerance should exit with code 2."""
        text = "problem: burgers\nhyperparameters:\n  eps_s: 1.5\n"
        config = _config(tmp_path, "bad.yaml", text)
        assert main(["build", config]) == EXIT_CONFIG_ERROR

    def test_missing_surrogate(self, tmp_path):
        """A missing surrogate file should exit with code 3."""
        assert main(["stats", str(tmp_path / "nothing")]) == EXIT_IO_ERROR


# ---------------------------------------------------------------------------
# TestBuildStatsEval
# ---------------------------------------------------------------------------

class TestBuildStatsEval:
    """Tests for the build, stats and eval subcommands."""

    def test_build_writes_surrogate_and_report(self, tmp_path):
        """Should save the surrogate pair and a build report."""
        out = _build(tmp_path)
        assert (out / "surrogate.yaml").is_file()
        assert (out / "surrogate.bin").is_file()
        assert (out / "build_report.yaml").is_file()
        surrogate = load_surrogate(out / "surrogate")
        assert surrogate.problem == "burgers"
        assert surrogate.n_snapshots == 4
        assert len(surrogate.config_hash) == 64

    def test_overrides_reach_the_build(self, tmp_path):
        """--nx should change the element count of the saved surrogate."""
        out = _build(tmp_path, "--nx", "3")
        assert load_surrogate(out / "surrogate").hyperparameters.elements == (3,)

    def test_stats_csv(self, tmp_path):
        """Should write one row per node and time with a provenance header."""
        out = _build(tmp_path)
        assert main(["stats", str(out / "surrogate")]) == EXIT_OK
        text = (out / "stats.csv").read_text()
        assert text.startswith("# config_hash: ")
        assert "# seed: 5" in text
        frame = read_csv(out / "stats.csv")
        assert list(frame.columns) == ["node_id", "x", "time_index", "t", "mean", "std"]
        assert len(frame) == 1000 * 50
        assert (frame["std"] >= 0.0).all()

    def test_stats_is_byte_identical(self, tmp_path):
        """Two stats runs should write identical files."""
        out = _build(tmp_path)
        assert main(["stats", str(out / "surrogate"), "--output", str(tmp_path / "a.csv")]) == 0
        assert main(["stats", str(out / "surrogate"), "--output", str(tmp_path / "b.csv")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_eval_physical_points(self, tmp_path):
        """Each --eta point should give one block of node x time rows."""
        out = _build(tmp_path)
        assert main(["eval", str(out / "surrogate"), "--eta", "150", "--eta", "250"]) == EXIT_OK
        frame = read_csv(out / "eval.csv")
        assert sorted(frame["point"].unique()) == [0, 1]
        assert len(frame) == 2 * 1000 * 50

    def test_eval_needs_points(self, tmp_path):
        """Without --eta or --xi the command should fail with code 2."""
        out = _build(tmp_path)
        assert main(["eval", str(out / "surrogate")]) == EXIT_CONFIG_ERROR

    def test_eval_out_of_support(self, tmp_path):
        """A Reynolds number outside the support should fail with code 2."""
        out = _build(tmp_path)
        assert main(["eval", str(out / "surrogate"), "--eta", "1000"]) == EXIT_CONFIG_ERROR


# ---------------------------------------------------------------------------
# TestIngest
# ---------------------------------------------------------------------------

class TestIngest:
    """Tests for the external snapshot pipeline."""

    def test_matches_in_memory_pipeline(self, tmp_path):
        """Exported then ingested snapshots should give a bit-identical surrogate."""
        out = _build(tmp_path, "--export-snapshots", str(tmp_path / "snaps"))
        config = _config(tmp_path, "external.yaml", EXTERNAL_CONFIG.format(nx=2))
        assert main(["ingest", config]) == EXIT_OK
        assert payload_path(tmp_path / "ext" / "surrogate").read_bytes() == \
            payload_path(out / "surrogate").read_bytes()

        assert main(["stats", str(tmp_path / "ext" / "surrogate")]) == EXIT_OK
        assert main(["stats", str(out / "surrogate")]) == EXIT_OK
        ingested = read_csv(tmp_path / "ext" / "stats.csv")
        in_memory = read_csv(out / "stats.csv")
        assert ingested.equals(in_memory)

    def test_design_mismatch(self, tmp_path):
        """Snapshots from another element count should be refused with code 3."""
        _build(tmp_path, "--export-snapshots", str(tmp_path / "snaps"))
        config = _config(tmp_path, "external.yaml", EXTERNAL_CONFIG.format(nx=3))
        assert main(["ingest", config]) == EXIT_IO_ERROR

    def test_build_delegates_external_configs(self, tmp_path):
        """build on an external config should run the ingest path."""
        _build(tmp_path, "--export-snapshots", str(tmp_path / "snaps"))
        config = _config(tmp_path, "external.yaml", EXTERNAL_CONFIG.format(nx=2))
        assert main(["build", config]) == EXIT_OK
        assert load_surrogate(tmp_path / "ext" / "surrogate").problem == "external"


# ---------------------------------------------------------------------------
# TestBench
# ---------------------------------------------------------------------------

class TestBench:
    """Tests for the bench subcommand on a small Burgers setup."""

    def test_writes_all_tables(self, tmp_path):
        """Should write error, profile, density and timing tables."""
        config = _config(tmp_path, "burgers.yaml", BURGERS_CONFIG.format(output="bench"))
        assert main(["bench", config]) == EXIT_OK
        out = tmp_path / "bench"

        errors = read_csv(out / "errors.csv")
        assert list(errors["method"]) == ["pod-bsbem", "pod-bsbem", "full-pce"]
        assert list(errors["sweep"]) == ["eps", "eps", "pce_order"]
        assert (errors["mean_error"] >= 0.0).all()

        over_time = read_csv(out / "errors_over_time.csv")
        assert len(over_time) == 3 * 50

        profiles = read_csv(out / "profiles.csv")
        assert set(profiles["method"]) == {"reference", "pod-bsbem", "full-pce"}
        assert set(profiles["time_index"]) == {14, 49}

        kde = read_csv(out / "kde.csv")
        assert set(kde["probe"]) == {0, 1}
        assert set(kde["method"]) == {"reference", "pod-bsbem", "full-pce"}

        timings = read_csv(out / "timings.csv")
        assert "speedup_vs_reference" in set(timings["quantity"])

    def test_empty_sweep(self, tmp_path):
        """A bench run without eps or nx values should exit with code 2."""
        text = BURGERS_CONFIG.format(output="bench").replace("  eps: [1.0e-3, 1.0e-8]\n", "")
        config = _config(tmp_path, "burgers.yaml", text)
        assert main(["bench", config]) == EXIT_CONFIG_ERROR

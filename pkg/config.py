"""Central configuration for the POD-BSBEM uncertainty-propagation toolkit.

This module is the single source of truth for all magic values — format
versions, numerical floors, benchmark grids, default hyperparameters and exit
codes. Never hardcode these values elsewhere.

Run-specific settings (problem, distribution, sweep) live in the YAML run
configuration parsed by ``runconfig.py``; the values here are the defaults it
falls back to.
"""

import math
from pathlib import Path
from typing import Final

# ---------------------------------------------------------------------------
# Project paths & versions
# ---------------------------------------------------------------------------

PROJECT_ROOT: Final[Path] = Path(__file__).resolve().parent
DEFAULT_OUTPUT_DIR: Final[Path] = PROJECT_ROOT / "output"

ARTIFACT_VERSION: Final[str] = "1.0.0"

# Bumped whenever the binary layout or the metadata schema changes.
SURROGATE_FORMAT_VERSION: Final[int] = 1
SNAPSHOT_FORMAT_VERSION: Final[int] = 1

# Sidecar / payload suffixes of every file pair written by export.py.
METADATA_SUFFIX: Final[str] = ".yaml"
PAYLOAD_SUFFIX: Final[str] = ".bin"

# Little-endian IEEE-754 double, the only payload dtype.
PAYLOAD_DTYPE: Final[str] = "<f8"

# ---------------------------------------------------------------------------
# Random numbers
# ---------------------------------------------------------------------------

# Bit generator behind every numpy Generator; recorded in all outputs.
RNG_ALGORITHM: Final[str] = "PCG64"
DEFAULT_SEED: Final[int] = 20240101

# ---------------------------------------------------------------------------
# Numerical floors & tolerances
# ---------------------------------------------------------------------------

# Singular values below this fraction of sigma_1 do not count towards N_r.
SINGULAR_VALUE_FLOOR: Final[float] = 1e-14

# Variances more negative than this (relative to the second moment scale)
# are reported before being clamped to zero.
NEGATIVE_VARIANCE_TOLERANCE: Final[float] = 1e-12

# Slack used when checking that a point lies inside a closed element box.
ELEMENT_TOLERANCE: Final[float] = 1e-12

# Relative tolerance when matching an external parameter table against the
# collocation design it is supposed to follow.
DESIGN_MATCH_RTOL: Final[float] = 1e-10

# ---------------------------------------------------------------------------
# Default POD-BSBEM hyperparameters
# ---------------------------------------------------------------------------

DEFAULT_DEGREE: Final[int] = 2
DEFAULT_ELEMENTS: Final[int] = 5
DEFAULT_EPS_T: Final[float] = 1e-10
DEFAULT_EPS_S: Final[float] = 1e-10
DEFAULT_OVERSAMPLE: Final[int] = 1

# Points per block when the surrogate is evaluated at many points at once.
EVAL_CHUNK_SIZE: Final[int] = 4_096

# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

DEFAULT_PCE_ORDER: Final[int] = 6
DEFAULT_PCE_OVERSAMPLING: Final[int] = 2

DEFAULT_REFERENCE_SAMPLES: Final[int] = 100_000

# Reference statistics are accumulated in fixed-size chunks and merged in
# chunk order, so the thread count never changes the result.
REFERENCE_CHUNK_SIZE: Final[int] = 1_000

# Samples drawn from each surrogate for the KDE series.
KDE_SAMPLES: Final[int] = 100_000
KDE_GRID_POINTS: Final[int] = 200

# Silverman rule-of-thumb constants.
SILVERMAN_FACTOR: Final[float] = 0.9
IQR_NORMAL_SCALE: Final[float] = 1.34

# ---------------------------------------------------------------------------
# Built-in problems
# ---------------------------------------------------------------------------

# Stochastic Ackley: [-5, 5]^2 at 160 x 160 nodes, three U[-1, 1] inputs.
ACKLEY_EXTENT: Final[tuple[float, float]] = (-5.0, 5.0)
ACKLEY_NODES: Final[int] = 160
ACKLEY_PARAMETERS: Final[tuple[str, ...]] = ("xi1", "xi2", "xi3")
ACKLEY_PARAMETER_BOUNDS: Final[tuple[float, float]] = (-1.0, 1.0)
ACKLEY_E: Final[float] = math.e

# Viscous Burgers: [0, 1] at 1000 nodes, t_j = j * 0.02 for j = 1..50.
BURGERS_EXTENT: Final[tuple[float, float]] = (0.0, 1.0)
BURGERS_NODES: Final[int] = 1000
BURGERS_TIME_STEPS: Final[int] = 50
BURGERS_DT: Final[float] = 0.02
BURGERS_DEFAULT_MEAN_RE: Final[float] = 800.0
BURGERS_DEFAULT_CV: Final[float] = 0.25

# Figure times and KDE probe locations used by the bench outputs.
BURGERS_PROFILE_TIMES: Final[tuple[float, ...]] = (0.3, 1.0)
BURGERS_KDE_PROBES: Final[tuple[tuple[float, float], ...]] = ((0.57, 0.3), (0.7, 1.0))
ACKLEY_PROFILE_X: Final[float] = 0.0

# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

EXIT_OK: Final[int] = 0
EXIT_CONFIG_ERROR: Final[int] = 2
EXIT_IO_ERROR: Final[int] = 3
EXIT_NUMERIC_ERROR: Final[int] = 4

# Fixed float format keeps CSV outputs byte-identical across runs.
CSV_FLOAT_FORMAT: Final[str] = "%.15e"

LOG_FORMAT: Final[str] = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"

# ---------------------------------------------------------------------------
# Unknown-key suggestions
# ---------------------------------------------------------------------------

# Minimum rapidfuzz ratio (0-100) for "did you mean" hints.
FUZZY_MATCH_THRESHOLD: Final[float] = 70.0

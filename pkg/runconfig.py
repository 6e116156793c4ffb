"""Run configuration: YAML file, validation and command-line overrides.

A run configuration looks like::

    problem: burgers            # ackley | burgers | external
    snapshots: data/burgers     # stem of the snapshot pair (external only)
    distribution:
      Re: {mean: 800, cv: 0.25} # or {lower: ..., upper: ...}
    hyperparameters:
      p: 2                      # scalar or one value per dimension
      nx: 10
      eps_t: 1.0e-10
      eps_s: 1.0e-10
      oversample: 1
    baseline:
      pce: true                 # default: on for burgers only
      pce_order: 6
      pce_oversampling: 2
      reference_scheme: mc      # mc | lhs
      reference_samples: 100000
    bench:
      eps: [1.0e-3, 1.0e-5, 1.0e-10]
      nx: []
      kde: true
    seed: 20240101
    output_dir: output/burgers_800
    threads: 4

Every section is optional. Unknown keys are rejected with a suggestion of
the closest known key.
"""

import dataclasses
import hashlib
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml
from rapidfuzz import process

from config import (
    ACKLEY_PARAMETER_BOUNDS,
    ACKLEY_PARAMETERS,
    BURGERS_DEFAULT_CV,
    BURGERS_DEFAULT_MEAN_RE,
    DEFAULT_DEGREE,
    DEFAULT_ELEMENTS,
    DEFAULT_EPS_S,
    DEFAULT_EPS_T,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_OVERSAMPLE,
    DEFAULT_PCE_ORDER,
    DEFAULT_PCE_OVERSAMPLING,
    DEFAULT_REFERENCE_SAMPLES,
    DEFAULT_SEED,
    FUZZY_MATCH_THRESHOLD,
    KDE_SAMPLES,
)
from exceptions import ConfigError
from export import to_plain
from sampling import DISTRIBUTION_KINDS, UncertainInput, UncertainParameter, bounds_from_moments

logger = logging.getLogger(__name__)

PROBLEMS = ("ackley", "burgers", "external")
REFERENCE_SCHEMES = ("mc", "lhs")

_TOP_KEYS = (
    "problem", "snapshots", "distribution", "hyperparameters",
    "baseline", "bench", "seed", "output_dir", "threads",
)
_SURROGATE_KEYS = ("p", "nx", "eps_t", "eps_s", "oversample")
_BASELINE_KEYS = ("pce", "pce_order", "pce_oversampling", "reference_scheme", "reference_samples")
_BENCH_KEYS = ("eps", "nx", "kde", "kde_samples")
_PARAMETER_KEYS = ("lower", "upper", "mean", "cv", "kind")
_OVERRIDE_KEYS = ("p", "nx", "eps_t", "eps_s", "oversample", "seed", "output_dir", "threads")

# Keys that never change a number in any output.
_HASH_EXCLUDED = ("output_dir", "threads")


@dataclass(frozen=True)
class DistributionSpec:
    """Uncertain inputs declared in the file (empty: problem default)."""

    parameters: tuple[UncertainParameter, ...] = ()


@dataclass(frozen=True)
class SurrogateSpec:
    """Surrogate hyperparameters; p and nx hold one value or one per dimension."""

    p: tuple[int, ...] = (DEFAULT_DEGREE,)
    nx: tuple[int, ...] = (DEFAULT_ELEMENTS,)
    eps_t: float = DEFAULT_EPS_T
    eps_s: float = DEFAULT_EPS_S
    oversample: int = DEFAULT_OVERSAMPLE


@dataclass(frozen=True)
class BaselineSpec:
    pce: bool | None = None
    pce_order: int = DEFAULT_PCE_ORDER
    pce_oversampling: int = DEFAULT_PCE_OVERSAMPLING
    reference_scheme: str = "mc"
    reference_samples: int = DEFAULT_REFERENCE_SAMPLES


@dataclass(frozen=True)
class BenchSpec:
    """Sweep values of the bench command (eps sets eps_t and eps_s together)."""

    eps: tuple[float, ...] = ()
    nx: tuple[int, ...] = ()
    kde: bool = True
    kde_samples: int = KDE_SAMPLES


@dataclass(frozen=True)
class RunConfig:
    problem: str
    snapshots: Path | None = None
    distribution: DistributionSpec = field(default_factory=DistributionSpec)
    hyperparameters: SurrogateSpec = field(default_factory=SurrogateSpec)
    baseline: BaselineSpec = field(default_factory=BaselineSpec)
    bench: BenchSpec = field(default_factory=BenchSpec)
    seed: int = DEFAULT_SEED
    output_dir: Path = DEFAULT_OUTPUT_DIR
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    @property
    def pce_enabled(self) -> bool:
        """Full-PCE runs by default only for the one-dimensional Burgers case."""
        if self.baseline.pce is None:
            return self.problem == "burgers"
        return self.baseline.pce

    def inputs(self) -> UncertainInput:
        """Uncertain inputs of the run: declared ones or the problem default.

        Raises:
            ConfigError: If an external problem declares no inputs.
        """
        if self.distribution.parameters:
            return UncertainInput(self.distribution.parameters)
        if self.problem == "ackley":
            low, high = ACKLEY_PARAMETER_BOUNDS
            return UncertainInput(tuple(
                UncertainParameter(name=name, lower=low, upper=high) for name in ACKLEY_PARAMETERS
            ))
        if self.problem == "burgers":
            lower, upper = bounds_from_moments(BURGERS_DEFAULT_MEAN_RE, BURGERS_DEFAULT_CV)
            return UncertainInput((UncertainParameter(name="Re", lower=lower, upper=upper),))
        raise ConfigError("distribution", "", "external problems must declare their inputs")

    def degrees(self, m: int) -> tuple[int, ...]:
        return _per_dimension("hyperparameters.p", self.hyperparameters.p, m)

    def elements(self, m: int, nx: tuple[int, ...] | None = None) -> tuple[int, ...]:
        return _per_dimension("hyperparameters.nx", nx or self.hyperparameters.nx, m)

    def to_dict(self) -> dict[str, Any]:
        document = dataclasses.asdict(self)
        document["distribution"] = {
            param.name: {"lower": param.lower, "upper": param.upper, "kind": param.kind}
            for param in self.distribution.parameters
        }
        document["snapshots"] = None if self.snapshots is None else str(self.snapshots)
        document["output_dir"] = str(self.output_dir)
        return document


def _per_dimension(name: str, values: tuple[int, ...], m: int) -> tuple[int, ...]:
    if len(values) == 1:
        return values * m
    if len(values) != m:
        raise ConfigError(name, str(list(values)), f"give one value or one per dimension ({m})")
    return values


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------


def _reject_unknown(section: str, document: dict[str, Any], known: tuple[str, ...]) -> None:
    for key in document:
        if key in known:
            continue
        match = process.extractOne(str(key), known, score_cutoff=FUZZY_MATCH_THRESHOLD)
        hint = f" Did you mean '{match[0]}'?" if match else ""
        name = f"{section}.{key}" if section else str(key)
        raise ConfigError(name, str(document[key]), f"Unknown key.{hint}")


def _section(document: dict[str, Any], key: str, known: tuple[str, ...]) -> dict[str, Any]:
    value = document.get(key) or {}
    if not isinstance(value, dict):
        raise ConfigError(key, str(value), "expected a mapping")
    _reject_unknown(key, value, known)
    return value


def _as_float(name: str, value: Any) -> float:
    # YAML 1.1 loads 1e-10 (no dot) as a string.
    if isinstance(value, bool):
        raise ConfigError(name, str(value), "expected a number")
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, str(value), "expected a number") from exc


def _as_int(name: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(name, str(value), "expected an integer")
    try:
        number = int(value)
    except ValueError as exc:
        raise ConfigError(name, str(value), "expected an integer") from exc
    if number < minimum:
        raise ConfigError(name, str(value), f"must be >= {minimum}")
    return number


def _as_tolerance(name: str, value: Any) -> float:
    eps = _as_float(name, value)
    if not 0.0 < eps < 1.0:
        raise ConfigError(name, str(value), "energy tolerance must lie in (0, 1)")
    return eps


def _as_int_tuple(name: str, value: Any, minimum: int) -> tuple[int, ...]:
    items = value if isinstance(value, list) else [value]
    if not items:
        raise ConfigError(name, str(value), "expected at least one value")
    return tuple(_as_int(name, item, minimum) for item in items)


def _as_bool(name: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(name, str(value), "expected true or false")
    return value


def _parse_parameter(name: str, entry: Any) -> UncertainParameter:
    field_name = f"distribution.{name}"
    if not isinstance(entry, dict):
        raise ConfigError(field_name, str(entry), "expected a mapping")
    _reject_unknown(field_name, entry, _PARAMETER_KEYS)
    kind = str(entry.get("kind", "uniform"))
    if kind not in DISTRIBUTION_KINDS:
        supported = ", ".join(DISTRIBUTION_KINDS)
        raise ConfigError(f"{field_name}.kind", kind, f"supported kinds: {supported}")
    if "mean" in entry or "cv" in entry:
        if "lower" in entry or "upper" in entry:
            raise ConfigError(field_name, str(entry), "give either mean/cv or lower/upper")
        try:
            lower, upper = bounds_from_moments(
                _as_float(f"{field_name}.mean", entry.get("mean")),
                _as_float(f"{field_name}.cv", entry.get("cv")),
            )
        except ValueError as exc:
            raise ConfigError(field_name, str(entry), str(exc)) from exc
    else:
        lower = _as_float(f"{field_name}.lower", entry.get("lower"))
        upper = _as_float(f"{field_name}.upper", entry.get("upper"))
    try:
        return UncertainParameter(name=str(name), lower=lower, upper=upper, kind=kind)
    except ValueError as exc:
        raise ConfigError(field_name, str(entry), str(exc)) from exc


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def parse_config(document: dict[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Validate a configuration mapping and build the ``RunConfig``.

    Args:
        document: The parsed YAML mapping.
        base_dir: Directory relative paths are resolved against.

    Raises:
        ConfigError: On the first unknown key or invalid value.
    """
    if not isinstance(document, dict):
        raise ConfigError("<root>", str(document), "expected a mapping")
    _reject_unknown("", document, _TOP_KEYS)
    base_dir = base_dir or Path.cwd()

    problem = document.get("problem")
    if problem not in PROBLEMS:
        raise ConfigError("problem", str(problem), f"choose one of {', '.join(PROBLEMS)}")
    snapshots = document.get("snapshots")
    if problem == "external" and not snapshots:
        raise ConfigError("snapshots", str(snapshots), "external problems need a snapshot stem")
    if problem != "external" and snapshots:
        raise ConfigError("snapshots", str(snapshots), "only external problems read snapshots")

    dist = document.get("distribution") or {}
    if not isinstance(dist, dict):
        raise ConfigError("distribution", str(dist), "expected a mapping")
    parameters = tuple(_parse_parameter(name, entry) for name, entry in dist.items())

    hyper = _section(document, "hyperparameters", _SURROGATE_KEYS)
    defaults = SurrogateSpec()
    surrogate = SurrogateSpec(
        p=_as_int_tuple("hyperparameters.p", hyper.get("p", list(defaults.p)), 1),
        nx=_as_int_tuple("hyperparameters.nx", hyper.get("nx", list(defaults.nx)), 1),
        eps_t=_as_tolerance("hyperparameters.eps_t", hyper.get("eps_t", defaults.eps_t)),
        eps_s=_as_tolerance("hyperparameters.eps_s", hyper.get("eps_s", defaults.eps_s)),
        oversample=_as_int(
            "hyperparameters.oversample", hyper.get("oversample", defaults.oversample), 1
        ),
    )

    base = _section(document, "baseline", _BASELINE_KEYS)
    scheme = base.get("reference_scheme", "mc")
    if scheme not in REFERENCE_SCHEMES:
        raise ConfigError(
            "baseline.reference_scheme", str(scheme),
            f"choose one of {', '.join(REFERENCE_SCHEMES)}",
        )
    baseline = BaselineSpec(
        pce=None if base.get("pce") is None else _as_bool("baseline.pce", base["pce"]),
        pce_order=_as_int("baseline.pce_order", base.get("pce_order", DEFAULT_PCE_ORDER), 0),
        pce_oversampling=_as_int(
            "baseline.pce_oversampling", base.get("pce_oversampling", DEFAULT_PCE_OVERSAMPLING), 1
        ),
        reference_scheme=scheme,
        reference_samples=_as_int(
            "baseline.reference_samples",
            base.get("reference_samples", DEFAULT_REFERENCE_SAMPLES),
            2,
        ),
    )

    sweep = _section(document, "bench", _BENCH_KEYS)
    bench = BenchSpec(
        eps=tuple(_as_tolerance("bench.eps", eps) for eps in sweep.get("eps") or []),
        nx=tuple(_as_int("bench.nx", nx, 1) for nx in sweep.get("nx") or []),
        kde=_as_bool("bench.kde", sweep.get("kde", True)),
        kde_samples=_as_int("bench.kde_samples", sweep.get("kde_samples", KDE_SAMPLES), 2),
    )

    output_dir = Path(document.get("output_dir") or DEFAULT_OUTPUT_DIR)
    config = RunConfig(
        problem=problem,
        snapshots=None if not snapshots else _resolve(base_dir, snapshots),
        distribution=DistributionSpec(parameters),
        hyperparameters=surrogate,
        baseline=baseline,
        bench=bench,
        seed=_as_int("seed", document.get("seed", DEFAULT_SEED), 0),
        output_dir=_resolve(base_dir, output_dir),
        threads=_as_int("threads", document.get("threads", os.cpu_count() or 1), 1),
    )
    config.inputs()
    return config


def _resolve(base_dir: Path, path: str | Path) -> Path:
    path = Path(path)
    return path if path.is_absolute() else base_dir / path


def load_config(path: Path) -> RunConfig:
    """Read and validate a YAML run configuration.

    Raises:
        OSError: If the file cannot be read.
        ConfigError: If it is not valid YAML or fails validation.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        document = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", str(path), f"not valid YAML ({exc})") from exc
    config = parse_config(document, base_dir=Path(path).resolve().parent)
    logger.info("Loaded run config %s (problem=%s)", path, config.problem)
    return config


def apply_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Return *config* with command-line values (those not None) applied.

    Accepted keys: ``p``, ``nx``, ``eps_t``, ``eps_s``, ``oversample``,
    ``seed``, ``output_dir``, ``threads``.

    Raises:
        ConfigError: If an override value is invalid.
    """
    given = {key: value for key, value in overrides.items() if value is not None}
    hyper = config.hyperparameters
    if "p" in given:
        hyper = dataclasses.replace(hyper, p=_as_int_tuple("--p", list(given["p"]), 1))
    if "nx" in given:
        hyper = dataclasses.replace(hyper, nx=_as_int_tuple("--nx", list(given["nx"]), 1))
    if "eps_t" in given:
        hyper = dataclasses.replace(hyper, eps_t=_as_tolerance("--eps-t", given["eps_t"]))
    if "eps_s" in given:
        hyper = dataclasses.replace(hyper, eps_s=_as_tolerance("--eps-s", given["eps_s"]))
    if "oversample" in given:
        oversample = _as_int("--oversample", given["oversample"], 1)
        hyper = dataclasses.replace(hyper, oversample=oversample)

    changes: dict[str, Any] = {"hyperparameters": hyper}
    if "seed" in given:
        changes["seed"] = _as_int("--seed", given["seed"], 0)
    if "output_dir" in given:
        changes["output_dir"] = Path(given["output_dir"])
    if "threads" in given:
        changes["threads"] = _as_int("--threads", given["threads"], 1)
    unknown = set(given) - set(_OVERRIDE_KEYS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], str(given[sorted(unknown)[0]]), "not an override")
    return dataclasses.replace(config, **changes)


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical YAML dump, without output_dir and threads."""
    document = config.to_dict()
    for key in _HASH_EXCLUDED:
        document.pop(key, None)
    canonical = yaml.safe_dump(to_plain(document), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

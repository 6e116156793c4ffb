#!/usr/bin/env python3
"""Command-line driver for the POD-BSBEM uncertainty-propagation toolkit.

Subcommands::

    build    Run the offline stage for a configured problem and save the surrogate.
    stats    Mean/std CSV of a saved surrogate over the space-time grid.
    bench    Surrogate(s), Full-PCE and a sampled reference; error tables,
             cross sections, output densities and wall times as CSV.
    eval     Evaluate a saved surrogate at given parameter points.
    ingest   Validate an external snapshot set and build a surrogate from it.

Usage::

    python main.py build configs/burgers_800.yaml
    python main.py build configs/burgers_800.yaml --export-snapshots data/burgers_800
    python main.py stats output/burgers_800/surrogate
    python main.py bench configs/ackley.yaml --threads 8
    python main.py eval output/burgers_800/surrogate --eta 750 --eta 900
    python main.py ingest configs/external.yaml

Every CSV starts with ``# key: value`` lines holding the config hash, the seed
and the artifact version. Exit codes: 0 success, 2 configuration error, 3
file error, 4 numerical failure.
"""

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from baselines import (
    PceExpansion,
    ReferenceStatistics,
    pce_evaluate,
    pce_fit,
    pce_statistics,
    reference_statistics,
)
from config import (
    ARTIFACT_VERSION,
    EXIT_CONFIG_ERROR,
    EXIT_IO_ERROR,
    EXIT_NUMERIC_ERROR,
    EXIT_OK,
    KDE_GRID_POINTS,
    LOG_FORMAT,
    RNG_ALGORITHM,
)
from exceptions import ConfigError, NumericalError, SnapshotFormatError, SurrogateFormatError
from export import dump_yaml, write_csv
from metrics import ErrorReport, error_report, gaussian_kde, kde_grid, silverman_bandwidth
from pod import SnapshotMatrix
from problems import (
    GridSpec,
    Problem,
    ackley_problem,
    burgers_problem,
    export_snapshots,
    ingest_snapshots,
)
from rom import (
    BuildTimings,
    CollocationDesign,
    Hyperparameters,
    StatisticsField,
    Surrogate,
    check_design,
    collocation_design,
    evaluate_batch,
    evaluate_scalar_spline,
    load_surrogate,
    offline_from_snapshots,
    probe_spline,
    sample_snapshots,
    save_surrogate,
    statistics,
)
from runconfig import RunConfig, apply_overrides, config_hash, load_config
from sampling import UncertainInput, make_rng, to_unit
from splines import build_space

logger = logging.getLogger(__name__)

SURROGATE_STEM = "surrogate"

# LinAlgError subclasses ValueError, so numeric failures are matched first.
EXIT_CODES: tuple[tuple[tuple[type[BaseException], ...], int], ...] = (
    ((NumericalError, np.linalg.LinAlgError), EXIT_NUMERIC_ERROR),
    ((OSError, SnapshotFormatError, SurrogateFormatError), EXIT_IO_ERROR),
    ((ConfigError, ValueError), EXIT_CONFIG_ERROR),
)


def exit_code_for(exc: BaseException) -> int:
    """Exit code of an exception class (1 for anything unexpected)."""
    for classes, code in EXIT_CODES:
        if isinstance(exc, classes):
            return code
    return 1


# ---------------------------------------------------------------------------
# Shared wiring
# ---------------------------------------------------------------------------


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(Path(args.config))
    return apply_overrides(
        config,
        p=args.p,
        nx=args.nx,
        eps_t=args.eps_t,
        eps_s=args.eps_s,
        oversample=args.oversample,
        seed=args.seed,
        output_dir=args.output_dir,
        threads=args.threads,
    )


def problem_for(config: RunConfig) -> Problem:
    """Built-in problem of *config* carrying the configured inputs.

    Raises:
        ConfigError: For external problems or an input count the model
            cannot take.
    """
    inputs = config.inputs()
    if config.problem == "ackley":
        if inputs.m != 3:
            raise ConfigError("distribution", str(inputs.names), "ackley takes 3 inputs")
        return dataclasses.replace(ackley_problem(), inputs=inputs)
    if config.problem == "burgers":
        if inputs.m != 1:
            raise ConfigError("distribution", str(inputs.names), "burgers takes 1 input (Re)")
        param = inputs.parameters[0]
        return dataclasses.replace(burgers_problem(param.lower, param.upper), inputs=inputs)
    raise ConfigError("problem", config.problem, "this command needs a built-in problem")


def csv_header(config_digest: str, seed: int, **extra: Any) -> dict[str, Any]:
    return {
        "config_hash": config_digest,
        "seed": seed,
        "artifact_version": ARTIFACT_VERSION,
        "rng": RNG_ALGORITHM,
        **extra,
    }


def hyperparameters_for(
    config: RunConfig,
    elements: tuple[int, ...],
    eps_t: float,
    eps_s: float,
) -> Hyperparameters:
    m = len(elements)
    return Hyperparameters(
        eps_t=eps_t,
        eps_s=eps_s,
        degrees=config.degrees(m),
        elements=elements,
        oversample=config.hyperparameters.oversample,
        seed=config.seed,
    )


@dataclasses.dataclass
class TrainingSet:
    """Collocation design and snapshots for one element count."""

    design: CollocationDesign
    snapshots: SnapshotMatrix
    sampling_time: float
    evaluation_time: float


def training_set(problem: Problem, config: RunConfig, elements: tuple[int, ...]) -> TrainingSet:
    space = build_space(config.degrees(len(elements)), elements)
    started = time.perf_counter()
    design = collocation_design(space, config.hyperparameters.oversample, problem.inputs)
    sampled = time.perf_counter()
    snapshots = sample_snapshots(problem.evaluate, design, config.threads)
    return TrainingSet(
        design=design,
        snapshots=snapshots,
        sampling_time=sampled - started,
        evaluation_time=time.perf_counter() - sampled,
    )


def train(
    problem: Problem,
    config: RunConfig,
    data: TrainingSet,
    hyper: Hyperparameters,
    digest: str,
) -> Surrogate:
    timings = BuildTimings(sampling=data.sampling_time, model_evaluation=data.evaluation_time)
    surrogate = offline_from_snapshots(
        data.snapshots,
        data.design,
        problem.inputs,
        build_space(hyper.degrees, hyper.elements),
        hyper,
        problem.times,
        threads=config.threads,
        problem=problem.name,
        grid=problem.grid,
        timings=timings,
    )
    return dataclasses.replace(surrogate, config_hash=digest)


def write_build_report(path: Path, surrogate: Surrogate, digest: str) -> Path:
    report = {
        "config_hash": digest,
        "artifact_version": ARTIFACT_VERSION,
        "problem": surrogate.problem,
        "seed": surrogate.hyperparameters.seed,
        "n_snapshots": surrogate.n_snapshots,
        "n_modes": surrogate.n_modes,
        "temporal_ranks": list(surrogate.temporal.ranks),
        "n_global": surrogate.space.n_global,
        "pod_energy": surrogate.basis.energy,
        "rank_deficient": surrogate.rank_deficient,
        "wall_times": dataclasses.asdict(surrogate.timings) | {"total": surrogate.timings.total},
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_yaml(report), encoding="utf-8")
    logger.info(
        "Build report: N_s=%d, L=%d, K_l=%s, offline %.2fs",
        surrogate.n_snapshots, surrogate.n_modes, list(surrogate.temporal.ranks),
        surrogate.timings.total,
    )
    return path


def node_columns(grid: GridSpec | None, n_nodes: int, nodes: np.ndarray) -> dict[str, np.ndarray]:
    """``node_id`` plus one coordinate column per axis (when the grid is known)."""
    columns: dict[str, np.ndarray] = {"node_id": nodes}
    if grid is not None and grid.n_nodes == n_nodes:
        coords = grid.coordinates()[nodes]
        for axis, name in zip(range(coords.shape[1]), ("x", "y", "z")):
            columns[name] = coords[:, axis]
    return columns


def field_frame(
    grid: GridSpec | None,
    times: np.ndarray,
    columns: dict[str, np.ndarray],
    nodes: np.ndarray | None = None,
    time_indices: tuple[int, ...] | None = None,
) -> pd.DataFrame:
    """Long table of ``(n_nodes, n_times)`` fields; node fastest, then time."""
    n_nodes = next(iter(columns.values())).shape[0]
    nodes = np.arange(n_nodes) if nodes is None else np.asarray(nodes)
    time_indices = tuple(range(times.shape[0])) if time_indices is None else time_indices
    blocks = []
    for j in time_indices:
        block = node_columns(grid, n_nodes, nodes)
        block["time_index"] = np.full(nodes.shape[0], j)
        block["t"] = np.full(nodes.shape[0], times[j])
        for name, values in columns.items():
            block[name] = values[nodes, j]
        blocks.append(pd.DataFrame(block))
    return pd.concat(blocks, ignore_index=True)


# ---------------------------------------------------------------------------
# build / ingest
# ---------------------------------------------------------------------------


def cmd_build(args: argparse.Namespace) -> int:
    """Offline stage for the configured problem; external configs are ingested."""
    config = resolve_config(args)
    if config.problem == "external":
        return ingest(config, config.snapshots)
    digest = config_hash(config)
    problem = problem_for(config)
    elements = config.elements(problem.inputs.m)
    data = training_set(problem, config, elements)
    hyper = hyperparameters_for(
        config, elements, config.hyperparameters.eps_t, config.hyperparameters.eps_s
    )
    surrogate = train(problem, config, data, hyper, digest)

    if args.export_snapshots:
        export_snapshots(
            args.export_snapshots,
            data.snapshots,
            data.design.samples.physical_points,
            problem.inputs.names,
            problem.times,
            problem.grid,
        )
    save_surrogate(surrogate, config.output_dir / SURROGATE_STEM)
    write_build_report(config.output_dir / "build_report.yaml", surrogate, digest)
    return EXIT_OK


def ingest(config: RunConfig, stem: Path | None) -> int:
    """Validate an external snapshot set and build a surrogate from it.

    Raises:
        SnapshotFormatError: If the set does not follow the configured
            collocation design.
    """
    if stem is None:
        raise ConfigError("snapshots", "", "ingest needs a snapshot stem")
    digest = config_hash(config)
    external = ingest_snapshots(stem)
    inputs: UncertainInput = config.inputs()
    if inputs.m != len(external.parameter_names):
        raise ConfigError(
            "distribution", str(inputs.names),
            f"snapshot set declares parameters {list(external.parameter_names)}",
        )
    elements = config.elements(inputs.m)
    hyper = hyperparameters_for(
        config, elements, config.hyperparameters.eps_t, config.hyperparameters.eps_s
    )
    space = build_space(hyper.degrees, hyper.elements)
    design = collocation_design(space, hyper.oversample, inputs)
    try:
        check_design(design, external.parameters)
    except ValueError as exc:
        raise SnapshotFormatError(external.path, str(exc)) from exc

    surrogate = offline_from_snapshots(
        external.snapshots, design, inputs, space, hyper, external.times,
        threads=config.threads, problem="external", grid=external.grid,
    )
    surrogate = dataclasses.replace(surrogate, config_hash=digest)
    save_surrogate(surrogate, config.output_dir / SURROGATE_STEM)
    write_build_report(config.output_dir / "build_report.yaml", surrogate, digest)
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    stem = Path(args.snapshots) if args.snapshots else config.snapshots
    return ingest(config, stem)


# ---------------------------------------------------------------------------
# stats / eval
# ---------------------------------------------------------------------------


def cmd_stats(args: argparse.Namespace) -> int:
    """Mean/std CSV of a saved surrogate."""
    surrogate = load_surrogate(args.surrogate)
    moments = statistics(surrogate, args.points_per_dim)
    frame = field_frame(
        surrogate.grid, surrogate.times, {"mean": moments.mean, "std": moments.std}
    )
    output = Path(args.output) if args.output else Path(args.surrogate).parent / "stats.csv"
    write_csv(output, frame, csv_header(surrogate.config_hash, surrogate.hyperparameters.seed))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """Evaluate a saved surrogate at physical (--eta) or unit (--xi) points."""
    surrogate = load_surrogate(args.surrogate)
    if bool(args.eta) == bool(args.xi):
        raise ConfigError("eval", "", "give either --eta or --xi points")
    if args.eta:
        points = to_unit(surrogate.inputs, np.array(args.eta, dtype=float))
    else:
        points = np.array(args.xi, dtype=float)
    b_hat = evaluate_batch(surrogate, points)

    blocks = []
    for k, block in enumerate(b_hat):
        frame = field_frame(
            surrogate.grid, surrogate.times, {"value": surrogate.basis.modes @ block}
        )
        frame.insert(0, "point", k)
        blocks.append(frame)
    output = Path(args.output) if args.output else Path(args.surrogate).parent / "eval.csv"
    write_csv(
        output,
        pd.concat(blocks, ignore_index=True),
        csv_header(surrogate.config_hash, surrogate.hyperparameters.seed),
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def error_rows(
    report: ErrorReport,
    sweep: str,
    value: float,
) -> tuple[dict[str, Any], pd.DataFrame]:
    row = {
        "method": report.method,
        "sweep": sweep,
        "value": value,
        **report.metadata,
        "mean_error": report.mean_max,
        "std_error": report.std_max,
    }
    series = pd.DataFrame({
        "method": report.method,
        "sweep": sweep,
        "value": value,
        "time_index": np.arange(report.times.shape[0]),
        "t": report.times,
        "mean_error": report.mean_errors,
        "std_error": report.std_errors,
    })
    return row, series


def surrogate_metadata(surrogate: Surrogate) -> dict[str, Any]:
    hyper = surrogate.hyperparameters
    return {
        "eps_t": hyper.eps_t,
        "eps_s": hyper.eps_s,
        "nx": "x".join(str(n) for n in hyper.elements),
        "n_samples": surrogate.n_snapshots,
        "n_modes": surrogate.n_modes,
        "rank_deficient": surrogate.rank_deficient,
    }


def profile_frame(
    problem: Problem,
    fields: dict[str, StatisticsField | ReferenceStatistics],
) -> pd.DataFrame:
    blocks = []
    nodes = problem.profile_nodes
    for method, moments in fields.items():
        frame = field_frame(
            problem.grid, problem.times, {"mean": moments.mean, "std": moments.std},
            nodes=nodes, time_indices=problem.profile_times,
        )
        frame.insert(0, "method", method)
        blocks.append(frame)
    return pd.concat(blocks, ignore_index=True)


def kde_frame(
    problem: Problem,
    reference: ReferenceStatistics,
    surrogate: Surrogate,
    pce: PceExpansion | None,
    n_samples: int,
    seed: int,
) -> pd.DataFrame:
    """Density series of every method at each probe on a shared grid."""
    points = make_rng(seed).random((n_samples, problem.inputs.m))
    coords = problem.grid.coordinates()
    blocks = []
    for j, (node, time_index) in enumerate(problem.kde_probes):
        samples = {"reference": reference.probe_values[:, j]}
        coefficients = probe_spline(surrogate, node, time_index)
        samples["pod-bsbem"] = evaluate_scalar_spline(surrogate.space, coefficients, points)
        if pce is not None:
            samples["full-pce"] = pce_evaluate(pce, points, probe=(node, time_index))
        grid = kde_grid(samples["reference"], KDE_GRID_POINTS)
        for method, values in samples.items():
            blocks.append(pd.DataFrame({
                "probe": j,
                "node_id": node,
                "x": coords[node, 0],
                "t": problem.times[time_index],
                "method": method,
                "n_samples": values.shape[0],
                "bandwidth": silverman_bandwidth(values),
                "value": grid,
                "density": gaussian_kde(values, grid),
            }))
    return pd.concat(blocks, ignore_index=True)


def cmd_bench(args: argparse.Namespace) -> int:
    """Error tables against a sampled reference, plus figure series."""
    config = resolve_config(args)
    if not config.bench.eps and not config.bench.nx:
        raise ConfigError("bench", "", "the sweep needs at least one eps or nx value")
    digest = config_hash(config)
    problem = problem_for(config)
    m = problem.inputs.m
    out = config.output_dir
    timings: list[dict[str, Any]] = []

    started = time.perf_counter()
    reference = reference_statistics(
        problem.evaluate,
        problem.inputs,
        config.baseline.reference_samples,
        config.baseline.reference_scheme,
        config.seed,
        probes=problem.kde_probes,
        threads=config.threads,
    )
    reference_time = time.perf_counter() - started
    timings.append({"quantity": "reference", "value": reference_time, "unit": "s"})

    cache: dict[tuple[int, ...], TrainingSet] = {}

    def data_for(elements: tuple[int, ...]) -> TrainingSet:
        if elements not in cache:
            cache[elements] = training_set(problem, config, elements)
        return cache[elements]

    rows: list[dict[str, Any]] = []
    series: list[pd.DataFrame] = []
    base_elements = config.elements(m)
    sweeps = [("eps", eps, base_elements, eps, eps) for eps in config.bench.eps]
    sweeps += [
        ("nx", nx, config.elements(m, (nx,)),
         config.hyperparameters.eps_t, config.hyperparameters.eps_s)
        for nx in config.bench.nx
    ]
    for sweep, value, elements, eps_t, eps_s in sweeps:
        hyper = hyperparameters_for(config, elements, eps_t, eps_s)
        surrogate = train(problem, config, data_for(elements), hyper, digest)
        report = error_report(
            "pod-bsbem", statistics(surrogate), reference, problem.times,
            surrogate_metadata(surrogate),
        )
        row, frame = error_rows(report, sweep, value)
        rows.append(row)
        series.append(frame)

    hyper = hyperparameters_for(
        config, base_elements, config.hyperparameters.eps_t, config.hyperparameters.eps_s
    )
    nominal = train(problem, config, data_for(base_elements), hyper, digest)
    started = time.perf_counter()
    nominal_stats = statistics(nominal)
    online_time = time.perf_counter() - started
    for stage, seconds in dataclasses.asdict(nominal.timings).items():
        timings.append({"quantity": f"offline_{stage}", "value": seconds, "unit": "s"})
    timings.append({"quantity": "online_statistics", "value": online_time, "unit": "s"})
    surrogate_time = nominal.timings.total + online_time
    timings.append({"quantity": "pod_bsbem_total", "value": surrogate_time, "unit": "s"})
    timings.append({
        "quantity": "speedup_vs_reference",
        "value": reference_time / surrogate_time,
        "unit": "ratio",
    })

    profiles: dict[str, StatisticsField | ReferenceStatistics] = {
        "reference": reference, "pod-bsbem": nominal_stats,
    }
    pce = None
    if config.pce_enabled:
        started = time.perf_counter()
        pce = pce_fit(
            problem.evaluate, problem.inputs, config.baseline.pce_order,
            config.baseline.pce_oversampling, config.seed, threads=config.threads,
        )
        pce_moments = pce_statistics(pce)
        pce_time = time.perf_counter() - started
        timings.append({"quantity": "full_pce", "value": pce_time, "unit": "s"})
        report = error_report(
            "full-pce", pce_moments, reference, problem.times,
            {"order": pce.order, "oversampling": pce.oversampling, "n_samples": pce.n_samples},
        )
        row, frame = error_rows(report, "pce_order", pce.order)
        rows.append(row)
        series.append(frame)
        profiles["full-pce"] = pce_moments

    header = csv_header(
        digest, config.seed,
        reference=f"{reference.scheme}:{reference.n_samples}",
    )
    write_csv(out / "errors.csv", pd.DataFrame(rows), header)
    write_csv(out / "errors_over_time.csv", pd.concat(series, ignore_index=True), header)
    write_csv(out / "profiles.csv", profile_frame(problem, profiles), header)
    if config.bench.kde and problem.kde_probes:
        frame = kde_frame(
            problem, reference, nominal, pce, config.bench.kde_samples, config.seed + 1
        )
        write_csv(out / "kde.csv", frame, header)
    write_csv(out / "timings.csv", pd.DataFrame(timings), header)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Main
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="POD-BSBEM non-intrusive reduced-order uncertainty propagation.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "Typical workflow:\n"
            "  1. python main.py build configs/burgers_800.yaml\n"
            "  2. python main.py stats output/burgers_800/surrogate\n"
            "  3. python main.py bench configs/burgers_800.yaml"
        ),
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    subparsers = parser.add_subparsers(dest="command")

    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("config", help="Run configuration (YAML)")
    overrides.add_argument("--p", type=int, nargs="+", help="Spline degree (one or per dimension)")
    overrides.add_argument("--nx", type=int, nargs="+", help="Elements (one or per dimension)")
    overrides.add_argument("--eps-t", type=float, help="Per-trajectory POD tolerance")
    overrides.add_argument("--eps-s", type=float, help="Global and third-level POD tolerance")
    overrides.add_argument(
        "--oversample", type=int, help="Collocation points per dimension / (p+1)"
    )
    overrides.add_argument("--seed", type=int, help="Sampling seed")
    overrides.add_argument("--output-dir", help="Directory for all outputs")
    overrides.add_argument("--threads", type=int, help="Worker threads (default: all cores)")

    # build ---
    build_cmd = subparsers.add_parser(
        "build", parents=[overrides], help="Run the offline stage and save the surrogate",
    )
    build_cmd.add_argument(
        "--export-snapshots", metavar="STEM",
        help="Also write the training snapshots as STEM.yaml / STEM.bin",
    )
    build_cmd.set_defaults(handler=cmd_build)

    # stats ---
    stats_parser = subparsers.add_parser("stats", help="Mean/std CSV of a saved surrogate")
    stats_parser.add_argument("surrogate", help="Surrogate stem (without .yaml/.bin)")
    stats_parser.add_argument(
        "--output", help="CSV path (default: stats.csv beside the surrogate)"
    )
    stats_parser.add_argument(
        "--points-per-dim", type=int, nargs="+",
        help="Gauss points per dimension (default: p+1)",
    )
    stats_parser.set_defaults(handler=cmd_stats)

    # bench ---
    bench_parser = subparsers.add_parser(
        "bench", parents=[overrides], help="Sweep errors against a sampled reference",
    )
    bench_parser.set_defaults(handler=cmd_bench)

    # eval ---
    eval_parser = subparsers.add_parser("eval", help="Evaluate a saved surrogate")
    eval_parser.add_argument("surrogate", help="Surrogate stem (without .yaml/.bin)")
    eval_parser.add_argument(
        "--eta", type=float, nargs="+", action="append", help="Physical point (repeatable)",
    )
    eval_parser.add_argument(
        "--xi", type=float, nargs="+", action="append", help="Unit-cube point (repeatable)",
    )
    eval_parser.add_argument("--output", help="CSV path (default: eval.csv beside the surrogate)")
    eval_parser.set_defaults(handler=cmd_eval)

    # ingest ---
    ingest_parser = subparsers.add_parser(
        "ingest", parents=[overrides], help="Build a surrogate from an external snapshot set",
    )
    ingest_parser.add_argument("--snapshots", help="Snapshot stem (overrides the config)")
    ingest_parser.set_defaults(handler=cmd_ingest)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Parse the subcommand, dispatch, and map failures to exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
    )
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG_ERROR
    try:
        return args.handler(args)
    except Exception as exc:
        code = exit_code_for(exc)
        logger.exception("%s failed (exit code %d): %s", args.command, code, exc)
        return code


if __name__ == "__main__":
    sys.exit(main())

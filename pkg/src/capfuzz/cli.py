"""Command-line front end.

Four subcommands: ``fit`` runs one algorithm on a dataset, ``synth``
replays the weighted three-blob experiment, ``wine`` replays the wine
comparison, and ``compare`` runs all three algorithms on one dataset.
Reports are written as JSON (one object per algorithm) or CSV (one row
per algorithm); ``--figures DIR`` additionally renders plots next to
them.  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import viz
from .clustering import FitResult, InitStrategy, fit_capacitated, fit_equibalanced, fit_fcm
from .core import ProblemSpec, validate_problem
from .data_io import Dataset, equal_capacities, generate_synthetic, load_csv, load_wine, normalize_zscore
from .errors import SolverError, ValidationError
from .metrics import adjusted_rand_index, capacity_residual, harden

log = logging.getLogger("capfuzz")

ALGORITHMS = ("capacitated", "fcm", "equibalanced")
NOT_ENFORCED = "not-enforced"


@dataclass
class RunConfig:
    """Parsed command-line invocation."""

    command: str
    data: Optional[str] = None
    seed_data: Optional[int] = None
    g: int = 3
    capacities: str = "equal"
    weights_column: Optional[str] = None
    labels_column: Optional[str] = None
    algo: str = "capacitated"
    m: float = 2.0
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 300
    out: Optional[str] = None
    fmt: str = "json"
    figures: Optional[str] = None
    concurrent: bool = False


@dataclass
class Report:
    """One algorithm's results in the shape the comparison table uses."""

    algorithm: str
    ari: Optional[float]
    objective: float
    capacity_residual: object  # float, or "not-enforced" for plain fcm
    iterations: int
    converged: bool
    wall_time_s: float
    objective_trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "ari": self.ari,
            "objective": self.objective,
            "capacity_residual": self.capacity_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "wall_time_s": self.wall_time_s,
            "objective_trace": self.objective_trace,
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capfuzz",
        description="Fuzzy clustering with weighted points and per-cluster capacity targets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_algo=True):
        p.add_argument("--data", help="CSV dataset path")
        p.add_argument("--seed-data", type=int, default=None,
                       help="seed for the synthetic generator (alternative to --data)")
        p.add_argument("--g", type=int, default=3, help="number of clusters")
        p.add_argument("--capacities", default="equal",
                       help="'equal', a comma list like '10,20,30', or '@file' with one value per line")
        p.add_argument("--weights-column", help="CSV column holding point weights")
        p.add_argument("--labels-column", help="CSV column holding ground-truth labels")
        if with_algo:
            p.add_argument("--algo", choices=ALGORITHMS, default="capacitated")
            p.add_argument("--m", type=float, default=2.0, help="fuzzifier (fcm only)")
        p.add_argument("--seed", type=int, default=0, help="centroid seeding RNG seed")
        p.add_argument("--tol", type=float, default=1e-6, help="convergence tolerance")
        p.add_argument("--max-iter", type=int, default=300, help="iteration cap")
        p.add_argument("--out", help="report output path (default: stdout)")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--figures", help="directory to render PNG figures into")

    fit = sub.add_parser("fit", help="run one algorithm on a dataset")
    add_common(fit)

    synth = sub.add_parser("synth", help="replay the weighted three-blob experiment")
    add_common(synth, with_algo=False)

    wine = sub.add_parser("wine", help="replay the wine comparison (z-scored features)")
    add_common(wine, with_algo=False)
    wine.add_argument("--concurrent", action="store_true",
                      help="run the three fits concurrently")

    compare = sub.add_parser("compare", help="run all three algorithms on one dataset")
    add_common(compare, with_algo=False)
    compare.add_argument("--concurrent", action="store_true",
                         help="run the three fits concurrently")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        data=getattr(args, "data", None),
        seed_data=getattr(args, "seed_data", 0),
        g=getattr(args, "g", 3),
        capacities=getattr(args, "capacities", "equal"),
        weights_column=getattr(args, "weights_column", None),
        labels_column=getattr(args, "labels_column", None),
        algo=getattr(args, "algo", "capacitated"),
        m=getattr(args, "m", 2.0),
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        out=args.out,
        fmt=args.fmt,
        figures=getattr(args, "figures", None),
        concurrent=getattr(args, "concurrent", False),
    )


def _load_dataset(config: RunConfig) -> Dataset:
    if config.data is not None and config.seed_data is not None:
        raise ValidationError("give either --data or --seed-data, not both")
    if config.data is not None:
        return load_csv(
            config.data,
            weight_column=config.weights_column,
            label_column=config.labels_column,
        )
    if config.seed_data is None:
        raise ValidationError("a dataset is required: pass --data or --seed-data")
    return generate_synthetic(config.seed_data)


def _build_capacities(config: RunConfig, dataset: Dataset) -> np.ndarray:
    text = config.capacities.strip()
    if text == "equal":
        return equal_capacities(dataset, config.g)
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as handle:
            values = [float(line) for line in handle if line.strip()]
    else:
        values = [float(part) for part in text.split(",") if part.strip()]
    if len(values) != config.g:
        raise ValidationError(
            f"--capacities lists {len(values)} values but --g is {config.g}"
        )
    return np.array(values, dtype=float)


def _run_algorithm(algo: str, dataset: Dataset, capacities: np.ndarray,
                   config: RunConfig) -> tuple[FitResult, Report]:
    init = InitStrategy(kind="seeded-points", rng_seed=config.seed)
    if algo == "capacitated":
        problem = validate_problem(ProblemSpec(
            points=dataset.features,
            weights=dataset.weights,
            capacities=capacities,
            convergence_tol=config.tol,
            max_iterations=config.max_iter,
        ))
        start = time.perf_counter()
        result = fit_capacitated(problem, init)
        elapsed = time.perf_counter() - start
        residual = capacity_residual(result.memberships, problem.weights, problem.capacities)
    elif algo == "equibalanced":
        start = time.perf_counter()
        result = fit_equibalanced(dataset.features, config.g, init,
                                  convergence_tol=config.tol,
                                  max_iterations=config.max_iter)
        elapsed = time.perf_counter() - start
        even = np.full(config.g, dataset.n_points / config.g)
        residual = capacity_residual(result.memberships, np.ones(dataset.n_points), even)
    elif algo == "fcm":
        start = time.perf_counter()
        result = fit_fcm(dataset.features, config.g, config.m, init,
                         weights=dataset.weights, capacities=capacities,
                         convergence_tol=config.tol, max_iterations=config.max_iter)
        elapsed = time.perf_counter() - start
        residual = NOT_ENFORCED
    else:
        raise ValidationError(f"unknown algorithm {algo!r}")

    labels = harden(result.memberships)
    ari = (
        adjusted_rand_index(dataset.true_labels, labels)
        if dataset.true_labels is not None
        else None
    )
    report = Report(
        algorithm=algo,
        ari=ari,
        objective=result.objective_trace[-1],
        capacity_residual=residual,
        iterations=result.iterations,
        converged=result.converged,
        wall_time_s=elapsed,
        objective_trace=list(result.objective_trace),
    )
    return result, report


def _sibling(out: Optional[str], suffix: str) -> Optional[str]:
    if out is None:
        return None
    stem, _ = os.path.splitext(out)
    return f"{stem}.{suffix}.csv"


def _write_report(reports: list[Report], config: RunConfig) -> None:
    payload = [r.to_dict() for r in reports]
    if config.fmt == "json":
        single = config.command in ("fit", "synth")
        body = json.dumps(payload[0] if single else payload, indent=2)
    else:
        columns = ["algorithm", "ari", "objective", "capacity_residual",
                   "iterations", "converged", "wall_time_s", "objective_trace"]
        lines = [",".join(columns)]
        for entry in payload:
            row = []
            for column in columns:
                value = entry[column]
                if column == "objective_trace":
                    row.append(";".join(repr(v) for v in value))
                elif isinstance(value, float):
                    row.append(repr(value))
                else:
                    row.append("" if value is None else str(value))
            lines.append(",".join(row))
        body = "\n".join(lines) + "\n"
    if config.out:
        with open(config.out, "w", encoding="utf-8") as handle:
            handle.write(body if body.endswith("\n") else body + "\n")
        log.info("report written to %s", config.out)
    else:
        print(body)


def _write_point_outputs(dataset: Dataset, result: FitResult, config: RunConfig) -> None:
    labels = harden(result.memberships)
    labels_path = _sibling(config.out, "labels")
    if labels_path:
        with open(labels_path, "w", encoding="utf-8") as handle:
            handle.write("index,label\n")
            for j, label in enumerate(labels):
                handle.write(f"{j},{int(label)}\n")
    members_path = _sibling(config.out, "memberships")
    if members_path:
        u = result.memberships.values
        with open(members_path, "w", encoding="utf-8") as handle:
            handle.write(",".join(f"u_{i + 1}" for i in range(u.shape[0])) + "\n")
            for j in range(u.shape[1]):
                handle.write(",".join(repr(float(v)) for v in u[:, j]) + "\n")


def _write_synth_points(dataset: Dataset, result: FitResult, config: RunConfig) -> None:
    path = _sibling(config.out, "points")
    if path is None:
        return
    labels = harden(result.memberships)
    u = result.memberships.values
    header = ["x", "y", "weight", "label"] + [f"u_{i + 1}" for i in range(u.shape[0])]
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(",".join(header) + "\n")
        for j in range(dataset.n_points):
            row = [
                repr(float(dataset.features[j, 0])),
                repr(float(dataset.features[j, 1])),
                repr(float(dataset.weights[j])),
                str(int(labels[j])),
            ] + [repr(float(u[i, j])) for i in range(u.shape[0])]
            handle.write(",".join(row) + "\n")


def _render_figures(dataset: Dataset, outcomes, config: RunConfig) -> None:
    if not config.figures:
        return
    traces = {}
    for algo, (result, _) in outcomes.items():
        traces[algo] = result.objective_trace
        viz.save_cluster_scatter(
            dataset.features,
            harden(result.memberships),
            result.centroids.values,
            viz.figure_path(config.figures, f"{config.command}_{algo}_clusters"),
            weights=dataset.weights,
            title=f"{algo} on {dataset.name}",
        )
    viz.save_objective_traces(
        traces, viz.figure_path(config.figures, f"{config.command}_objective")
    )
    reports = [report for _, report in outcomes.values()]
    if len(reports) > 1:
        viz.save_comparison_chart(
            reports, viz.figure_path(config.figures, f"{config.command}_comparison")
        )


def run_fit(config: RunConfig) -> Report:
    """Run one algorithm and write report, labels, and memberships."""
    if config.g < 1:
        raise ValidationError(f"--g must be >= 1, got {config.g}")
    if config.algo != "fcm" and config.m != 2.0:
        raise ValidationError("--m applies to fcm only; the capacitated path is fixed at 2")
    dataset = _load_dataset(config)
    capacities = _build_capacities(config, dataset)
    result, report = _run_algorithm(config.algo, dataset, capacities, config)
    _write_report([report], config)
    _write_point_outputs(dataset, result, config)
    _render_figures(dataset, {config.algo: (result, report)}, config)
    return report


def run_compare(config: RunConfig, dataset: Optional[Dataset] = None) -> list[Report]:
    """Run fcm, equibalanced, and capacitated with one seed on one dataset."""
    if config.g < 1:
        raise ValidationError(f"--g must be >= 1, got {config.g}")
    if dataset is None:
        dataset = _load_dataset(config)
    capacities = _build_capacities(config, dataset)

    order = ("fcm", "equibalanced", "capacitated")
    if config.concurrent:
        with ThreadPoolExecutor(max_workers=len(order)) as pool:
            futures = {
                algo: pool.submit(_run_algorithm, algo, dataset, capacities, config)
                for algo in order
            }
            outcomes = {algo: futures[algo].result() for algo in order}
    else:
        outcomes = {
            algo: _run_algorithm(algo, dataset, capacities, config) for algo in order
        }

    reports = [outcomes[algo][1] for algo in order]
    _write_report(reports, config)
    _render_figures(dataset, outcomes, config)
    return reports


def run_synth(config: RunConfig) -> Report:
    """Generate the weighted blobs, fit with capacities, dump plot-ready points."""
    dataset = generate_synthetic(config.seed_data if config.seed_data is not None else 0)
    config.g = 3
    config.algo = "capacitated"
    config.capacities = "equal"
    capacities = _build_capacities(config, dataset)
    result, report = _run_algorithm("capacitated", dataset, capacities, config)
    _write_report([report], config)
    _write_synth_points(dataset, result, config)
    _render_figures(dataset, {"capacitated": (result, report)}, config)
    return report


def run_wine(config: RunConfig) -> list[Report]:
    """Wine comparison: z-scored features, raw-alcohol weights, equal capacities."""
    if config.data is None:
        raise ValidationError("wine requires --data pointing at the wine file")
    dataset = normalize_zscore(load_wine(config.data))
    config.g = 3
    return run_compare(config, dataset=dataset)


def _configure_logging() -> None:
    level = os.environ.get("CAPFUZZ_LOG", "error").lower()
    chosen = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level, logging.ERROR
    )
    logging.basicConfig(level=chosen, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[list[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    config = config_from_args(args)
    try:
        if config.command == "fit":
            run_fit(config)
        elif config.command == "synth":
            run_synth(config)
        elif config.command == "wine":
            run_wine(config)
        elif config.command == "compare":
            run_compare(config)
        else:  # pragma: no cover - argparse enforces the choices
            raise ValidationError(f"unknown command {config.command!r}")
    except ValidationError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except SolverError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

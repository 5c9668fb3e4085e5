"""Command line interface.

Subcommands:

* ``compute``   one saturation coefficient for an explicit problem
* ``sweep``     a grid of problems described by a JSON config file
* ``reproduce`` recompute the packaged reference table and compare
* ``patches``   ``patches verify`` checks the refined-patch catalog

Tabular output uses a fixed CSV schema (see ``CSV_COLUMNS``); every value
is written in full repr precision next to a four-decimal display column.
Exit codes: 0 success, 1 comparison or verification failure, 2 invalid
input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from importlib import resources

from .assembly import EDGE_CLASSES, normalize_edges
from .coefficients import (
    CANONICAL_PROBLEMS,
    FAMILIES,
    NumericalError,
    ProblemSpec,
    Q_STRATEGIES,
    SaturationResult,
    q_strategy,
    saturation_coefficient,
)
from .patches import (
    measured_extension_ratio,
    patch_catalog,
    verify_traversal_lemma,
)

__all__ = [
    "CSV_COLUMNS",
    "PublishedValue",
    "SweepConfig",
    "estimated_seconds",
    "load_published_table",
    "load_sweep_config",
    "main",
]

CSV_COLUMNS = (
    "family", "edge_class", "p", "q", "r", "mu", "mu_display",
    "dim_H", "dim_V", "dim_F", "wall_seconds", "status",
)

R_FACTORS = (2, 4, 8)
SKIP_MARK = "---"
DEFAULT_BUDGET_SECONDS = 300.0
DEFAULT_TOLERANCE = 2e-4


# ------------------------------------------------------------- cost model


def estimated_seconds(spec: ProblemSpec) -> float:
    """Deterministic rough cost estimate used for budget skipping.

    The terms model the sparse factorization of the fine stiffness matrix,
    the triangular solves for every functional, and the dense generalized
    eigensolve. The constants are coarse; the estimate only has to be
    reproducible and monotone in the problem size.
    """
    n_fine = (spec.r + 1) ** 2
    if spec.family == "A":
        n_load = (spec.p + 1) ** 2
    elif spec.family == "B":
        n_load = spec.p + 1
    else:
        n_load = spec.p
    factor = 2e-9 * n_fine ** 1.5
    solves = 8e-10 * n_load * n_fine
    eig = 1e-10 * n_load ** 3
    return factor + solves + eig


# ------------------------------------------------------------- row output


def _edge_class_label(spec: ProblemSpec) -> str:
    if spec.family == "C":
        return "C"
    prefix = "E" if spec.family == "A" else "F"
    for name, edges in EDGE_CLASSES.items():
        if name.startswith(prefix) and edges == spec.edges:
            return name
    return "+".join(str(e) for e in sorted(spec.edges))


def _result_row(spec: ProblemSpec, label: str, result: SaturationResult,
                status: str) -> dict:
    return {
        "family": spec.family,
        "edge_class": label,
        "p": spec.p,
        "q": spec.q,
        "r": spec.r,
        "mu": repr(result.mu),
        "mu_display": f"{result.mu:.4f}",
        "dim_H": result.dim_H,
        "dim_V": result.dim_V,
        "dim_F": result.dim_F,
        "wall_seconds": f"{result.wall_seconds:.3f}",
        "status": status,
    }


def _skipped_row(spec: ProblemSpec, label: str) -> dict:
    row = {name: SKIP_MARK for name in CSV_COLUMNS}
    row.update({
        "family": spec.family,
        "edge_class": label,
        "p": spec.p,
        "q": spec.q,
        "r": spec.r,
        "status": "skipped",
    })
    return row


def format_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([row[name] for name in CSV_COLUMNS])
        return buffer.getvalue()
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(CSV_COLUMNS) + " |",
            "|" + "|".join(" --- " for _ in CSV_COLUMNS) + "|",
        ]
        for row in rows:
            lines.append(
                "| " + " | ".join(str(row[name]) for name in CSV_COLUMNS) + " |"
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown output format {fmt!r}")


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


# ----------------------------------------------------------- sweep config


@dataclass(frozen=True)
class SweepConfig:
    strategies: tuple[str, ...]
    p_values: tuple[int, ...]
    r_factors: tuple[int, ...]
    problems: tuple[str, ...]
    output: str | None
    format: str


_SWEEP_KEYS = {"strategies", "p_values", "r_factors", "problems", "output",
               "format"}


def load_sweep_config(path: str) -> SweepConfig:
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(raw) - _SWEEP_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    strategies = tuple(raw.get("strategies", list(Q_STRATEGIES)))
    for name in strategies:
        if name not in Q_STRATEGIES:
            raise ValueError(f"unknown strategy {name!r}")
    p_values = tuple(raw.get("p_values", (4, 8, 16)))
    if not p_values or any(
        not isinstance(p, int) or isinstance(p, bool) or p < 1 for p in p_values
    ):
        raise ValueError("p_values must be positive integers")
    r_factors = tuple(raw.get("r_factors", (2,)))
    if not r_factors or any(f not in R_FACTORS for f in r_factors):
        raise ValueError(f"r_factors must be drawn from {R_FACTORS}")
    problems = tuple(raw.get("problems", list(CANONICAL_PROBLEMS)))
    for name in problems:
        if name not in CANONICAL_PROBLEMS:
            raise ValueError(f"unknown problem {name!r}")
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "markdown"):
        raise ValueError("format must be 'csv' or 'markdown'")
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ValueError("output must be a string path")
    return SweepConfig(
        strategies=strategies, p_values=p_values, r_factors=r_factors,
        problems=problems, output=output, format=fmt,
    )


# -------------------------------------------------------- reference table


@dataclass(frozen=True)
class PublishedValue:
    problem: str
    strategy: str
    p: int
    q: int
    r: int
    value: float


def load_published_table() -> tuple[PublishedValue, ...]:
    text = (
        resources.files("refsat").joinpath("data/published_table.txt").read_text()
    )
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        problem, strategy, p, q, r, value = line.split()
        entry = PublishedValue(
            problem=problem, strategy=strategy, p=int(p), q=int(q), r=int(r),
            value=float(value),
        )
        if entry.problem not in CANONICAL_PROBLEMS:
            raise ValueError(f"unknown problem in reference table: {line!r}")
        if q_strategy(entry.strategy, entry.p) != entry.q:
            raise ValueError(f"inconsistent q in reference table: {line!r}")
        if entry.r not in tuple(factor * entry.q for factor in R_FACTORS):
            raise ValueError(f"inconsistent r in reference table: {line!r}")
        rows.append(entry)
    return tuple(rows)


def _spec_for_problem(name: str, p: int, q: int, r: int) -> ProblemSpec:
    family, edges = CANONICAL_PROBLEMS[name]
    return ProblemSpec(family=family, edges=edges, p=p, q=q, r=r)


# ------------------------------------------------------------ subcommands


def _cmd_compute(args: argparse.Namespace) -> int:
    if args.family == "C":
        if args.edges is not None:
            raise ValueError("family C does not take --edges")
        edges = None
    else:
        if args.edges is None:
            raise ValueError("families A and B require --edges")
        try:
            parsed = tuple(int(tok) for tok in args.edges.split(","))
        except ValueError as exc:
            raise ValueError(f"cannot parse --edges {args.edges!r}") from exc
        edges = normalize_edges(parsed)
    spec = ProblemSpec(family=args.family, edges=edges, p=args.p, q=args.q,
                       r=args.r)
    result = saturation_coefficient(spec)
    row = _result_row(spec, _edge_class_label(spec), result, "ok")
    _emit(format_rows([row], "csv"), args.output)
    return 0


def _sweep_cells(config: SweepConfig):
    for problem in config.problems:
        for factor in config.r_factors:
            for strategy in config.strategies:
                for p in config.p_values:
                    q = q_strategy(strategy, p)
                    yield problem, strategy, p, q, factor * q


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_sweep_config(args.config)
    rows = []
    for problem, _strategy, p, q, r in _sweep_cells(config):
        spec = _spec_for_problem(problem, p, q, r)
        label = _edge_class_label(spec)
        if estimated_seconds(spec) > args.budget:
            rows.append(_skipped_row(spec, label))
            continue
        result = saturation_coefficient(spec)
        rows.append(_result_row(spec, label, result, "ok"))
    _emit(format_rows(rows, config.format), config.output)
    return 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    if args.tol <= 0:
        raise ValueError("--tol must be positive")
    table = [row for row in load_published_table() if row.p <= args.max_p]
    rows = []
    failures = []
    skipped = 0
    for entry in table:
        spec = _spec_for_problem(entry.problem, entry.p, entry.q, entry.r)
        label = _edge_class_label(spec)
        if estimated_seconds(spec) > args.budget:
            rows.append(_skipped_row(spec, label))
            skipped += 1
            continue
        result = saturation_coefficient(spec)
        diff = abs(result.mu - entry.value)
        status = "pass" if diff <= args.tol else "fail"
        if status == "fail":
            failures.append(
                f"{entry.problem} {entry.strategy} p={entry.p} q={entry.q} "
                f"r={entry.r}: expected {entry.value:.4f}, got "
                f"{result.mu:.6f} (diff {diff:.2e})"
            )
        rows.append(_result_row(spec, label, result, status))
    _emit(format_rows(rows, "csv"), args.output)
    compared = len(rows) - skipped
    print(
        f"reproduce: {compared} compared, {len(failures)} failed, "
        f"{skipped} skipped (tol {args.tol:g})",
        file=sys.stderr,
    )
    for line in failures:
        print("  " + line, file=sys.stderr)
    return 1 if failures else 0


def _cmd_patches_verify(args: argparse.Namespace) -> int:
    catalog = patch_catalog(args.catalog)
    all_passed = True
    for pid in sorted(catalog):
        patch = catalog[pid]
        report = verify_traversal_lemma(patch)
        counts = " ".join(f"{k}={v}" for k, v in report.situation_counts)
        status = "ok" if report.passed else "FAIL"
        if not report.passed:
            all_passed = False
        print(
            f"patch {pid:2d} {patch.vertex_kind:8s} "
            f"steps={patch.n_steps:2d} {status}"
            + (f"  situations over 8 orientations: {counts}" if counts else "")
        )
        for violation in report.violations:
            print(
                f"    orientation {violation.orientation} "
                f"step {violation.step} edge {violation.edge}: "
                f"{violation.reason}"
            )
    print("extension operator seminorm ratios (degree 8):")
    for situation, samples in (("a", 50), ("b", 50), ("c", 50), ("d", 500),
                               ("e", 500)):
        ratio = measured_extension_ratio(situation, 8, samples, seed=0)
        print(f"    situation {situation}: worst {ratio:.6f} "
              f"over {samples} draws")
    print("catalog " + ("verified" if all_passed else "FAILED"))
    return 0 if all_passed else 1


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refsat",
        description="Saturation coefficients of polynomial trial spaces "
                    "on the reference square.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser(
        "compute", help="one coefficient for an explicit problem")
    compute.add_argument("--family", required=True, choices=list(FAMILIES))
    compute.add_argument(
        "--edges", default=None,
        help="comma-separated Dirichlet (family A) or load (family B) edges, "
             "numbered 1..4 counterclockwise from the right edge")
    compute.add_argument("--p", type=int, required=True,
                         help="functional family degree")
    compute.add_argument("--q", type=int, required=True,
                         help="coarse space degree")
    compute.add_argument("--r", type=int, required=True,
                         help="fine space degree")
    compute.add_argument("--output", default=None,
                         help="CSV destination ('-' or omitted for stdout)")

    sweep = sub.add_parser("sweep", help="grid of problems from a JSON config")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--budget", type=float, default=DEFAULT_BUDGET_SECONDS,
                       help="skip cells whose cost estimate exceeds this "
                            "many seconds")

    reproduce = sub.add_parser(
        "reproduce", help="recompute the packaged reference table")
    reproduce.add_argument("--max-p", type=int, default=12, dest="max_p",
                           help="only reference cells with p up to this")
    reproduce.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                           help="absolute tolerance against the reference")
    reproduce.add_argument("--budget", type=float,
                           default=DEFAULT_BUDGET_SECONDS)
    reproduce.add_argument("--output", default=None)

    patches = sub.add_parser("patches", help="refined patch machinery")
    actions = patches.add_subparsers(dest="action", required=True)
    verify = actions.add_parser(
        "verify", help="check traversal and extensions for the whole catalog")
    verify.add_argument("--catalog", default=None,
                        help="alternative catalog data file")

    return parser


_DISPATCH = {
    "compute": _cmd_compute,
    "sweep": _cmd_sweep,
    "reproduce": _cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "patches":
            return _cmd_patches_verify(args)
        return _DISPATCH[args.command](args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    linear-treeshap explain --model M.json --data X.csv --output phi.csv [--threads N]
    linear-treeshap check (--model M.json | --random-trees K --max-depth D) --tolerance T [--seed S]
    linear-treeshap bench --depths 4,8,12,16 --leaves 16 --reps 5 [--seed S] --output bench.csv

Exit codes: 0 success, 1 usage error, 2 validation error, 3 check failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import bench as bench_mod
from .conformance import check_cases, model_cases, random_cases
from .linear_shap import explain_batch
from .interp_poly import DegreeError
from .oracle import MAX_BRUTEFORCE_FEATURES
from .tree_model import Ensemble, ModelError, load_model

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    model: str | None = None
    data: str | None = None
    output: str | None = None
    threads: int = 1
    tolerance: float | None = None
    random_trees: int | None = None
    max_depth: int = 6
    instances: int = 5
    seed: int = 0
    depths: list[int] = field(default_factory=list)
    leaves: int = 16
    reps: int = 5
    samples: int = 20

    def validate(self) -> None:
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if self.subcommand == "check":
            if self.tolerance is None or not self.tolerance > 0:
                raise UsageError("--tolerance must be > 0")
            if (self.model is None) == (self.random_trees is None):
                raise UsageError("check needs exactly one of --model or --random-trees")
        if self.subcommand == "bench":
            if not self.depths or min(self.depths) < 0:
                raise UsageError("--depths must be a non-empty list of non-negative integers")
            if self.reps < 1 or self.leaves < 1 or self.samples < 1:
                raise UsageError("--reps, --leaves and --samples must be >= 1")


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="linear-treeshap", description="Exact Shapley values for decision trees.")
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("explain", help="explain every row of a CSV file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("check", help="compare the fast path against all oracles")
    p.add_argument("--model")
    p.add_argument("--random-trees", type=int)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--instances", type=int, default=5, help="instances per tree")
    p.add_argument("--tolerance", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bench", help="time the linear kernel against the coefficient reference")
    p.add_argument("--depths", type=_int_list, required=True)
    p.add_argument("--leaves", type=int, required=True)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--samples", type=int, default=20, help="instances per repetition")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    return ap


def parse_args(argv: Sequence[str] | None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(ns).items() if v is not None})
    cfg.validate()
    return cfg


def _fmt(v: float) -> str:
    return format(v, ".17g")


def read_rows(path: str, ensemble: Ensemble) -> tuple[list[list[float] | None], dict[int, str]]:
    """Parse the data CSV. Returns rows (None where invalid) and row errors."""
    m = ensemble.num_features
    with open(path, newline="", encoding="utf-8") as fh:
        raw = [r for r in csv.reader(fh) if r]
    if raw:
        try:
            [float(c) for c in raw[0]]
        except ValueError:
            header = [c.strip() for c in raw[0]]
            if len(header) != m:
                raise ModelError(f"header has {len(header)} columns, model has {m} features")
            if ensemble.feature_names is not None and tuple(header) != ensemble.feature_names:
                raise ModelError(f"header {header} does not match model feature names")
            raw = raw[1:]
    rows: list[list[float] | None] = []
    errors: dict[int, str] = {}
    for k, cells in enumerate(raw):
        if len(cells) != m:
            errors[k] = f"expected {m} columns, got {len(cells)}"
            rows.append(None)
            continue
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            errors[k] = "non-numeric or missing value"
            rows.append(None)
            continue
        if not all(math.isfinite(v) for v in vals):
            errors[k] = "missing or non-finite value"
            rows.append(None)
            continue
        rows.append(vals)
    return rows, errors


def cmd_explain(cfg: RunConfig) -> int:
    ensemble = load_model(cfg.model)
    rows, errors = read_rows(cfg.data, ensemble)
    good = [r for r in rows if r is not None]
    result = explain_batch(ensemble, good, threads=cfg.threads)
    names = ensemble.feature_names or tuple(str(i) for i in range(ensemble.num_features))
    it = iter(result.attributions)
    with open(cfg.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"phi_{n}" for n in names] + ["base_value", "prediction"])
        for row in rows:
            if row is None:
                writer.writerow(["nan"] * (ensemble.num_features + 2))
                continue
            a = next(it)
            writer.writerow([_fmt(v) for v in a.phi] + [_fmt(a.base_value), _fmt(a.prediction)])
    for k, msg in sorted(errors.items()):
        print(f"row {k + 1}: {msg}", file=sys.stderr)
    return EXIT_INVALID if errors else EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    if cfg.model is not None:
        ensemble = load_model(cfg.model)
        if ensemble.num_features > MAX_BRUTEFORCE_FEATURES:
            raise ModelError(f"brute force supports at most {MAX_BRUTEFORCE_FEATURES} features")
        cases = model_cases(ensemble, cfg.instances, seed=cfg.seed)
    else:
        cases = random_cases(cfg.random_trees, cfg.max_depth, cfg.instances, seed=cfg.seed)
    report = check_cases(cases)
    for (a, b), dev in report.pair_max.items():
        print(f"{a} vs {b}: {dev:.3e}")
    ok = report.passed(cfg.tolerance)
    print(f"cases={report.cases} max_deviation={report.max_deviation:.3e} "
          f"tolerance={cfg.tolerance:g} {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_bench(cfg: RunConfig) -> int:
    rows = bench_mod.run_bench(cfg.depths, cfg.leaves, cfg.reps, samples=cfg.samples, seed=cfg.seed)
    for r in rows:
        print(f"depth {r.depth:3d} (D={r.max_degree:2d}, L={r.leaves}): "
              f"linear {r.linear_mean_s * 1e3:8.3f} ± {r.linear_stderr_s * 1e3:.3f} ms  "
              f"reference {r.reference_mean_s * 1e3:8.3f} ± {r.reference_stderr_s * 1e3:.3f} ms  "
              f"speedup {r.speedup:6.2f}x")
    with open(cfg.output, "w", newline="", encoding="utf-8") as fh:
        bench_mod.write_csv(rows, fh)
    return EXIT_OK


COMMANDS = {"explain": cmd_explain, "check": cmd_check, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except (ModelError, DegreeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

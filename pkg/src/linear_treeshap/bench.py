"""Scaling benchmark: linear kernel vs the coefficient-form reference."""
from __future__ import annotations

import csv
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .interp_poly import make_basis
from .linear_shap import explain_batch
from .oracle import coefficient_reference
from .synthetic import TreeSpec, random_instances, random_tree

BENCH_WEIGHTS = (0.2, 0.8)


@dataclass
class BenchRow:
    depth: int
    leaves: int
    max_degree: int
    samples: int
    reps: int
    linear_mean_s: float
    linear_stderr_s: float
    reference_mean_s: float
    reference_stderr_s: float
    speedup: float


def _mean_stderr(xs: Sequence[float]) -> tuple[float, float]:
    mean = statistics.fmean(xs)
    if len(xs) < 2:
        return mean, 0.0
    return mean, statistics.stdev(xs) / len(xs) ** 0.5


def bench_depth(depth: int, leaves: int, reps: int, samples: int, num_features: int,
                rng: np.random.Generator) -> BenchRow:
    tree = random_tree(
        TreeSpec(num_features=num_features, depth=depth, n_leaves=leaves,
                 weight_range=BENCH_WEIGHTS, distinct_spine=True),
        rng,
    )
    X = random_instances(num_features, samples, rng)
    basis = make_basis(tree.max_degree)
    lin, ref = [], []
    for _ in range(reps):
        t0 = time.perf_counter()
        explain_batch(tree, X, basis)
        t1 = time.perf_counter()
        for x in X:
            coefficient_reference(tree, x)
        t2 = time.perf_counter()
        lin.append((t1 - t0) / samples)
        ref.append((t2 - t1) / samples)
    lm, ls = _mean_stderr(lin)
    rm, rs = _mean_stderr(ref)
    return BenchRow(depth, len(tree.leaves), tree.max_degree, samples, reps, lm, ls, rm, rs, rm / lm)


def run_bench(depths: Iterable[int], leaves: int, reps: int, samples: int = 20,
              num_features: int | None = None, seed: int = 0) -> list[BenchRow]:
    depths = list(depths)
    m = num_features or max(depths)
    rng = np.random.default_rng(seed)
    return [bench_depth(d, leaves, reps, samples, m, rng) for d in depths]


def write_csv(rows: Sequence[BenchRow], fh: TextIO) -> None:
    fields = list(BenchRow.__dataclass_fields__)
    writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (format(v, ".6g") if isinstance(v, float) else v) for k, v in asdict(row).items()})

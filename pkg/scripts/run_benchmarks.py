#!/usr/bin/env python3
"""
Script to run the EON benchmark experiments.
"""

import argparse
import time
from datetime import datetime
from pathlib import Path

import numpy as np
from loguru import logger
from scipy import stats

from src.experiments.cv import build_report, run_cv
from src.experiments.io import save_results
from src.models import ExperimentConfig, Hyperparameters, SyntheticSpec
from src.network.dataset import Dataset
from src.network.training import fit
from src.numerics.simplex import lipschitz_survey
from src.synthetic.complexity import data_complexity, kolmogorov_complexity

BIO_GRID = {
    "K": [3],
    "delta": [1e-5, 1e-4, 1e-3, 1e-2],
    "epsilon0": [1e-3, 3e-3, 5e-3, 8e-3],
    "epsilon1": [1e-12, 1e-6, 1e-4],
}


def run_bioinformatics(out_dir: Path, folds: int, threads: int, seed: int) -> None:
    """600 points split 520-30-50, K1 = 3."""
    spec = SyntheticSpec(kind="bioinformatics", T=600, seed=seed)
    experiment = ExperimentConfig(
        synthetic=spec,
        validation_size=30,
        test_size=50,
        folds=folds,
        grid=BIO_GRID,
        restarts=10,
        seed=seed,
        threads=threads,
    )
    report = build_report(experiment, run_cv(experiment))
    save_results(report, out_dir / "bioinformatics.csv")
    lengths = [row.descriptor_length for row in report.best if row.descriptor_length is not None]
    print("\n=== Bioinformatics ===")
    print(f"Mean test accuracy: {report.mean_test_metric:.4f}")
    if lengths:
        print(f"Descriptor length (median over folds): {int(np.median(lengths))}")
    print(f"KC: {kolmogorov_complexity(spec)}  DC: {data_complexity(520, 6)}")


def run_stacked_gaussians(out_dir: Path, folds: int, threads: int, seed: int, dims: list) -> None:
    """Stacked Gaussians with K in {3, 4, 5} and T = 1000 per dimensionality."""
    print("\n=== Stacked Gaussians ===")
    for D in dims:
        for K in (3, 4, 5):
            spec = SyntheticSpec(kind="stacked-gaussians", D=D, K=K, T=1000, seed=seed + K)
            experiment = ExperimentConfig(
                synthetic=spec,
                folds=folds,
                grid={"K": [K, 2 * K], "delta": [1e-3, 1e-2], "epsilon0": [3e-3, 5e-3], "epsilon1": [1e-5]},
                restarts=3,
                seed=seed,
                threads=threads,
            )
            report = build_report(experiment, run_cv(experiment))
            save_results(report, out_dir / f"stacked_gaussians_D{D}_K{K}.csv")
            print(f"D={D} K={K}: accuracy {report.mean_test_metric:.4f}, KC {kolmogorov_complexity(spec)}")


def run_scaling(sizes: list, seed: int) -> None:
    """Per-outer-iteration fit time against T."""
    rng = np.random.default_rng(seed)
    hyper = Hyperparameters(
        layer_dims=[5, 6, 3], epsilon=[5e-3, 1e-3, 1e-3], delta=[1e-2], max_outer_iters=4, tolerance=1e-300
    )
    seconds = []
    print("\n=== Scaling ===")
    for T in sizes:
        data = Dataset.from_labels(rng.uniform(0, 1, (5, T)), rng.integers(0, 3, T), 3)
        start = time.perf_counter()
        _, trace = fit(data, hyper)
        per_iteration = (time.perf_counter() - start) / trace.outer_iterations
        seconds.append(per_iteration)
        print(f"T={T}: {per_iteration:.4f} s / iteration")
    line = stats.linregress(sizes, seconds)
    print(f"Linear fit R^2: {line.rvalue ** 2:.4f}")


def main():
    parser = argparse.ArgumentParser(description="Run EON benchmark experiments")
    parser.add_argument(
        "--benchmarks",
        nargs="+",
        choices=["bioinformatics", "stacked-gaussians", "scaling", "lipschitz"],
        default=["bioinformatics", "stacked-gaussians", "scaling", "lipschitz"],
        help="Benchmarks to run",
    )
    parser.add_argument("--out-dir", default="results", help="Directory for result files")
    parser.add_argument("--folds", type=int, default=20)
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dims", type=int, nargs="+", default=[10], help="Stacked-Gaussian dimensionalities")
    parser.add_argument(
        "--sizes", type=int, nargs="+", default=[1_000, 3_000, 10_000, 30_000, 100_000], help="T values for scaling"
    )

    args = parser.parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    logger.info(f"Running benchmarks: {args.benchmarks}")

    if "bioinformatics" in args.benchmarks:
        run_bioinformatics(out_dir, args.folds, args.threads, args.seed)
    if "stacked-gaussians" in args.benchmarks:
        run_stacked_gaussians(out_dir, min(args.folds, 10), args.threads, args.seed, args.dims)
    if "scaling" in args.benchmarks:
        run_scaling(args.sizes, args.seed)
    if "lipschitz" in args.benchmarks:
        survey = lipschitz_survey(range(2, 65), seed=args.seed)
        survey.to_csv(out_dir / "lipschitz.csv", index=False)
        print("\n=== Softmax Lipschitz ===")
        print(f"Largest estimate/bound ratio: {(survey['estimate'] / survey['bound']).max():.6f}")

    print(f"\nBenchmarks completed at {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")


if __name__ == "__main__":
    main()

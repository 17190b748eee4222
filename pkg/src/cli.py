#!/usr/bin/env python3
"""
Command-line interface for EON experiments.

Subcommands:
- generate: synthetic spec file -> dataset CSV
- fit: dataset CSV + config -> model file and trace CSV
- predict: model + CSV -> label distributions and reliability
- cv: experiment config -> results CSV and JSON report
- adversarial: model -> adversarial points CSV
- raster: model -> decision/reliability raster CSV
- audit: model -> descriptor length against KC/DC
- check: model -> uniqueness/contraction report

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from . import config
from .errors import DataParseError, InvalidArgumentError, ModelFileError, ModelValidationError, NumericalFailureError
from .experiments.cv import build_report, run_cv
from .experiments.io import (
    FLOAT_FORMAT,
    load_csv,
    load_features,
    parse_experiment_config,
    parse_grid,
    parse_hyperparameters,
    parse_synthetic_spec,
    predictions_frame,
    read_config,
    save_results,
    write_dataset,
)
from .experiments.raster import FILL_POLICIES, emit_decision_raster
from .models import AuditReport, ConditionReport
from .network.adversarial import find_adversarial_batch
from .network.inference import predict_batch
from .network.model import build_a_matrices, descriptor_length, informative_dims
from .network.persistence import load, save
from .network.training import DEFAULT_INIT_STRATEGY, INIT_STRATEGIES, check_contraction, check_uniqueness, fit
from .synthetic.complexity import data_complexity, kolmogorov_complexity
from .synthetic.generators import generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def cmd_generate(args) -> int:
    values = read_config(args.spec)
    if args.seed is not None:
        values["seed"] = str(args.seed)
    write_dataset(generate(parse_synthetic_spec(values)), args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    dataset = load_csv(args.data)
    values = read_config(args.config)
    hyper = parse_hyperparameters(
        values,
        seed=args.seed,
        tolerance=args.tolerance,
        max_outer_iters=args.max_iters,
    )
    restarts = args.restarts or int(values.get("restarts", 1))
    init_strategy = args.init or values.get("init_strategy", DEFAULT_INIT_STRATEGY)
    model, trace = fit(dataset, hyper, init_strategy=init_strategy, restarts=restarts, threads=args.threads)
    save(model, args.out)
    trace_path = Path(f"{args.out}.trace.csv")
    trace.to_frame().to_csv(trace_path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Trace written to {trace_path}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load(args.model)
    rows = load_features(args.data)
    results = predict_batch(model, rows, threads=args.threads)
    frame = predictions_frame(results, model.layer_dims[-1])
    frame.to_csv(args.out, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} predictions to {args.out}")
    return EXIT_OK


def cmd_cv(args) -> int:
    values = read_config(args.config)
    for key, value in (("seed", args.seed), ("threads", args.threads), ("tolerance", args.tolerance), ("max_outer_iters", args.max_iters)):
        if value is not None:
            values[key] = str(value)
    grid = parse_grid(read_config(args.grid)) if args.grid else None
    experiment = parse_experiment_config(values, grid)
    table = run_cv(experiment)
    report = build_report(experiment, table)
    save_results(report, args.out)
    if report.mean_test_metric is not None:
        print(f"mean test {experiment.metric}: {report.mean_test_metric:.6f}")
    return EXIT_OK


def cmd_adversarial(args) -> int:
    model = load(args.model)
    rng = np.random.default_rng(args.seed)
    lo, hi = model.S.min(axis=1), model.S.max(axis=1)
    inits = [model.S.mean(axis=1)] + [rng.uniform(lo, hi) for _ in range(args.starts - 1)]
    results = find_adversarial_batch(
        model,
        inits,
        threads=args.threads,
        tol=args.tolerance,
        max_iters=args.max_iters,
        resolve_gamma0=args.resolve_gamma0,
    )
    rows = []
    for start, result in enumerate(results):
        row = {"start": start}
        row.update({f"x{d}": v for d, v in enumerate(result.x_adv)})
        row.update(
            {
                "label_entropy": result.final_label_entropy,
                "iterations": result.iterations,
                "converged": result.converged,
            }
        )
        rows.append(row)
    pd.DataFrame(rows).to_csv(args.out, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(rows)} adversarial points to {args.out}")
    return EXIT_OK


def cmd_raster(args) -> int:
    model = load(args.model)
    bounds = None
    if args.data:
        rows = load_features(args.data)
        bounds = (np.nanmin(rows, axis=0), np.nanmax(rows, axis=0))
    frame = emit_decision_raster(
        model,
        dims=tuple(args.dims),
        resolution=args.resolution,
        policy=args.policy,
        bounds=bounds,
        seed=args.seed,
        threads=args.threads,
    )
    frame.to_csv(args.out, index=False, float_format=FLOAT_FORMAT)
    return EXIT_OK


def cmd_audit(args) -> int:
    model = load(args.model)
    report = AuditReport(
        descriptor_length=descriptor_length(model, args.weight_threshold),
        weight_threshold=args.weight_threshold,
        informative_dims=informative_dims(model, args.weight_threshold),
        data_complexity=data_complexity(model.n_train, model.layer_dims[0]),
        kolmogorov_complexity=kolmogorov_complexity(parse_synthetic_spec(read_config(args.spec))) if args.spec else None,
    )
    _emit_json(report.model_dump_json(indent=2), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    model = load(args.model)
    eps = args.epsilon or model.hyper.gamma_epsilon
    if len(eps) != model.n_layers + 1:
        raise InvalidArgumentError(f"need {model.n_layers + 1} epsilon values (eps_1..eps_N+1), got {len(eps)}")
    A = build_a_matrices(model)
    unique, threshold = check_uniqueness(eps, A)
    contracts, l_tilde = check_contraction(eps, A, model.layer_dims)
    report = ConditionReport(
        uniqueness_holds=unique,
        min_epsilon_needed=threshold,
        contraction_holds=contracts,
        contraction_constant=l_tilde,
    )
    _emit_json(report.model_dump_json(indent=2), args.out)
    return EXIT_OK


def _emit_json(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eon", description="Entropy-optimal network experiments")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="Loguru level for stderr output")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=True, threads=True, solver=False):
        if seed:
            p.add_argument("--seed", type=int, default=None if solver else config.SEED, help="Random seed")
        if threads:
            p.add_argument("--threads", type=int, default=config.THREADS, help="Worker threads")
        if solver:
            p.add_argument("--tolerance", type=float, default=None, help="Relative stopping tolerance")
            p.add_argument("--max-iters", type=int, default=None, help="Outer iteration cap")

    p = sub.add_parser("generate", help="Generate a synthetic dataset")
    p.add_argument("spec", help="Synthetic spec file (KEY=value)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="Train a model")
    p.add_argument("data", help="Dataset CSV")
    p.add_argument("--config", required=True, help="Hyperparameter file (KEY=value)")
    p.add_argument("--out", required=True, help="Model file")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--init", choices=INIT_STRATEGIES, default=None)
    common(p, solver=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="Predict label distributions")
    p.add_argument("model")
    p.add_argument("data", help="CSV with x0.. columns")
    p.add_argument("--out", required=True)
    common(p, seed=False)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="Cross-validated grid search")
    p.add_argument("config", help="Experiment file (KEY=value)")
    p.add_argument("--grid", default=None, help="Grid file (KEY=v1,v2,..)")
    p.add_argument("--out", required=True, help="Results CSV (JSON report written alongside)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("adversarial", help="Search maximal-uncertainty inputs")
    p.add_argument("model")
    p.add_argument("--out", required=True)
    p.add_argument("--starts", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--resolve-gamma0", action="store_true")
    common(p)
    p.set_defaults(func=cmd_adversarial)

    p = sub.add_parser("raster", help="Decision-function raster")
    p.add_argument("model")
    p.add_argument("--out", required=True)
    p.add_argument("--dims", type=int, nargs=2, default=[0, 1])
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--policy", choices=FILL_POLICIES, default="uniform-random")
    p.add_argument("--data", default=None, help="CSV whose feature ranges bound the grid")
    common(p)
    p.set_defaults(func=cmd_raster)

    p = sub.add_parser("audit", help="Descriptor length against KC/DC")
    p.add_argument("model")
    p.add_argument("--weight-threshold", type=float, default=config.WEIGHT_THRESHOLD)
    p.add_argument("--spec", default=None, help="Synthetic spec the data came from (for KC)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("check", help="Uniqueness and contraction conditions")
    p.add_argument("model")
    p.add_argument("--epsilon", type=float, nargs="+", default=None, help="eps_1..eps_N+1 (model's when omitted)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level=args.log_level.upper())
    try:
        return args.func(args)
    except NumericalFailureError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except (DataParseError, ModelFileError, ModelValidationError, ValidationError, InvalidArgumentError) as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

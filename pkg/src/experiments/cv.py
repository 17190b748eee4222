"""
Monte-Carlo cross-validation with exhaustive grid search.

Every fold draws a seeded shuffle of the dataset into disjoint test,
validation and training blocks; all grid cells of a fold see the same blocks.
(fold, cell) jobs are independent and run on a thread pool, with results
collected in canonical (fold, cell) order.
"""

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..errors import EonError
from ..models import CellResult, ExperimentConfig, Hyperparameters, ResultsReport
from ..network.dataset import Dataset
from ..network.inference import RowFailure, predict_batch
from ..network.model import EonModel, descriptor_length
from ..network.training import fit
from ..synthetic.generators import generate
from .io import load_csv
from .metrics import accuracy, multiclass_auc

Split = Dict[str, np.ndarray]


@dataclass
class ResultsTable:
    """All (fold, cell) rows of a run."""

    rows: List[CellResult] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows])

    def best_rows(self) -> List[CellResult]:
        """
        Best row per fold: highest validation metric, then smaller
        descriptor length, then faster fit, then lower cell index.
        """
        best: Dict[int, CellResult] = {}
        for row in self.rows:
            if row.validation_metric is None or row.fold < 0:
                continue
            current = best.get(row.fold)
            if current is None or _rank_key(row) < _rank_key(current):
                best[row.fold] = row
        return [best[f] for f in sorted(best)]

    def mean_test_metric(self) -> Optional[float]:
        values = [r.test_metric for r in self.best_rows() if r.test_metric is not None]
        return float(np.mean(values)) if values else None


def _rank_key(row: CellResult) -> Tuple:
    length = row.descriptor_length if row.descriptor_length is not None else np.inf
    return (-row.validation_metric, length, row.fit_seconds, row.cell)


def expand_grid(grid: Dict[str, List[float]]) -> List[Dict[str, float]]:
    """Cartesian product of the grid; ``epsilon_out`` defaults to the cell's delta."""
    keys = ["K", "delta", "epsilon0", "epsilon1"]
    outs = grid.get("epsilon_out") or [None]
    cells = []
    for values in itertools.product(*(grid[k] for k in keys), outs):
        cell = dict(zip(keys + ["epsilon_out"], values))
        cell["K"] = int(cell["K"])
        if cell["epsilon_out"] is None:
            cell["epsilon_out"] = cell["delta"]
        cells.append(cell)
    return cells


def cell_hyperparameters(cell: Dict[str, float], config: ExperimentConfig, K0: int, n_labels: int, seed: int) -> Hyperparameters:
    """Hyperparameters of a grid cell: every hidden layer has K states."""
    n = config.n_hidden
    return Hyperparameters(
        layer_dims=[K0] + [cell["K"]] * n + [n_labels],
        epsilon=[cell["epsilon0"]] + [cell["epsilon1"]] * n + [cell["epsilon_out"]],
        delta=[cell["delta"]] * n,
        gamma0_mode=config.gamma0_mode,
        tolerance=config.tolerance,
        max_outer_iters=config.max_outer_iters,
        max_gamma_iters=config.max_gamma_iters,
        theta_floor=config.theta_floor,
        seed=seed,
    )


def make_splits(T: int, counts: Dict[str, int], folds: int, seed: int) -> List[Split]:
    """Seeded shuffle splits; blocks are disjoint and cover all T points."""
    rng = np.random.default_rng(seed)
    splits = []
    for _ in range(folds):
        perm = rng.permutation(T)
        n_test, n_val = counts["test"], counts["validation"]
        splits.append(
            {
                "test": np.sort(perm[:n_test]),
                "validation": np.sort(perm[n_test : n_test + n_val]),
                "train": np.sort(perm[n_test + n_val :]),
            }
        )
    return splits


def _score(model: EonModel, data: Dataset, metric: str, threads: int) -> Tuple[float, float]:
    start = time.perf_counter()
    results = predict_batch(model, data.X.T, threads=threads)
    seconds = time.perf_counter() - start
    M = data.n_labels
    dist = np.stack(
        [np.full(M, 1.0 / M) if isinstance(r, RowFailure) else r.label_dist for r in results],
        axis=1,
    )
    if metric == "auc":
        return multiclass_auc(dist, data.labels), seconds
    return accuracy(dist, data.labels), seconds


class CrossValidator:
    """
    Runs a cross-validation experiment.

    Flat mode selects per fold on the fold's validation block. Nested mode tunes
    once on an inner shuffle split of the first fold's training and validation
    points, then refits the chosen cell on every fold and reports its test score.
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.cells = expand_grid(config.grid)

    def load_dataset(self) -> Dataset:
        if self.config.dataset_path is not None:
            return load_csv(self.config.dataset_path)
        return generate(self.config.synthetic)

    def _evaluate(
        self,
        fold: int,
        cell_index: int,
        data: Dataset,
        train: np.ndarray,
        validation: Optional[np.ndarray],
        test: Optional[np.ndarray],
    ) -> CellResult:
        cell = self.cells[cell_index]
        result = CellResult(fold=fold, cell=cell_index, **cell)
        try:
            hyper = cell_hyperparameters(cell, self.config, data.K0, data.n_labels, self.config.seed + max(fold, 0))
            start = time.perf_counter()
            model, trace = fit(data.subset(train), hyper, restarts=self.config.restarts)
            result.fit_seconds = time.perf_counter() - start
            result.outer_iterations = trace.outer_iterations
            result.final_loss = trace.final_loss
            result.descriptor_length = descriptor_length(model, self.config.weight_threshold)
            if validation is not None:
                result.validation_metric, seconds = _score(model, data.subset(validation), self.config.metric, 1)
                result.predict_seconds += seconds
            if test is not None:
                result.test_metric, seconds = _score(model, data.subset(test), self.config.metric, 1)
                result.predict_seconds += seconds
        except (EonError, ValueError) as e:
            logger.error(f"Fold {fold}, cell {cell_index} failed: {e}")
            result.error = str(e)
        return result

    def _run_jobs(self, jobs: List[Tuple]) -> List[CellResult]:
        if self.config.threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
                return list(pool.map(lambda job: self._evaluate(*job), jobs))
        return [self._evaluate(*job) for job in jobs]

    def run(self, data: Optional[Dataset] = None) -> ResultsTable:
        """Run every (fold, cell) job and collect the rows."""
        data = data if data is not None else self.load_dataset()
        counts = self.config.split_counts(data.T)
        splits = make_splits(data.T, counts, self.config.folds, self.config.seed)
        logger.info(
            f"Cross-validating {len(self.cells)} cells over {self.config.folds} folds "
            f"(train {counts['train']}, validation {counts['validation']}, test {counts['test']})"
        )
        if self.config.nested:
            table = self._run_nested(data, splits, counts)
        else:
            jobs = [
                (fold, c, data, split["train"], split["validation"], split["test"])
                for fold, split in enumerate(splits)
                for c in range(len(self.cells))
            ]
            table = ResultsTable(self._run_jobs(jobs))
        for row in table.best_rows():
            logger.info(f"Fold {row.fold}: cell {row.cell} validation {row.validation_metric:.4f} test {row.test_metric}")
        return table

    def _run_nested(self, data: Dataset, splits: List[Split], counts: Dict[str, int]) -> ResultsTable:
        pool = np.concatenate([splits[0]["train"], splits[0]["validation"]])
        inner = np.random.default_rng(self.config.seed + 1).permutation(pool)
        inner_val, inner_train = np.sort(inner[: counts["validation"]]), np.sort(inner[counts["validation"] :])
        tuning = self._run_jobs([(-1, c, data, inner_train, inner_val, None) for c in range(len(self.cells))])
        scored = [r for r in tuning if r.validation_metric is not None]
        if not scored:
            logger.error("Every grid cell failed during tuning")
            return ResultsTable(tuning)
        chosen = min(scored, key=_rank_key)
        logger.info(f"Tuning selected cell {chosen.cell} ({self.cells[chosen.cell]})")
        jobs = [
            (fold, chosen.cell, data, np.concatenate([s["train"], s["validation"]]), None, s["test"])
            for fold, s in enumerate(splits)
        ]
        refits = self._run_jobs(jobs)
        for row in refits:
            row.validation_metric = chosen.validation_metric
        return ResultsTable(tuning + refits)


def run_cv(config: ExperimentConfig, data: Optional[Dataset] = None) -> ResultsTable:
    """Cross-validate the config's grid; see ``CrossValidator``."""
    return CrossValidator(config).run(data)


def build_report(config: ExperimentConfig, table: ResultsTable) -> ResultsReport:
    return ResultsReport(
        config=config,
        rows=table.rows,
        best=table.best_rows(),
        mean_test_metric=table.mean_test_metric(),
    )

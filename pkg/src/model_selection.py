#!/usr/bin/env python3
"""
Grid search over ranks and regularization weights, selecting the configuration with the best AvgFIT.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from .corpus import BackoffTensors
from .errors import ConfigError, NumericError
from .factorization import factorize
from .models import (
    DEFAULT_MAX_ITERS, DEFAULT_SEED, DEFAULT_TOL,
    FactorSet, FitReport, GridEntry, GridResult, GridSpec, Ranks, Regularizers,
)
from .utils import derive_seed, get_logger

logger = get_logger("gridsearch")

# Comment: Published (ranks, lambdas) per dataset.
PRESET_CONFIGS: Dict[str, Tuple[Ranks, Regularizers]] = {
    "shootings": (Ranks(10, 20, 15), Regularizers(0.3, 0.1, 0.7)),
    "nyt_sports": (Ranks(20, 15, 15), Regularizers(0.9, 0.5, 0.7)),
    "muc": (Ranks(15, 12, 12), Regularizers(0.7, 0.7, 0.4)),
}


def preset_configs() -> Dict[str, Tuple[Ranks, Regularizers]]:
    return dict(PRESET_CONFIGS)


def single_cell_spec(ranks: Ranks, reg: Regularizers) -> GridSpec:
    return GridSpec(
        rank_values=(ranks.r1,), lambda_values=(reg.lambda_a,),
        r1_values=(ranks.r1,), r2_values=(ranks.r2,), r3_values=(ranks.r3,),
        lambda_a_values=(reg.lambda_a,), lambda_b_values=(reg.lambda_b,), lambda_c_values=(reg.lambda_c,),
    )


def _axes(spec: GridSpec) -> Tuple[Sequence[int], Sequence[int], Sequence[int], Sequence[float], Sequence[float], Sequence[float]]:
    return (
        spec.r1_values or spec.rank_values,
        spec.r2_values or spec.rank_values,
        spec.r3_values or spec.rank_values,
        spec.lambda_a_values or spec.lambda_values,
        spec.lambda_b_values or spec.lambda_values,
        spec.lambda_c_values or spec.lambda_values,
    )


def validate_grid(spec: GridSpec) -> None:
    names = ("r1", "r2", "r3", "lambda_a", "lambda_b", "lambda_c")
    for name, values in zip(names, _axes(spec)):
        if not values:
            raise ConfigError(f"grid axis {name} is empty")
        for v in values:
            if name.startswith("r") and (int(v) != v or v < 1):
                raise ConfigError(f"grid axis {name} holds invalid rank {v!r}")
            if name.startswith("lambda") and not 0.0 <= v <= 1.0:
                raise ConfigError(f"grid axis {name} holds {v!r}, outside [0, 1]")


def grid_cells(spec: GridSpec) -> List[Tuple[Ranks, Regularizers]]:
    validate_grid(spec)
    r1s, r2s, r3s, las, lbs, lcs = _axes(spec)
    return [
        (Ranks(int(r1), int(r2), int(r3)), Regularizers(float(la), float(lb), float(lc)))
        for r1, r2, r3, la, lb, lc in itertools.product(r1s, r2s, r3s, las, lbs, lcs)
    ]


def _rank_violation(ranks: Ranks, tensors: BackoffTensors) -> Optional[str]:
    n1, n2, n3, _ = tensors.vocab.sizes
    for name, r, n in (("r1", ranks.r1, n1), ("r2", ranks.r2, n2), ("r3", ranks.r3, n3)):
        if r > n:
            return f"{name}={r} exceeds vocabulary size {n}"
    return None


def _selection_key(entry: GridEntry) -> Tuple:
    return (-entry.report.avg_fit, entry.ranks.as_tuple(), entry.reg.as_tuple())


def grid_search(
    tensors: BackoffTensors,
    spec: GridSpec,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    master_seed: int = DEFAULT_SEED,
    threads: int = 1,
    progress: bool = False,
) -> GridResult:
    """Factorize every grid cell and pick the best AvgFIT; ties go to the smallest (ranks, lambdas)."""
    cells = grid_cells(spec)
    entries: List[GridEntry] = []
    runnable: List[GridEntry] = []
    for index, (ranks, reg) in enumerate(cells):
        entry = GridEntry(index=index, ranks=ranks, reg=reg, report=None, seed=derive_seed(master_seed, index))
        note = _rank_violation(ranks, tensors)
        if note:
            logger.warning("cell %d skipped: %s", index, note)
            entry.skipped = note
        else:
            runnable.append(entry)
        entries.append(entry)
    if not runnable:
        raise ConfigError("every grid cell was skipped; ranks exceed the vocabulary sizes")

    factors: Dict[int, FactorSet] = {}

    def run(entry: GridEntry) -> Tuple[int, Optional[FactorSet], Optional[FitReport], float, Optional[str]]:
        started = time.perf_counter()
        try:
            f, report = factorize(tensors, entry.ranks, entry.reg, max_iters=max_iters, tol=tol, seed=entry.seed)
        except NumericError as e:
            return entry.index, None, None, time.perf_counter() - started, f"numeric failure: {e}"
        return entry.index, f, report, time.perf_counter() - started, None

    logger.info("evaluating %d of %d grid cell(s) on %d thread(s)", len(runnable), len(entries), max(1, threads))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [pool.submit(run, e) for e in runnable]
        for future in tqdm(as_completed(futures), total=len(futures), disable=not progress, desc="grid"):
            index, f, report, wall, failure = future.result()
            entry = entries[index]
            entry.report, entry.wall_time, entry.skipped = report, wall, failure
            if f is not None:
                factors[index] = f
            if failure:
                logger.warning("cell %d failed: %s", index, failure)
            else:
                logger.debug("cell %d finished in %.3fs", index, wall)

    scored = [e for e in entries if e.report is not None]
    if not scored:
        raise NumericError("every grid cell failed numerically")
    winner = min(scored, key=_selection_key)
    logger.info(
        "winner cell %d: ranks %s lambdas %s AvgFIT %r",
        winner.index, winner.ranks.as_tuple(), winner.reg.as_tuple(), winner.report.avg_fit,
    )
    return GridResult(entries=entries, winner=winner.index, winner_factors=factors[winner.index])


def grid_frame(result: GridResult, timings: bool = False) -> pd.DataFrame:
    """One row per cell: ranks, lambdas, fit1..3, avg_fit, iterations and, with ``timings``, wall time."""
    rows = []
    for e in result.entries:
        report = e.report
        rows.append({
            "cell": e.index,
            "r1": e.ranks.r1, "r2": e.ranks.r2, "r3": e.ranks.r3,
            "lambda_a": e.reg.lambda_a, "lambda_b": e.reg.lambda_b, "lambda_c": e.reg.lambda_c,
            "fit1": report.fit1 if report else None,
            "fit2": report.fit2 if report else None,
            "fit3": report.fit3 if report else None,
            "avg_fit": report.avg_fit if report else None,
            "iterations": report.iterations_run if report else None,
            "seed": e.seed,
            "winner": e.index == result.winner,
            "skipped": e.skipped or "",
        })
        if timings:
            rows[-1]["wall_time_s"] = e.wall_time
    return pd.DataFrame(rows)

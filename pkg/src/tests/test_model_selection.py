#!/usr/bin/env python3
"""
Unit tests for grid search and winner selection.
"""

import sys
import unittest
from pathlib import Path

import numpy as np

# Add the project root to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from src.corpus import build_backoff_tensors
from src.errors import ConfigError
from src.factorization import factorize
from src.model_selection import (
    PRESET_CONFIGS, _selection_key, grid_cells, grid_frame, grid_search, single_cell_spec, preset_configs,
    validate_grid,
)
from src.models import FitReport, GridEntry, GridSpec, Ranks, Regularizers, TupleRecord
from src.utils import derive_seed


def small_tensors(seed=1):
    rng = np.random.default_rng(seed)
    records = [
        TupleRecord(f"s{rng.integers(8)}", f"r{rng.integers(3)}", f"o{rng.integers(7)}",
                    (f"c{rng.integers(6)}",), int(rng.integers(1, 5)))
        for _ in range(60)
    ]
    return build_backoff_tensors(records)


def entry(index, ranks, reg, avg_fit):
    report = FitReport(avg_fit, avg_fit, avg_fit, avg_fit, 0.0, 1)
    return GridEntry(index=index, ranks=Ranks(*ranks), reg=Regularizers(*reg), report=report, seed=0)


class TestGridSpec(unittest.TestCase):

    def test_01_cell_count(self):
        spec = GridSpec(rank_values=(2, 3), lambda_values=(0.0, 0.5))
        self.assertEqual(len(grid_cells(spec)), 2 ** 3 * 2 ** 3)

    def test_02_default_axes(self):
        spec = GridSpec()
        self.assertEqual(spec.rank_values, tuple(range(5, 21)))
        self.assertEqual(spec.lambda_values, (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0))

    def test_03_per_axis_override(self):
        spec = GridSpec(rank_values=(2,), lambda_values=(0.0,), r1_values=(2, 3, 4))
        self.assertEqual([c[0].r1 for c in grid_cells(spec)], [2, 3, 4])

    def test_04_invalid_lambda(self):
        with self.assertRaises(ConfigError):
            validate_grid(GridSpec(rank_values=(2,), lambda_values=(1.5,)))

    def test_05_invalid_rank(self):
        with self.assertRaises(ConfigError):
            validate_grid(GridSpec(rank_values=(0,), lambda_values=(0.0,)))

    def test_06_empty_axis(self):
        with self.assertRaises(ConfigError):
            validate_grid(GridSpec(rank_values=(), lambda_values=(0.0,)))

    def test_07_preset_configs_are_valid(self):
        configs = preset_configs()
        self.assertEqual(set(configs), {"shootings", "nyt_sports", "muc"})
        self.assertEqual(configs["shootings"], (Ranks(10, 20, 15), Regularizers(0.3, 0.1, 0.7)))
        for ranks, reg in PRESET_CONFIGS.values():
            self.assertEqual(len(grid_cells(single_cell_spec(ranks, reg))), 1)


class TestSelection(unittest.TestCase):

    def test_01_best_fit_wins(self):
        entries = [entry(0, (3, 3, 3), (0, 0, 0), 0.5), entry(1, (4, 4, 4), (0, 0, 0), 0.7)]
        self.assertEqual(min(entries, key=_selection_key).index, 1)

    def test_02_ties_go_to_smaller_ranks_then_lambdas(self):
        entries = [
            entry(0, (4, 3, 3), (0, 0, 0), 0.7),
            entry(1, (3, 4, 3), (0.5, 0, 0), 0.7),
            entry(2, (3, 4, 3), (0.1, 0, 0), 0.7),
        ]
        self.assertEqual(min(entries, key=_selection_key).index, 2)


class TestGridSearch(unittest.TestCase):

    def setUp(self):
        self.tensors = small_tensors()

    def test_01_single_cell_matches_factorize(self):
        spec = single_cell_spec(Ranks(2, 2, 2), Regularizers(0.1, 0.1, 0.1))
        result = grid_search(self.tensors, spec, max_iters=15, master_seed=3)
        f, report = factorize(self.tensors, Ranks(2, 2, 2), Regularizers(0.1, 0.1, 0.1), max_iters=15, seed=derive_seed(3, 0))
        self.assertEqual(result.best.report.avg_fit, report.avg_fit)
        for a, b in zip(result.winner_factors.arrays(), f.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_02_oversized_ranks_are_skipped(self):
        n1 = self.tensors.vocab.sizes[0]
        spec = GridSpec(rank_values=(2,), lambda_values=(0.0,), r1_values=(2, n1 + 1))
        with self.assertLogs("schema.gridsearch", level="WARNING"):
            result = grid_search(self.tensors, spec, max_iters=5)
        self.assertIsNotNone(result.entries[1].skipped)
        self.assertIsNone(result.entries[1].report)
        self.assertEqual(result.winner, 0)

    def test_03_all_skipped(self):
        spec = GridSpec(rank_values=(99,), lambda_values=(0.0,))
        with self.assertLogs("schema.gridsearch", level="WARNING"):
            with self.assertRaises(ConfigError):
                grid_search(self.tensors, spec)

    def test_04_threads_do_not_change_results(self):
        spec = GridSpec(rank_values=(2, 3), lambda_values=(0.0,), r2_values=(2,), r3_values=(2,))
        serial = grid_search(self.tensors, spec, max_iters=10, master_seed=5, threads=1)
        threaded = grid_search(self.tensors, spec, max_iters=10, master_seed=5, threads=2)
        self.assertEqual(serial.winner, threaded.winner)
        for a, b in zip(serial.entries, threaded.entries):
            self.assertEqual(a.report.avg_fit, b.report.avg_fit)
            self.assertEqual(a.seed, b.seed)

    def test_05_grid_frame(self):
        spec = GridSpec(rank_values=(2,), lambda_values=(0.0, 0.5), r1_values=(2,), r2_values=(2,), r3_values=(2,), lambda_a_values=(0.0,), lambda_b_values=(0.0,))
        result = grid_search(self.tensors, spec, max_iters=5)
        frame = grid_frame(result)
        self.assertEqual(len(frame), 2)
        self.assertEqual(list(frame["lambda_c"]), [0.0, 0.5])
        self.assertEqual(int(frame["winner"].sum()), 1)
        for column in ("fit1", "fit2", "fit3", "avg_fit", "iterations"):
            self.assertIn(column, frame.columns)
        self.assertNotIn("wall_time_s", frame.columns)
        timed = grid_frame(result, timings=True)
        self.assertTrue((timed["wall_time_s"] >= 0).all())


if __name__ == "__main__":
    unittest.main()

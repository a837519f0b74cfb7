#!/usr/bin/env python3
"""
Models, types, and constants for the schema induction pipeline
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, TypedDict

import numpy as np


# --- Constants ---
# Comment: Numerical guard for denominators and factor entries.
EPSILON = 1e-12

# Comment: Solver defaults.
DEFAULT_MAX_ITERS = 500
DEFAULT_TOL = 1e-6
INIT_ITERS = 50
INIT_RESTARTS = 4
DEFAULT_SEED = 0

# Comment: Miner and ingestion defaults.
DEFAULT_TOP_N = 5
DEFAULT_LABEL_K = 3
DEFAULT_TOP_S = 50
DEFAULT_TOP_RELATIONS = 50
DEFAULT_MIN_EDGE_RATIO = 0.0

# Comment: Grid defaults; lambdas are 0.0, 0.1, ..., 1.0.
DEFAULT_RANK_VALUES: Tuple[int, ...] = tuple(range(5, 21))
DEFAULT_LAMBDA_VALUES: Tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(11))

# Comment: Residuals are evaluated slice by slice when a dense slice stays under this many cells.
DENSE_SLICE_LIMIT = 4_000_000

# Comment: Process exit codes.
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

PACKAGE_VERSION = "0.3.0"

# Comment: Artifact file names inside an output directory.
TENSORS_FILE = "tensors.jsonl"
INGEST_REPORT_FILE = "ingest_report.json"
FACTORS_FILE = "factors.json"
FACTORS_BIN_FILE = "factors.bin"
FIT_REPORT_FILE = "fit_report.json"
GRID_CSV_FILE = "grid.csv"
GRID_RESULT_FILE = "grid_result.json"
SCHEMATA_FILE = "schemata.jsonl"
SCHEMATA_TABLE_FILE = "schemata.txt"
HARDCLUST_FILE = "hardclust.jsonl"
SYNTH_TUPLES_FILE = "tuples.tsv"
SYNTH_PLANTED_FILE = "planted.json"
MANIFEST_FILE = "manifest.json"
ERRORS_FILE = "errors.jsonl"


# --- Corpus types ---
@dataclass(frozen=True)
class TupleRecord:
    subject: str
    relation: str
    object: str
    others: Tuple[str, ...] = ()
    count: int = 1


@dataclass
class Vocabulary:
    """Four first-appearance ordered symbol tables."""
    subjects: List[str] = field(default_factory=list)
    objects: List[str] = field(default_factory=list)
    others: List[str] = field(default_factory=list)
    relations: List[str] = field(default_factory=list)

    @property
    def sizes(self) -> Tuple[int, int, int, int]:
        return len(self.subjects), len(self.objects), len(self.others), len(self.relations)


# --- Factorization types ---
@dataclass(frozen=True)
class Ranks:
    r1: int
    r2: int
    r3: int

    def as_tuple(self) -> Tuple[int, int, int]:
        return self.r1, self.r2, self.r3


@dataclass(frozen=True)
class Regularizers:
    lambda_a: float = 0.0
    lambda_b: float = 0.0
    lambda_c: float = 0.0

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.lambda_a, self.lambda_b, self.lambda_c


@dataclass
class FactorSet:
    """Shared factors A (n1 x r1), B (n2 x r2), C (n3 x r3) and cores G1 (r2 x r3 x m), G2 (r1 x r3 x m), G3 (r1 x r2 x m)."""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray

    def copy(self) -> "FactorSet":
        return FactorSet(*(np.array(m, copy=True) for m in self.arrays()))

    def arrays(self) -> Tuple[np.ndarray, ...]:
        return self.A, self.B, self.C, self.G1, self.G2, self.G3

    @property
    def ranks(self) -> Ranks:
        return Ranks(self.A.shape[1], self.B.shape[1], self.C.shape[1])

    @property
    def n_relations(self) -> int:
        return self.G3.shape[2]


@dataclass
class FitReport:
    fit1: float
    fit2: float
    fit3: float
    avg_fit: float
    objective: float
    iterations_run: int
    objective_trace: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# --- Model selection types ---
@dataclass
class GridSpec:
    rank_values: Tuple[int, ...] = DEFAULT_RANK_VALUES
    lambda_values: Tuple[float, ...] = DEFAULT_LAMBDA_VALUES
    # Per-axis overrides; None falls back to the shared list.
    r1_values: Optional[Tuple[int, ...]] = None
    r2_values: Optional[Tuple[int, ...]] = None
    r3_values: Optional[Tuple[int, ...]] = None
    lambda_a_values: Optional[Tuple[float, ...]] = None
    lambda_b_values: Optional[Tuple[float, ...]] = None
    lambda_c_values: Optional[Tuple[float, ...]] = None


@dataclass
class GridEntry:
    index: int
    ranks: Ranks
    reg: Regularizers
    report: Optional[FitReport]
    seed: int
    wall_time: float = 0.0
    skipped: Optional[str] = None


@dataclass
class GridResult:
    entries: List[GridEntry]
    winner: int
    winner_factors: Optional[FactorSet] = None

    @property
    def best(self) -> GridEntry:
        return self.entries[self.winner]


# --- Schema types ---
@dataclass(frozen=True)
class BinarySchema:
    relation: int
    side: int  # 1 -> (B, C), 2 -> (A, C), 3 -> (A, B)
    left_col: int
    right_col: int
    weight: float


@dataclass
class ColumnLabel:
    matrix: str  # "A", "B" or "C"
    column: int
    phrases: List[Tuple[str, float]]


@dataclass
class InducedSchema:
    relation: int
    relation_name: str
    a_col: int
    b_col: int
    c_cols: Tuple[int, ...]
    score: float = 0.0
    labels: List[ColumnLabel] = field(default_factory=list)

    @property
    def arity(self) -> int:
        return 2 + len(self.c_cols)

    def signature(self) -> str:
        args = [f"A{self.a_col}", f"B{self.b_col}"] + [f"C{c}" for c in self.c_cols]
        return f"{self.relation_name}<{', '.join(args)}>"


@dataclass
class HardClustSchema:
    relation: str
    subjects: List[Tuple[str, int]]
    objects: List[Tuple[str, int]]
    others: List[Tuple[str, int]]


# --- Synthetic data ---
@dataclass
class PlantedSchema:
    relation: int
    a_block: int
    b_block: int
    c_blocks: Tuple[int, ...]
    weight: float = 1.0


@dataclass
class SyntheticSpec:
    n_subject_blocks: int = 4
    n_object_blocks: int = 4
    n_other_blocks: int = 5
    block_size: int = 3
    n_relations: int = 5
    planted: List[PlantedSchema] = field(default_factory=list)
    noise_rate: float = 0.0
    seed: int = DEFAULT_SEED


# --- Run configuration ---
@dataclass
class RunConfig:
    input_path: Optional[Path] = None
    output_dir: Optional[Path] = None
    top_relations: int = DEFAULT_TOP_RELATIONS
    casefold: bool = False
    strict: bool = False
    ranks: Optional[Ranks] = None
    reg: Regularizers = field(default_factory=Regularizers)
    grid: Optional[GridSpec] = None
    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    binary_factors: bool = False
    top_n: int = DEFAULT_TOP_N
    label_k: int = DEFAULT_LABEL_K
    top_s: int = DEFAULT_TOP_S
    min_edge_ratio: float = DEFAULT_MIN_EDGE_RATIO
    threads: int = 1
    grid_timings: bool = False
    synthetic: Optional[SyntheticSpec] = None

    def validate(self) -> "RunConfig":
        """Check every bound; raises ConfigError on the first violation."""
        from .errors import ConfigError

        if self.ranks is not None and self.grid is not None:
            raise ConfigError("fixed ranks and a grid spec are mutually exclusive")
        if self.ranks is not None and min(self.ranks.as_tuple()) < 1:
            raise ConfigError(f"ranks must be >= 1, got {self.ranks.as_tuple()}")
        for name, value in zip(("lambda_a", "lambda_b", "lambda_c"), self.reg.as_tuple()):
            if not 0.0 <= value < float("inf"):
                raise ConfigError(f"{name} must be a finite non-negative number, got {value}")
        positive = {
            "top_relations": self.top_relations, "max_iters": self.max_iters, "top_n": self.top_n,
            "label_k": self.label_k, "top_s": self.top_s, "threads": self.threads,
        }
        for name, value in positive.items():
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if not self.tol >= 0:
            raise ConfigError(f"tol must be >= 0, got {self.tol}")
        if not 0.0 <= self.min_edge_ratio <= 1.0:
            raise ConfigError(f"min_edge_ratio must lie in [0, 1], got {self.min_edge_ratio}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        return self


# --- TypedDicts ---
# Comment: One line of schemata.jsonl / hardclust.jsonl.
class SchemaRecord(TypedDict, total=False):
    method: str
    rank: int
    relation: str
    relation_index: int
    columns: List[str]
    labels: Dict[str, List[List[Any]]]
    score: float


# Comment: Run manifest written next to every command's artifacts.
class Manifest(TypedDict, total=False):
    command: str
    seed: int
    config_hash: str
    config: Dict[str, Any]
    versions: Dict[str, str]
    artifacts: List[str]

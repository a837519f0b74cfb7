#!/usr/bin/env python3
"""
Tuple ingestion and back-off tensor construction.

Input lines are tab separated: subject, relation, object, other1 [, other2] [, count].
From the split 4-tuples (subject, relation, object, other) the pipeline builds three 3-mode
tensors by summing out one noun-phrase argument:

- X1 (n2 x n3 x m) drops the subject,
- X2 (n1 x n3 x m) drops the object,
- X3 (n1 x n2 x m) drops the other argument.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Tuple

import numpy as np

from .errors import ConfigError, DataError, EmptyCorpusError
from .models import TupleRecord, Vocabulary
from .sparse_tensor import SparseTensor3
from .utils import get_logger

logger = get_logger("corpus")

MIN_FIELDS = 3
MAX_FIELDS = 6


@dataclass(frozen=True)
class BackoffTensors:
    x1: SparseTensor3
    x2: SparseTensor3
    x3: SparseTensor3
    vocab: Vocabulary
    total_mass: float

    def tensors(self) -> Tuple[SparseTensor3, SparseTensor3, SparseTensor3]:
        return self.x1, self.x2, self.x3


@dataclass(frozen=True)
class FourModeTensor:
    """The (subject, object, other, relation) count tensor, kept only for diagnostics."""
    shape: Tuple[int, int, int, int]
    subs: np.ndarray
    vals: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    @property
    def sparsity_ratio(self) -> float:
        cells = math.prod(self.shape)
        return self.nnz / cells if cells else 0.0


# --- Parsing ---
def _parse_line(line: str, casefold: bool) -> TupleRecord:
    fields = [f.strip() for f in line.rstrip("\r\n").split("\t")]
    if len(fields) < MIN_FIELDS or len(fields) > MAX_FIELDS:
        raise ValueError(f"expected {MIN_FIELDS}-{MAX_FIELDS} tab-separated fields, got {len(fields)}")

    count = 1
    # A trailing count is only recognised once at least one `other` precedes it.
    if len(fields) >= 5 and fields[-1].isdigit():
        count = int(fields[-1])
        fields = fields[:-1]
        if count < 1:
            raise ValueError(f"count must be positive, got {count}")
    if len(fields) > 5:
        raise ValueError("at most two `other` arguments are allowed")

    if casefold:
        fields = [f.casefold() for f in fields]
    subject, relation, obj = fields[:3]
    others = tuple(f for f in fields[3:])
    if not subject or not relation or not obj:
        raise ValueError("subject, relation and object must be non-empty")
    if any(not o for o in others):
        raise ValueError("empty `other` argument")
    return TupleRecord(subject, relation, obj, others, count)


def parse_tuples(lines: Iterable[str], strict: bool = False, casefold: bool = False) -> List[TupleRecord]:
    """Parse TSV lines; malformed lines are reported and skipped, or abort in strict mode."""
    records: List[TupleRecord] = []
    skipped = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            records.append(_parse_line(line, casefold))
        except ValueError as e:
            if strict:
                raise DataError(f"line {lineno}: {e}") from None
            logger.warning("line %d skipped: %s", lineno, e)
            skipped += 1
    if skipped:
        logger.warning("%d malformed line(s) skipped", skipped)
    return records


def read_tuples(path: Path, strict: bool = False, casefold: bool = False) -> List[TupleRecord]:
    try:
        with path.open("r", encoding="utf-8") as f:
            return parse_tuples(f, strict=strict, casefold=casefold)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DataError(f"{path} is not valid UTF-8: {e}") from e


# --- Record transforms ---
def split_five_tuples(records: Iterable[TupleRecord]) -> List[TupleRecord]:
    """Split 5-tuples into two 4-tuples carrying the original count; drop pure triples."""
    out: List[TupleRecord] = []
    dropped = 0
    for r in records:
        if not r.others:
            dropped += 1
            continue
        for other in r.others:
            out.append(TupleRecord(r.subject, r.relation, r.object, (other,), r.count))
    if dropped:
        logger.warning("dropped %d tuple(s) without an `other` argument", dropped)
    return out


def relation_mass(records: Iterable[TupleRecord]) -> Counter:
    mass: Counter = Counter()
    for r in records:
        mass[r.relation] += r.count
    return mass


def filter_top_relations(records: List[TupleRecord], k: int) -> List[TupleRecord]:
    """Keep records whose relation is among the k heaviest; boundary ties go to the smaller name."""
    if k < 1:
        raise ConfigError(f"top relation count must be >= 1, got {k}")
    mass = relation_mass(records)
    if len(mass) <= k:
        return list(records)
    ranked = sorted(mass.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = {name for name, _ in ranked[:k]}
    return [r for r in records if r.relation in keep]


# --- Tensor construction ---
def _index_records(records: List[TupleRecord]) -> Tuple[Vocabulary, np.ndarray, np.ndarray]:
    """Assign first-appearance indices; returns vocab, (n, 4) index array [s, o, c, r] and counts."""
    if not records:
        raise EmptyCorpusError()
    vocab = Vocabulary()
    tables: Dict[str, Dict[str, int]] = {"s": {}, "o": {}, "c": {}, "r": {}}
    lists = {"s": vocab.subjects, "o": vocab.objects, "c": vocab.others, "r": vocab.relations}

    def lookup(table: str, symbol: str) -> int:
        index = tables[table].get(symbol)
        if index is None:
            index = len(lists[table])
            tables[table][symbol] = index
            lists[table].append(symbol)
        return index

    idx = np.empty((len(records), 4), dtype=np.int64)
    counts = np.empty(len(records), dtype=np.int64)
    for row, r in enumerate(records):
        if len(r.others) != 1:
            raise DataError(f"record {r} must carry exactly one `other` argument; split 5-tuples first")
        if r.count < 1:
            raise DataError(f"record {r} has non-positive count")
        idx[row] = (lookup("s", r.subject), lookup("o", r.object), lookup("c", r.others[0]), lookup("r", r.relation))
        counts[row] = r.count
    return vocab, idx, counts


def build_backoff_tensors(records: List[TupleRecord]) -> BackoffTensors:
    vocab, idx, counts = _index_records(records)
    n1, n2, n3, m = vocab.sizes
    s, o, c, r = idx.T
    vals = counts.astype(np.float64)
    x1 = SparseTensor3.from_arrays((n2, n3, m), np.column_stack([o, c, r]), vals)
    x2 = SparseTensor3.from_arrays((n1, n3, m), np.column_stack([s, c, r]), vals)
    x3 = SparseTensor3.from_arrays((n1, n2, m), np.column_stack([s, o, r]), vals)
    total = int(counts.sum())
    logger.info(
        "built back-off tensors X1 %s, X2 %s, X3 %s from %d tuples (mass %d)",
        "x".join(map(str, x1.shape)), "x".join(map(str, x2.shape)), "x".join(map(str, x3.shape)),
        len(records), total,
    )
    return BackoffTensors(x1, x2, x3, vocab, total)


def build_4mode_tensor(records: List[TupleRecord]) -> Tuple[FourModeTensor, Vocabulary]:
    vocab, idx, counts = _index_records(records)
    shape = vocab.sizes
    strides = np.array([1, shape[0], shape[0] * shape[1], shape[0] * shape[1] * shape[2]], dtype=np.int64)
    linear = idx @ strides
    keys, inverse = np.unique(linear, return_inverse=True)
    vals = np.bincount(inverse, weights=counts.astype(np.float64), minlength=keys.size)
    subs = np.empty((keys.size, 4), dtype=np.int64)
    rem = keys
    for axis in range(4):
        subs[:, axis] = rem % shape[axis]
        rem = rem // shape[axis]
    return FourModeTensor(shape, subs, vals), vocab


def marginalize_4mode(t: FourModeTensor, drop: str) -> SparseTensor3:
    """Sum out one NP argument: ``drop`` is "subject" (X1), "object" (X2) or "other" (X3)."""
    axes = {"subject": 0, "object": 1, "other": 2}
    if drop not in axes:
        raise ConfigError(f"cannot marginalize over {drop!r}")
    keep = [a for a in range(4) if a != axes[drop]]
    return SparseTensor3.from_arrays(tuple(t.shape[a] for a in keep), t.subs[:, keep], t.vals)


def ingest_report(tensors: BackoffTensors) -> Dict[str, Any]:
    n1, n2, n3, m = tensors.vocab.sizes
    report: Dict[str, Any] = {
        "vocabulary": {"subjects": n1, "objects": n2, "others": n3, "relations": m},
        "shapes": {name: list(t.shape) for name, t in zip(("x1", "x2", "x3"), tensors.tensors())},
        "shape_summary": " / ".join("x".join(map(str, t.shape)) for t in tensors.tensors()),
        "nnz": {name: t.nnz for name, t in zip(("x1", "x2", "x3"), tensors.tensors())},
        "density": {name: t.density for name, t in zip(("x1", "x2", "x3"), tensors.tensors())},
        "total_mass": tensors.total_mass,
    }
    return report

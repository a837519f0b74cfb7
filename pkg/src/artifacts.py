#!/usr/bin/env python3
"""
Serialization of pipeline artifacts: back-off tensors, factor sets, fit reports, grid results and schemata.

Every writer goes through the atomic helpers in utils, so a failed run never leaves a half-written file.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .corpus import BackoffTensors
from .errors import DataError
from .model_selection import grid_frame
from .models import (
    FactorSet, FitReport, GridResult, HardClustSchema, InducedSchema, SchemaRecord, Vocabulary,
)
from .sparse_tensor import SparseTensor3
from .utils import atomic_write_bytes, atomic_write_text, read_json, read_jsonl, to_jsonable, write_json, write_jsonl

FACTOR_NAMES = ("A", "B", "C", "G1", "G2", "G3")
TENSOR_NAMES = ("x1", "x2", "x3")
VOCAB_NAMES = ("subjects", "objects", "others", "relations")

# Comment: Binary sidecar layout: magic, then per array ndim (u32), dims (u32 each), float64 LE data.
BINARY_MAGIC = b"SIF1"


# --- Back-off tensors ---
def write_tensors(path: Path, tensors: BackoffTensors) -> None:
    """One header line, one line per vocabulary table, one line per tensor (coordinates and values)."""
    records: List[Dict[str, Any]] = [{"kind": "backoff_tensors", "total_mass": tensors.total_mass}]
    for name in VOCAB_NAMES:
        records.append({"vocab": name, "symbols": list(getattr(tensors.vocab, name))})
    for name, t in zip(TENSOR_NAMES, tensors.tensors()):
        records.append({"tensor": name, "shape": list(t.shape), "subs": t.subs.tolist(), "vals": t.vals.tolist()})
    write_jsonl(path, records)


def read_tensors(path: Path) -> BackoffTensors:
    if not path.exists():
        raise DataError(f"missing tensor file {path}; run ingest first")
    vocab = Vocabulary()
    tensors: Dict[str, SparseTensor3] = {}
    total_mass = 0.0
    try:
        for record in read_jsonl(path):
            if record.get("kind") == "backoff_tensors":
                total_mass = record["total_mass"]
            elif "vocab" in record:
                getattr(vocab, record["vocab"]).extend(record["symbols"])
            elif "tensor" in record:
                subs = np.asarray(record["subs"], dtype=np.int64).reshape(-1, 3)
                tensors[record["tensor"]] = SparseTensor3.from_arrays(record["shape"], subs, record["vals"])
    except (ValueError, KeyError, AttributeError) as e:
        raise DataError(f"corrupt tensor file {path}: {e}") from e
    missing = [n for n in TENSOR_NAMES if n not in tensors]
    if missing:
        raise DataError(f"tensor file {path} lacks {', '.join(missing)}")
    return BackoffTensors(tensors["x1"], tensors["x2"], tensors["x3"], vocab, total_mass)


# --- Factor sets ---
def factors_to_dict(f: FactorSet) -> Dict[str, Any]:
    out: Dict[str, Any] = {"shapes": {n: list(m.shape) for n, m in zip(FACTOR_NAMES, f.arrays())}}
    for name, m in zip(FACTOR_NAMES, f.arrays()):
        out[name] = m.tolist()
    return out


def factors_from_dict(data: Dict[str, Any]) -> FactorSet:
    try:
        arrays = [np.asarray(data[n], dtype=np.float64).reshape(data["shapes"][n]) for n in FACTOR_NAMES]
    except (KeyError, ValueError) as e:
        raise DataError(f"corrupt factor set: {e}") from e
    return FactorSet(*arrays)


def encode_binary(f: FactorSet) -> bytes:
    buf = io.BytesIO()
    buf.write(BINARY_MAGIC)
    for m in f.arrays():
        buf.write(struct.pack("<I", m.ndim))
        buf.write(struct.pack(f"<{m.ndim}I", *m.shape))
        buf.write(np.ascontiguousarray(m, dtype="<f8").tobytes())
    return buf.getvalue()


def decode_binary(data: bytes) -> FactorSet:
    if data[:4] != BINARY_MAGIC:
        raise DataError("factor sidecar has an unknown header")
    offset = 4
    arrays = []
    try:
        for _ in FACTOR_NAMES:
            (ndim,) = struct.unpack_from("<I", data, offset)
            offset += 4
            dims = struct.unpack_from(f"<{ndim}I", data, offset)
            offset += 4 * ndim
            count = int(np.prod(dims))
            arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(dims).astype(np.float64))
            offset += 8 * count
    except (struct.error, ValueError) as e:
        raise DataError(f"truncated factor sidecar: {e}") from e
    return FactorSet(*arrays)


def write_factors(path: Path, f: FactorSet, binary_path: Optional[Path] = None) -> None:
    write_json(path, factors_to_dict(f))
    if binary_path is not None:
        atomic_write_bytes(binary_path, encode_binary(f))


def read_factors(path: Path, binary_path: Optional[Path] = None) -> FactorSet:
    """Prefer the binary sidecar when given and present."""
    if binary_path is not None and binary_path.exists():
        return decode_binary(binary_path.read_bytes())
    if not path.exists():
        raise DataError(f"missing factor file {path}; run factorize or gridsearch first")
    return factors_from_dict(read_json(path))


def write_fit_report(path: Path, report: FitReport, extra: Optional[Dict[str, Any]] = None) -> None:
    write_json(path, {**report.to_dict(), **to_jsonable(extra or {})})


# --- Grid search ---
def write_grid(csv_path: Path, json_path: Path, result: GridResult, timings: bool = False) -> None:
    frame = grid_frame(result, timings)
    atomic_write_text(csv_path, frame.to_csv(index=False, float_format="%r", lineterminator="\n"))
    best = result.best
    write_json(json_path, {
        "winner": best.index,
        "ranks": to_jsonable(best.ranks),
        "reg": to_jsonable(best.reg),
        "report": best.report.to_dict() if best.report else None,
        "cells": len(result.entries),
        "skipped": [e.index for e in result.entries if e.skipped],
    })


# --- Schemata ---
def schema_record(rank: int, s: InducedSchema) -> SchemaRecord:
    columns = [f"A{s.a_col}", f"B{s.b_col}"] + [f"C{c}" for c in s.c_cols]
    labels = {f"{label.matrix}{label.column}": [[p, w] for p, w in label.phrases] for label in s.labels}
    return SchemaRecord(
        method="tfba", rank=rank, relation=s.relation_name, relation_index=s.relation,
        columns=columns, labels=labels, score=s.score,
    )


def hardclust_record(rank: int, s: HardClustSchema) -> SchemaRecord:
    labels = {
        "subject": [[p, n] for p, n in s.subjects],
        "object": [[p, n] for p, n in s.objects],
        "other": [[p, n] for p, n in s.others],
    }
    return SchemaRecord(method="hardclust", rank=rank, relation=s.relation, columns=["subject", "object", "other"], labels=labels)


def write_schemata(path: Path, schemata: Sequence[InducedSchema]) -> None:
    write_jsonl(path, [schema_record(i, s) for i, s in enumerate(schemata, 1)])


def write_hardclust(path: Path, schemata: Sequence[HardClustSchema]) -> None:
    write_jsonl(path, [hardclust_record(i, s) for i, s in enumerate(schemata, 1)])


def read_schema_records(path: Path) -> List[SchemaRecord]:
    if not path.exists():
        return []
    return [SchemaRecord(**r) for r in read_jsonl(path)]

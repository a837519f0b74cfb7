#!/usr/bin/env python3
"""
Utility functions for the schema induction pipeline
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Optional

import numpy as np

from .models import ERRORS_FILE


# --- Logging ---
_LOG_FORMAT = "[%(name)s] %(message)s"
_configured = False


def configure_logging(level: int = logging.INFO) -> None:
    """Route every tagged logger to stderr with the `[tag] message` layout."""
    global _configured
    root = logging.getLogger("schema")
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(level)


class _TagFilter(logging.Filter):
    """Strip the shared `schema.` prefix so records print as `[factorize] ...`."""

    def filter(self, record: logging.LogRecord) -> bool:
        if record.name.startswith("schema."):
            record.name = record.name[len("schema."):]
        return True


def get_logger(tag: str) -> logging.Logger:
    logger = logging.getLogger(f"schema.{tag}")
    if not any(isinstance(f, _TagFilter) for f in logger.filters):
        logger.addFilter(_TagFilter())
    return logger


# --- File Operations ---
def ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write to a temp file in the target directory, then rename over the destination."""
    ensure_dir(path.parent)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def dumps_line(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False)


def write_jsonl(path: Path, records: Iterable[Any]) -> None:
    atomic_write_text(path, "".join(dumps_line(r) + "\n" for r in records))


def read_jsonl(path: Path) -> Iterator[Dict[str, Any]]:
    with path.open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield json.loads(line)


def write_json(path: Path, obj: Any) -> None:
    atomic_write_text(path, json.dumps(obj, ensure_ascii=False, indent=2, allow_nan=False) + "\n")


def read_json(path: Path) -> Any:
    with path.open("r", encoding="utf-8") as f:
        return json.load(f)


def append_error_to_log(output_dir: Optional[Path], error: Dict[str, Any]) -> None:
    """Append error to errors log (JSONL format)"""
    if output_dir is None:
        return
    try:
        ensure_dir(output_dir)
        record = {"timestamp": time.time(), **error}
        with (output_dir / ERRORS_FILE).open("a", encoding="utf-8") as f:
            json.dump(record, f, ensure_ascii=False)
            f.write("\n")
    except Exception as e:
        # If we can't log the error, at least print it
        print(f"[error-log] failed to log error: {e}", file=sys.stderr)


# --- Hashing and seeds ---
def to_jsonable(obj: Any) -> Any:
    """Convert dataclasses, paths, tuples and numpy scalars into plain JSON values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-cell seed: first 8 bytes of sha256(master_seed, index)."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


# --- Text Processing ---
def format_float(value: float) -> str:
    """Shortest round-trip representation."""
    return repr(float(value))

#!/usr/bin/env python3
"""
Output directory management for pipeline runs
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import networkx
import numpy
import pandas
import scipy

from .errors import ConfigError, DataError
from .models import MANIFEST_FILE, PACKAGE_VERSION, Manifest
from .utils import append_error_to_log, config_hash, ensure_dir, get_logger, read_json, to_jsonable, write_json

logger = get_logger("workspace")


def library_versions() -> Dict[str, str]:
    return {
        "schema-induce": PACKAGE_VERSION,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "networkx": networkx.__version__,
        "pandas": pandas.__version__,
    }


@dataclass
class Workspace:
    """One output directory; commands read upstream artifacts from it and write their own into it."""
    root: Path
    written: List[str] = field(default_factory=list)

    @classmethod
    def open(cls, root: Any) -> "Workspace":
        if root is None:
            raise ConfigError("an output directory is required (--out)")
        path = Path(root)
        if path.exists() and not path.is_dir():
            raise ConfigError(f"output path {path} exists and is not a directory")
        return cls(path)

    def path(self, name: str) -> Path:
        return self.root / name

    def require(self, *names: str) -> None:
        """Fail before any write when an upstream artifact is missing."""
        missing = [n for n in names if not self.path(n).exists()]
        if missing:
            raise DataError(f"missing input artifact(s) in {self.root}: {', '.join(missing)}")

    def prepare(self) -> None:
        ensure_dir(self.root)

    def record(self, name: str) -> Path:
        """Path for an artifact this run is about to write; listed in the manifest."""
        if name not in self.written:
            self.written.append(name)
        return self.path(name)

    def write_manifest(self, command: str, config: Any, seed: int) -> Manifest:
        plain = to_jsonable(config)
        manifest = Manifest(
            command=command,
            seed=seed,
            config_hash=config_hash(plain),
            config=plain,
            versions=library_versions(),
            artifacts=sorted(self.written),
        )
        runs = self.read_manifest()
        runs[command] = manifest
        write_json(self.path(MANIFEST_FILE), dict(sorted(runs.items())))
        logger.info("%s: wrote %d artifact(s) to %s", command, len(self.written), self.root)
        return manifest

    def read_manifest(self) -> Dict[str, Any]:
        """Manifests of every command run in this directory, keyed by command."""
        path = self.path(MANIFEST_FILE)
        return read_json(path) if path.exists() else {}

    def log_error(self, command: str, error: BaseException) -> None:
        if not self.root.exists():
            return
        append_error_to_log(self.root, {
            "type": f"{command}_error",
            "error_class": type(error).__name__,
            "error": str(error),
            "exit_code": getattr(error, "exit_code", 1),
        })

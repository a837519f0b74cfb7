#!/usr/bin/env python3
"""
Plain-text report of an output directory.

Reads whatever artifacts are present (ingest report, fit report, grid table, induced schemata,
HardClust schemata, planted schemata) and renders one section per artifact.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from .artifacts import read_schema_records
from .models import (
    DEFAULT_LABEL_K, FIT_REPORT_FILE, GRID_CSV_FILE, HARDCLUST_FILE, INGEST_REPORT_FILE,
    SCHEMATA_FILE, SchemaRecord,
)
from .utils import format_float, read_json


class ReportRenderer:
    """Renders the artifacts of one workspace directory into text sections."""

    def __init__(self, root: Path, top_labels: int = DEFAULT_LABEL_K, max_rows: int = 20):
        self.root = root
        self.top_labels = top_labels
        self.max_rows = max_rows

    def _load(self, name: str) -> Optional[Any]:
        path = self.root / name
        return read_json(path) if path.exists() else None

    # --- Sections ---
    def ingest_section(self) -> Optional[str]:
        report = self._load(INGEST_REPORT_FILE)
        if report is None:
            return None
        vocab = report["vocabulary"]
        lines = [
            "== Ingest ==",
            f"vocabulary: {vocab['subjects']} subjects, {vocab['objects']} objects, "
            f"{vocab['others']} others, {vocab['relations']} relations",
            f"tensors (X1 / X2 / X3): {report['shape_summary']}",
            "nnz: " + ", ".join(f"{k}={v}" for k, v in report["nnz"].items()),
            "density: " + ", ".join(f"{k}={format_float(v)}" for k, v in report["density"].items()),
            f"total mass: {format_float(report['total_mass'])}",
        ]
        four_mode = report.get("four_mode")
        if four_mode:
            lines.append(f"4-mode tensor {'x'.join(map(str, four_mode['shape']))}: sparsity ratio {format_float(four_mode['sparsity_ratio'])}")
        return "\n".join(lines)

    def fit_section(self) -> Optional[str]:
        report = self._load(FIT_REPORT_FILE)
        if report is None:
            return None
        lines = ["== Fit =="]
        if "ranks" in report:
            lines.append(f"ranks: {report['ranks']}  lambdas: {report.get('reg')}")
        lines.extend([
            f"FIT X1 {format_float(report['fit1'])}  X2 {format_float(report['fit2'])}  X3 {format_float(report['fit3'])}",
            f"AvgFIT {format_float(report['avg_fit'])}",
            f"objective {format_float(report['objective'])} after {report['iterations_run']} sweep(s)",
        ])
        return "\n".join(lines)

    def grid_section(self) -> Optional[str]:
        path = self.root / GRID_CSV_FILE
        if not path.exists():
            return None
        frame = pd.read_csv(path)
        scored = frame.dropna(subset=["avg_fit"]).sort_values(["avg_fit", "cell"], ascending=[False, True])
        cols = ["cell", "r1", "r2", "r3", "lambda_a", "lambda_b", "lambda_c", "avg_fit", "iterations"]
        header = f"== Grid search ({len(frame)} cell(s), {len(frame) - len(scored)} skipped) =="
        return header + "\n" + scored[cols].head(self.max_rows).to_string(index=False)

    def _labels(self, record: SchemaRecord, key: str) -> str:
        phrases = record.get("labels", {}).get(key, [])
        return ", ".join(str(p) for p, _ in phrases[: self.top_labels])

    def schemata_section(self) -> Optional[str]:
        records = read_schema_records(self.root / SCHEMATA_FILE)
        if not records:
            return None
        lines = [f"== Induced schemata ({len(records)}) =="]
        for r in records[: self.max_rows]:
            lines.append(f"#{r['rank']}  {r['relation']}<{', '.join(r['columns'])}>  score={format_float(r['score'])}")
            for column in r["columns"]:
                lines.append(f"    {column}: {self._labels(r, column)}")
        return "\n".join(lines)

    def hardclust_section(self) -> Optional[str]:
        records = read_schema_records(self.root / HARDCLUST_FILE)
        if not records:
            return None
        lines = [f"== HardClust ({len(records)} relation(s)) =="]
        for r in records[: self.max_rows]:
            args = " | ".join(self._labels(r, key) for key in ("subject", "object", "other"))
            lines.append(f"{r['relation']}: {args}")
        return "\n".join(lines)

    def side_by_side(self) -> Optional[str]:
        """Per relation, the top induced schema next to its HardClust schema."""
        induced = read_schema_records(self.root / SCHEMATA_FILE)
        baseline = {r["relation"]: r for r in read_schema_records(self.root / HARDCLUST_FILE)}
        if not induced or not baseline:
            return None
        best: Dict[str, SchemaRecord] = {}
        for r in induced:
            best.setdefault(r["relation"], r)
        lines = ["== Induced vs HardClust =="]
        for relation in sorted(best):
            r = best[relation]
            ours = " | ".join(self._labels(r, c) for c in r["columns"])
            lines.append(f"{relation}")
            lines.append(f"    induced:   {ours}")
            if relation in baseline:
                theirs = " | ".join(self._labels(baseline[relation], k) for k in ("subject", "object", "other"))
                lines.append(f"    hardclust: {theirs}")
        return "\n".join(lines)

    def render(self) -> str:
        sections: List[Optional[str]] = [
            self.ingest_section(), self.fit_section(), self.grid_section(),
            self.schemata_section(), self.hardclust_section(), self.side_by_side(),
        ]
        present = [s for s in sections if s]
        if not present:
            return f"no artifacts found in {self.root}\n"
        return "\n\n".join(present) + "\n"

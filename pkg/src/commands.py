#!/usr/bin/env python3
"""
Pipeline commands: ingest, factorize, gridsearch, mine, hardclust, synth and report.

Each command validates its configuration and loads its inputs before creating or touching the
output directory, then writes its artifacts and a manifest entry.
"""

from __future__ import annotations

import sys
from typing import Any, Dict, List, Tuple

from .artifacts import (
    read_factors, read_tensors, write_factors, write_fit_report, write_grid, write_hardclust,
    write_schemata, write_tensors,
)
from .baseline_hardclust import hardclust
from .corpus import (
    build_backoff_tensors, filter_top_relations, ingest_report, read_tuples, split_five_tuples,
)
from .errors import ConfigError, EmptyCorpusError
from .factorization import diagnose_4mode, factorize, validate_ranks
from .model_selection import grid_cells, grid_search, single_cell_spec
from .models import (
    FACTORS_BIN_FILE, FACTORS_FILE, FIT_REPORT_FILE, GRID_CSV_FILE, GRID_RESULT_FILE, HARDCLUST_FILE,
    INGEST_REPORT_FILE, SCHEMATA_FILE, SCHEMATA_TABLE_FILE, SYNTH_PLANTED_FILE, SYNTH_TUPLES_FILE,
    TENSORS_FILE, GridSpec, RunConfig, TupleRecord,
)
from .report import ReportRenderer
from .schema_miner import induce_schemata, render_table
from .synthetic import default_spec, recovered, spec_from_dict, validate_spec, write_corpus
from .utils import atomic_write_text, derive_seed, get_logger, read_json, write_json
from .workspace import Workspace

logger = get_logger("cli")


def _clean_result(result: Dict[str, Any]) -> Dict[str, Any]:
    """Drop empty fields; `success` and `command` always stay."""
    cleaned = {"success": result.get("success", True), "command": result["command"]}
    for key, value in result.items():
        if key in cleaned or value is None or value == [] or value == {}:
            continue
        cleaned[key] = value
    return cleaned


def _load_records(config: RunConfig) -> List[TupleRecord]:
    """Read, split and relation-filter the input tuples the same way for every consumer."""
    if config.input_path is None:
        raise ConfigError("an input tuple file is required (--input)")
    records = read_tuples(config.input_path, strict=config.strict, casefold=config.casefold)
    records = split_five_tuples(records)
    if not records:
        raise EmptyCorpusError()
    return filter_top_relations(records, config.top_relations)


def fixed_run_seed(master_seed: int) -> int:
    """Seed of a fixed-rank run; equal to the seed of cell 0 of a grid with the same master seed."""
    return derive_seed(master_seed, 0)


# --- Commands ---
def cmd_ingest(config: RunConfig) -> Dict[str, Any]:
    config.validate()
    ws = Workspace.open(config.output_dir)
    records = _load_records(config)
    tensors = build_backoff_tensors(records)
    report = ingest_report(tensors)
    report["four_mode"] = diagnose_4mode(records, tensors)["four_mode"]

    ws.prepare()
    write_tensors(ws.record(TENSORS_FILE), tensors)
    write_json(ws.record(INGEST_REPORT_FILE), report)
    ws.write_manifest("ingest", config, config.seed)
    return _clean_result({
        "command": "ingest",
        "tuples": len(records),
        "shapes": report["shape_summary"],
        "total_mass": report["total_mass"],
        "four_mode_sparsity": report["four_mode"]["sparsity_ratio"],
    })


def cmd_factorize(config: RunConfig) -> Dict[str, Any]:
    config.validate()
    if config.ranks is None:
        raise ConfigError("factorize needs fixed ranks (--ranks or --preset)")
    ws = Workspace.open(config.output_dir)
    ws.require(TENSORS_FILE)
    tensors = read_tensors(ws.path(TENSORS_FILE))
    validate_ranks(config.ranks, tensors.vocab)

    f, report = factorize(
        tensors, config.ranks, config.reg, max_iters=config.max_iters, tol=config.tol,
        seed=fixed_run_seed(config.seed),
    )
    write_factors(
        ws.record(FACTORS_FILE), f,
        binary_path=ws.record(FACTORS_BIN_FILE) if config.binary_factors else None,
    )
    write_fit_report(ws.record(FIT_REPORT_FILE), report, {"ranks": config.ranks, "reg": config.reg})
    ws.write_manifest("factorize", config, config.seed)
    return _clean_result({
        "command": "factorize",
        "ranks": list(config.ranks.as_tuple()),
        "fits": [report.fit1, report.fit2, report.fit3],
        "avg_fit": report.avg_fit,
        "iterations": report.iterations_run,
    })


def _grid_for(config: RunConfig) -> GridSpec:
    if config.grid is not None:
        return config.grid
    if config.ranks is not None:
        return single_cell_spec(config.ranks, config.reg)
    return GridSpec()


def cmd_gridsearch(config: RunConfig) -> Dict[str, Any]:
    config.validate()
    spec = _grid_for(config)
    grid_cells(spec)
    ws = Workspace.open(config.output_dir)
    ws.require(TENSORS_FILE)
    tensors = read_tensors(ws.path(TENSORS_FILE))

    result = grid_search(
        tensors, spec, max_iters=config.max_iters, tol=config.tol, master_seed=config.seed,
        threads=config.threads, progress=sys.stderr.isatty(),
    )
    best = result.best
    write_grid(ws.record(GRID_CSV_FILE), ws.record(GRID_RESULT_FILE), result, timings=config.grid_timings)
    write_factors(
        ws.record(FACTORS_FILE), result.winner_factors,
        binary_path=ws.record(FACTORS_BIN_FILE) if config.binary_factors else None,
    )
    write_fit_report(ws.record(FIT_REPORT_FILE), best.report, {"ranks": best.ranks, "reg": best.reg})
    ws.write_manifest("gridsearch", config, config.seed)
    return _clean_result({
        "command": "gridsearch",
        "cells": len(result.entries),
        "skipped": sum(1 for e in result.entries if e.skipped),
        "winner": best.index,
        "ranks": list(best.ranks.as_tuple()),
        "lambdas": list(best.reg.as_tuple()),
        "avg_fit": best.report.avg_fit,
    })


def cmd_mine(config: RunConfig) -> Dict[str, Any]:
    config.validate()
    ws = Workspace.open(config.output_dir)
    ws.require(TENSORS_FILE, FACTORS_FILE)
    vocab = read_tensors(ws.path(TENSORS_FILE)).vocab
    f = read_factors(ws.path(FACTORS_FILE), ws.path(FACTORS_BIN_FILE) if config.binary_factors else None)

    schemata = induce_schemata(
        f, vocab, n=config.top_n, k=config.label_k, top_s=config.top_s, min_edge_ratio=config.min_edge_ratio,
    )
    write_schemata(ws.record(SCHEMATA_FILE), schemata)
    atomic_write_text(ws.record(SCHEMATA_TABLE_FILE), render_table(schemata, config.label_k))

    planted = None
    planted_path = ws.path(SYNTH_PLANTED_FILE)
    if planted_path.exists():
        spec = spec_from_dict(read_json(planted_path))
        flags = recovered(schemata[:len(spec.planted)], spec)
        planted = f"{sum(flags)}/{len(flags)}"
        logger.info("planted schemata recovered: %s", planted)
    ws.write_manifest("mine", config, config.seed)
    return _clean_result({
        "command": "mine",
        "schemata": len(schemata),
        "top": [s.signature() for s in schemata[:5]],
        "planted_recovered": planted,
    })


def cmd_hardclust(config: RunConfig) -> Dict[str, Any]:
    config.validate()
    ws = Workspace.open(config.output_dir)
    records = _load_records(config)
    schemata = hardclust(records, config.label_k)

    ws.prepare()
    write_hardclust(ws.record(HARDCLUST_FILE), schemata)
    ws.write_manifest("hardclust", config, config.seed)
    return _clean_result({"command": "hardclust", "schemata": len(schemata)})


def cmd_synth(config: RunConfig) -> Dict[str, Any]:
    config.validate()
    spec = config.synthetic or default_spec(config.seed)
    validate_spec(spec)
    ws = Workspace.open(config.output_dir)

    ws.prepare()
    paths = write_corpus(spec, ws.root)
    for name in (SYNTH_TUPLES_FILE, SYNTH_PLANTED_FILE):
        ws.record(name)
    ws.write_manifest("synth", config, spec.seed)
    return _clean_result({
        "command": "synth",
        "planted": len(spec.planted),
        "tuples": str(paths["tuples"]),
    })


def cmd_report(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    ws = Workspace.open(config.output_dir)
    if not ws.root.is_dir():
        raise ConfigError(f"output directory {ws.root} does not exist")
    text = ReportRenderer(ws.root, top_labels=config.label_k).render()
    return _clean_result({"command": "report"}), text


COMMANDS = {
    "ingest": cmd_ingest,
    "factorize": cmd_factorize,
    "gridsearch": cmd_gridsearch,
    "mine": cmd_mine,
    "hardclust": cmd_hardclust,
    "synth": cmd_synth,
}

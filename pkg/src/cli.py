#!/usr/bin/env python3
"""
Command-line surface: argparse subcommands over the pipeline commands.

Options come from an optional JSON config file (keys are RunConfig field names) with any flag
given on the command line overriding it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .commands import COMMANDS, cmd_report
from .errors import ConfigError, SchemaInductionError
from .model_selection import preset_configs
from .models import EXIT_OK, GridSpec, Ranks, Regularizers, RunConfig
from .synthetic import default_planted, spec_from_dict
from .utils import configure_logging, dumps_line, get_logger, to_jsonable
from .workspace import Workspace

logger = get_logger("cli")


# --- Config loading ---
def _ranks(value: Any) -> Ranks:
    if isinstance(value, dict):
        return Ranks(int(value["r1"]), int(value["r2"]), int(value["r3"]))
    r1, r2, r3 = value
    return Ranks(int(r1), int(r2), int(r3))


def _reg(value: Any) -> Regularizers:
    if isinstance(value, dict):
        return Regularizers(**{k: float(v) for k, v in value.items()})
    la, lb, lc = value
    return Regularizers(float(la), float(lb), float(lc))


def _grid(value: Dict[str, Any]) -> GridSpec:
    return GridSpec(**{k: tuple(v) if v is not None else None for k, v in value.items()})


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """RunConfig from plain JSON values; unknown keys are a ConfigError."""
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    converters = {
        "input_path": Path, "output_dir": Path, "ranks": _ranks, "reg": _reg, "grid": _grid,
        "synthetic": spec_from_dict,
    }
    values = {}
    try:
        for key, value in data.items():
            convert = converters.get(key)
            values[key] = convert(value) if convert and value is not None else value
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"invalid config value: {e}") from e
    return RunConfig(**values)


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags the user actually gave, mapped to RunConfig keys."""
    out: Dict[str, Any] = {}
    simple = (
        "input_path", "output_dir", "top_relations", "max_iters", "tol", "seed", "top_n", "label_k",
        "top_s", "min_edge_ratio", "threads",
    )
    for key in simple:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    for flag in ("casefold", "strict", "binary_factors", "grid_timings"):
        if getattr(args, flag, False):
            out[flag] = True
    preset = getattr(args, "preset", None)
    if preset:
        ranks, reg = preset_configs()[preset]
        out["ranks"], out["reg"] = list(ranks.as_tuple()), list(reg.as_tuple())
    if getattr(args, "ranks", None):
        out["ranks"] = args.ranks
    if getattr(args, "lambdas", None):
        out["reg"] = args.lambdas
    grid_axes = ("rank_values", "lambda_values", "r1_values", "r2_values", "r3_values")
    grid = {k: getattr(args, k) for k in grid_axes if getattr(args, k, None)}
    if grid:
        out["grid"] = grid
    if getattr(args, "noise_rate", None) is not None or getattr(args, "block_size", None) is not None:
        synthetic = {"planted": to_jsonable(default_planted())}
        if args.noise_rate is not None:
            synthetic["noise_rate"] = args.noise_rate
        if args.block_size is not None:
            synthetic["block_size"] = args.block_size
        out["synthetic"] = synthetic
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    data = load_config_file(getattr(args, "config", None))
    data.update(_overrides(args))
    if "synthetic" in data and "seed" in data and "seed" not in data["synthetic"]:
        data["synthetic"] = {**data["synthetic"], "seed": data["seed"]}
    return config_from_dict(data)


# --- Parser ---
def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--out", dest="output_dir", help="output directory holding the run's artifacts")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--threads", type=int, help="worker threads for grid search")
    noise = p.add_mutually_exclusive_group()
    noise.add_argument("--verbose", action="store_true", help="debug logging, including per-sweep objective")
    noise.add_argument("--quiet", action="store_true", help="warnings and errors only")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", dest="input_path", help="tab-separated tuple file")
    p.add_argument("--top-relations", type=int, help="keep the k relations with the largest mass (default 50)")
    p.add_argument("--casefold", action="store_true", help="case-fold every field")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed line")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iters", type=int, help="maximum sweeps (default 500)")
    p.add_argument("--tol", type=float, help="relative objective decrease that stops the solver (default 1e-6)")
    p.add_argument("--binary", dest="binary_factors", action="store_true", help="also write a binary factor sidecar")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="daz-schema-induce", description="Higher-order relation schema induction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build back-off tensors from a tuple file")
    _add_common(p)
    _add_input(p)

    p = sub.add_parser("factorize", help="coupled non-negative Tucker2 at fixed ranks")
    _add_common(p)
    _add_solver(p)
    p.add_argument("--ranks", type=int, nargs=3, metavar=("R1", "R2", "R3"))
    p.add_argument("--lambdas", type=float, nargs=3, metavar=("LA", "LB", "LC"))
    p.add_argument("--preset", choices=sorted(preset_configs()), help="use a published (ranks, lambdas) configuration")

    p = sub.add_parser("gridsearch", help="search ranks and lambdas by AvgFIT")
    _add_common(p)
    _add_solver(p)
    p.add_argument("--rank-values", type=int, nargs="+")
    p.add_argument("--lambda-values", type=float, nargs="+")
    p.add_argument("--r1-values", type=int, nargs="+")
    p.add_argument("--r2-values", type=int, nargs="+")
    p.add_argument("--r3-values", type=int, nargs="+")
    p.add_argument("--timings", dest="grid_timings", action="store_true", help="add per-cell wall time to grid.csv; reruns then differ")

    p = sub.add_parser("mine", help="induce higher-order schemata from stored factors")
    _add_common(p)
    p.add_argument("--top-n", type=int, help="top core cells per slice (default 5)")
    p.add_argument("--label-k", type=int, help="phrases per argument label (default 3)")
    p.add_argument("--top-s", type=int, help="schemata kept after ranking (default 50)")
    p.add_argument("--min-edge-ratio", type=float, help="drop cells below this fraction of the slice maximum")
    p.add_argument("--binary", dest="binary_factors", action="store_true", help="read the binary factor sidecar")

    p = sub.add_parser("hardclust", help="frequency baseline, one schema per relation")
    _add_common(p)
    _add_input(p)
    p.add_argument("--label-k", type=int, help="representatives per argument (default 3)")

    p = sub.add_parser("synth", help="write a synthetic corpus with planted schemata")
    _add_common(p)
    p.add_argument("--noise-rate", type=float, help="uniform noise tuples per planted tuple")
    p.add_argument("--block-size", type=int, help="noun phrases per block")

    p = sub.add_parser("report", help="print the artifacts of an output directory")
    _add_common(p)
    p.add_argument("--label-k", type=int, help="phrases shown per argument")
    return parser


def _log_level(args: argparse.Namespace) -> int:
    if getattr(args, "verbose", False):
        return logging.DEBUG
    if getattr(args, "quiet", False):
        return logging.WARNING
    return logging.INFO


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(_log_level(args))
    ws: Optional[Workspace] = None
    try:
        config = build_config(args)
        if config.output_dir is not None:
            ws = Workspace(Path(config.output_dir))
        if args.command == "report":
            result, text = cmd_report(config)
            sys.stdout.write(text)
        else:
            result = COMMANDS[args.command](config)
            print(dumps_line(result))
        return EXIT_OK
    except SchemaInductionError as e:
        print(f"[cli] error: {e}", file=sys.stderr)
        if ws is not None:
            ws.log_error(args.command, e)
        return e.exit_code

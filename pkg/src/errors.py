#!/usr/bin/env python3
"""
Exception types for the schema induction pipeline. Each carries the process exit code the CLI reports.
"""

from __future__ import annotations

from .models import EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC


class SchemaInductionError(Exception):
    exit_code = 1


class ConfigError(SchemaInductionError, ValueError):
    """Invalid option, bound violation, or conflicting settings."""
    exit_code = EXIT_CONFIG


class ShapeError(SchemaInductionError, ValueError):
    exit_code = EXIT_CONFIG


class DataError(SchemaInductionError):
    """Unreadable input or malformed records."""
    exit_code = EXIT_DATA


class EmptyCorpusError(DataError):
    def __init__(self, message: str = "empty corpus") -> None:
        super().__init__(message)


class NumericError(SchemaInductionError, ArithmeticError):
    exit_code = EXIT_NUMERIC


class ContractError(SchemaInductionError):
    """Internal invariant broken by a caller."""
    exit_code = EXIT_NUMERIC

#!/usr/bin/env python3
"""
Higher-order relation schema induction package
"""

# Only import the CLI when explicitly needed so library users skip argparse and pandas.

__all__ = ["main"]


def main(argv=None):
    """Lazy import and run the command line"""
    from .cli import main as _main
    return _main(argv)

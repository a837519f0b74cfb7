#!/usr/bin/env python3
"""
Schema induction command line - Main Entry Point
"""

from __future__ import annotations

import signal
import sys
from typing import Any

from src.cli import main


def _install_signal_handlers() -> None:
    def signal_handler(sig: int, frame: Any) -> None:
        print("\n[cli] interrupted, partial outputs are never renamed into place", file=sys.stderr)
        sys.exit(128 + sig)

    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)


if __name__ == "__main__":
    _install_signal_handlers()
    sys.exit(main())

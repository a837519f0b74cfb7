#!/usr/bin/env python3
"""
HardClust baseline: for each relation the NPs seen in each argument position form one cluster,
represented by its most frequent members. Exactly one ternary schema comes out per relation.
"""

from __future__ import annotations

from collections import Counter
from typing import Dict, Iterable, List, Tuple

from .errors import ConfigError
from .models import DEFAULT_LABEL_K, HardClustSchema, TupleRecord
from .utils import get_logger

logger = get_logger("hardclust")


def _top(counter: Counter, k: int) -> List[Tuple[str, int]]:
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def hardclust(records: Iterable[TupleRecord], k: int = DEFAULT_LABEL_K) -> List[HardClustSchema]:
    """Frequency-ranked representatives per argument position; records must already be split to 4-tuples."""
    if k < 1:
        raise ConfigError(f"representative count must be >= 1, got {k}")

    positions: Dict[str, Tuple[Counter, Counter, Counter]] = {}
    for r in records:
        subjects, objects, others = positions.setdefault(r.relation, (Counter(), Counter(), Counter()))
        subjects[r.subject] += r.count
        objects[r.object] += r.count
        for other in r.others:
            others[other] += r.count

    schemata = [
        HardClustSchema(relation=relation, subjects=_top(s, k), objects=_top(o, k), others=_top(c, k))
        for relation, (s, o, c) in sorted(positions.items())
    ]
    logger.info("%d schema(ta), one per relation", len(schemata))
    return schemata

#!/usr/bin/env python3
"""
Synthetic corpora with planted schemata.

Every argument position is split into disjoint blocks of noun phrases. A planted schema emits the
full product of its subject block, object block and other block(s), so each back-off tensor holds
an exact rank-one block per planted schema and the true factor columns are known. A second `other`
block turns the planted schema into a 4-ary one: the two blocks are paired position by position and
written as 5-tuples, which ingestion splits back into 4-tuples.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .models import (
    DEFAULT_SEED, SYNTH_PLANTED_FILE, SYNTH_TUPLES_FILE,
    InducedSchema, PlantedSchema, SyntheticSpec,
)
from .utils import atomic_write_text, get_logger, to_jsonable, write_json

logger = get_logger("synth")

MAX_OTHER_BLOCKS = 2


def default_planted() -> List[PlantedSchema]:
    """Seven schemata over five relations, two of them 4-ary."""
    return [
        PlantedSchema(relation=0, a_block=0, b_block=0, c_blocks=(0,), weight=5),
        PlantedSchema(relation=1, a_block=1, b_block=1, c_blocks=(1, 2), weight=4),
        PlantedSchema(relation=2, a_block=2, b_block=2, c_blocks=(3,), weight=3),
        PlantedSchema(relation=2, a_block=3, b_block=3, c_blocks=(4,), weight=3),
        PlantedSchema(relation=3, a_block=0, b_block=1, c_blocks=(2,), weight=2),
        PlantedSchema(relation=4, a_block=3, b_block=0, c_blocks=(0, 4), weight=2),
        PlantedSchema(relation=4, a_block=2, b_block=3, c_blocks=(1,), weight=2),
    ]


def default_spec(seed: int = DEFAULT_SEED, noise_rate: float = 0.0) -> SyntheticSpec:
    return SyntheticSpec(planted=default_planted(), noise_rate=noise_rate, seed=seed)


# --- Naming ---
def subject_phrase(block: int, i: int) -> str:
    return f"subj-{block}-{i}"


def object_phrase(block: int, i: int) -> str:
    return f"obj-{block}-{i}"


def other_phrase(block: int, i: int) -> str:
    return f"oth-{block}-{i}"


def relation_name(relation: int) -> str:
    return f"rel{relation}"


def phrase_block(phrase: str) -> int:
    """Block index encoded in a generated phrase, -1 for anything else."""
    parts = phrase.split("-")
    if len(parts) != 3 or not parts[1].isdigit():
        return -1
    return int(parts[1])


# --- Validation ---
def validate_spec(spec: SyntheticSpec) -> None:
    sizes = {
        "n_subject_blocks": spec.n_subject_blocks, "n_object_blocks": spec.n_object_blocks,
        "n_other_blocks": spec.n_other_blocks, "block_size": spec.block_size, "n_relations": spec.n_relations,
    }
    for name, value in sizes.items():
        if value < 1:
            raise ConfigError(f"{name} must be >= 1, got {value}")
    if not 0.0 <= spec.noise_rate <= 1.0:
        raise ConfigError(f"noise_rate must lie in [0, 1], got {spec.noise_rate}")
    if not spec.planted:
        raise ConfigError("at least one planted schema is required")
    seen = set()
    for p in spec.planted:
        if not 0 <= p.relation < spec.n_relations:
            raise ConfigError(f"planted relation {p.relation} out of range")
        if not 0 <= p.a_block < spec.n_subject_blocks or not 0 <= p.b_block < spec.n_object_blocks:
            raise ConfigError(f"planted blocks ({p.a_block}, {p.b_block}) out of range")
        if not 1 <= len(p.c_blocks) <= MAX_OTHER_BLOCKS:
            raise ConfigError(f"a planted schema takes 1 or 2 other blocks, got {len(p.c_blocks)}")
        if len(set(p.c_blocks)) != len(p.c_blocks) or any(not 0 <= c < spec.n_other_blocks for c in p.c_blocks):
            raise ConfigError(f"planted other blocks {p.c_blocks} invalid")
        if p.weight < 1 or int(p.weight) != p.weight:
            raise ConfigError(f"planted weight must be a positive whole count, got {p.weight}")
        key = (p.relation, p.a_block, p.b_block)
        if key in seen:
            raise ConfigError(f"relation {p.relation} plants two schemata on blocks ({p.a_block}, {p.b_block})")
        seen.add(key)


def true_ranks(spec: SyntheticSpec) -> Tuple[int, int, int]:
    """Number of distinct blocks used per argument position."""
    a = {p.a_block for p in spec.planted}
    b = {p.b_block for p in spec.planted}
    c = {c for p in spec.planted for c in p.c_blocks}
    return len(a), len(b), len(c)


# --- Generation ---
def _planted_lines(spec: SyntheticSpec, p: PlantedSchema) -> List[str]:
    count = int(p.weight)
    rel = relation_name(p.relation)
    lines = []
    for i in range(spec.block_size):
        for j in range(spec.block_size):
            s, o = subject_phrase(p.a_block, i), object_phrase(p.b_block, j)
            for k in range(spec.block_size):
                others = [other_phrase(c, k) for c in p.c_blocks]
                lines.append("\t".join([s, rel, o, *others, str(count)]))
    return lines


def generate_lines(spec: SyntheticSpec) -> List[str]:
    """TSV lines for all planted schemata followed by the uniform noise tuples."""
    validate_spec(spec)
    lines: List[str] = []
    for p in spec.planted:
        lines.extend(_planted_lines(spec, p))

    n_noise = int(round(spec.noise_rate * len(lines)))
    if n_noise:
        rng = np.random.default_rng(spec.seed)
        size = spec.block_size
        s = rng.integers(0, spec.n_subject_blocks * size, n_noise)
        o = rng.integers(0, spec.n_object_blocks * size, n_noise)
        c = rng.integers(0, spec.n_other_blocks * size, n_noise)
        r = rng.integers(0, spec.n_relations, n_noise)
        for si, oi, ci, ri in zip(s.tolist(), o.tolist(), c.tolist(), r.tolist()):
            lines.append("\t".join([
                subject_phrase(si // size, si % size), relation_name(ri),
                object_phrase(oi // size, oi % size), other_phrase(ci // size, ci % size),
            ]))
    logger.info("%d planted schema(ta), %d line(s) including %d noise tuple(s)", len(spec.planted), len(lines), n_noise)
    return lines


def write_corpus(spec: SyntheticSpec, output_dir: Path) -> Dict[str, Path]:
    lines = generate_lines(spec)
    tuples_path = output_dir / SYNTH_TUPLES_FILE
    planted_path = output_dir / SYNTH_PLANTED_FILE
    atomic_write_text(tuples_path, "".join(line + "\n" for line in lines))
    write_json(planted_path, to_jsonable(spec))
    return {"tuples": tuples_path, "planted": planted_path}


def spec_from_dict(data: Dict) -> SyntheticSpec:
    planted = [
        PlantedSchema(
            relation=int(p["relation"]), a_block=int(p["a_block"]), b_block=int(p["b_block"]),
            c_blocks=tuple(int(c) for c in p["c_blocks"]), weight=p.get("weight", 1.0),
        )
        for p in data.get("planted", [])
    ]
    fields = {k: v for k, v in data.items() if k != "planted"}
    try:
        return SyntheticSpec(planted=planted, **fields)
    except TypeError as e:
        raise ConfigError(f"invalid synthetic spec: {e}") from e


# --- Recovery check ---
def schema_blocks(s: InducedSchema) -> Tuple[str, int, int, Tuple[int, ...]]:
    """(relation name, subject block, object block, sorted other blocks) read from each column's top phrase."""
    by_ref = {(label.matrix, label.column): phrase_block(label.phrases[0][0]) for label in s.labels if label.phrases}
    a = by_ref.get(("A", s.a_col), -1)
    b = by_ref.get(("B", s.b_col), -1)
    cs = tuple(sorted(by_ref.get(("C", c), -1) for c in s.c_cols))
    return s.relation_name, a, b, cs


def recovered(schemata: Sequence[InducedSchema], spec: SyntheticSpec) -> List[bool]:
    """Per planted schema, whether some induced schema carries exactly its relation and blocks."""
    found = {schema_blocks(s) for s in schemata}
    return [
        (relation_name(p.relation), p.a_block, p.b_block, tuple(sorted(p.c_blocks))) in found
        for p in spec.planted
    ]

#!/usr/bin/env python3
"""
Binary-to-higher-order schema induction.

For each relation the top cells of the three core slices become edges of a tripartite graph whose
vertices are the columns of A, B and C. Triangles are 3-ary schemata; triangles sharing the same
(A, B) edge merge into one schema with several C arguments, so every induced schema is a clique
holding exactly one A-B edge.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import ConfigError, ContractError, NumericError
from .models import (
    DEFAULT_LABEL_K, DEFAULT_MIN_EDGE_RATIO, DEFAULT_TOP_N, DEFAULT_TOP_S,
    BinarySchema, ColumnLabel, FactorSet, InducedSchema, Vocabulary,
)
from .utils import get_logger

logger = get_logger("miner")

Triangle = Tuple[int, int, int]

# Comment: core side -> (row part, column part)
SIDE_PARTS = {1: ("B", "C"), 2: ("A", "C"), 3: ("A", "B")}


@dataclass
class TripartiteGraph:
    """Column vertices ("A", i), ("B", j), ("C", k) with weighted edges between distinct parts."""
    relation: int
    graph: nx.Graph

    def edges_between(self, left: str, right: str) -> List[Tuple[int, int, float]]:
        out = []
        for u, v, w in self.graph.edges(data="weight"):
            if (u[0], v[0]) == (right, left):
                u, v = v, u
            if (u[0], v[0]) == (left, right):
                out.append((u[1], v[1], w))
        return sorted(out)

    def weight(self, u: Tuple[str, int], v: Tuple[str, int]) -> float:
        data = self.graph.get_edge_data(u, v)
        if data is None:
            raise ContractError(f"relation {self.relation}: no edge between {u} and {v}")
        return data["weight"]

    def neighbours(self, node: Tuple[str, int], part: str) -> set:
        if node not in self.graph:
            return set()
        return {v[1] for v in self.graph.neighbors(node) if v[0] == part}


def top_n_cells(core_slice: np.ndarray, n: int, relation: int = 0, side: int = 3) -> List[BinarySchema]:
    """The n largest positive cells; ties by (row, col)."""
    if n < 1:
        raise ConfigError(f"top-n must be >= 1, got {n}")
    rows, cols = np.nonzero(core_slice > 0)
    if rows.size == 0:
        return []
    vals = core_slice[rows, cols]
    order = np.lexsort((cols, rows, -vals))[:n]
    return [
        BinarySchema(relation=relation, side=side, left_col=int(rows[i]), right_col=int(cols[i]), weight=float(vals[i]))
        for i in order
    ]


def build_graph(f: FactorSet, relation: int, n: int = DEFAULT_TOP_N, min_edge_ratio: float = 0.0) -> TripartiteGraph:
    """Edges A-B from G3, A-C from G2, B-C from G1 for one relation.

    ``min_edge_ratio`` drops selected cells weaker than that fraction of their slice maximum.
    """
    if not 0 <= relation < f.n_relations:
        raise ConfigError(f"relation {relation} out of range 0..{f.n_relations - 1}")
    g = nx.Graph()
    g.add_nodes_from((("A", i) for i in range(f.A.shape[1])), part="A")
    g.add_nodes_from((("B", j) for j in range(f.B.shape[1])), part="B")
    g.add_nodes_from((("C", k) for k in range(f.C.shape[1])), part="C")
    for side, core in ((3, f.G3), (2, f.G2), (1, f.G1)):
        core_slice = core[:, :, relation]
        cutoff = min_edge_ratio * float(core_slice.max()) if core_slice.size else 0.0
        left, right = SIDE_PARTS[side]
        for cell in top_n_cells(core_slice, n, relation, side):
            if cell.weight < cutoff:
                continue
            g.add_edge((left, cell.left_col), (right, cell.right_col), weight=cell.weight, side=side)
    return TripartiteGraph(relation, g)


def mine_triangles(g: TripartiteGraph) -> List[Triangle]:
    triangles = []
    for a, b, _ in g.edges_between("A", "B"):
        shared = g.neighbours(("A", a), "C") & g.neighbours(("B", b), "C")
        triangles.extend((a, b, c) for c in shared)
    return sorted(triangles)


def merge_cliques(triangles: Iterable[Triangle], relation: int = 0, relation_name: str = "") -> List[InducedSchema]:
    """Group triangles by their (A, B) edge; each group becomes one schema with all its C columns."""
    groups: "OrderedDict[Tuple[int, int], set]" = OrderedDict()
    for a, b, c in sorted(triangles):
        groups.setdefault((a, b), set()).add(c)
    return [
        InducedSchema(relation=relation, relation_name=relation_name, a_col=a, b_col=b, c_cols=tuple(sorted(cs)))
        for (a, b), cs in groups.items()
    ]


def split_schema(s: InducedSchema) -> List[Triangle]:
    return [(s.a_col, s.b_col, c) for c in s.c_cols]


def score_schema(s: InducedSchema, g: TripartiteGraph) -> float:
    """Sum of constituent edge weights, the shared A-B edge counted once."""
    weights = [g.weight(("A", s.a_col), ("B", s.b_col))]
    for c in s.c_cols:
        weights.append(g.weight(("A", s.a_col), ("C", c)))
        weights.append(g.weight(("B", s.b_col), ("C", c)))
    return math.fsum(weights)


def label_column(matrix: np.ndarray, phrases: Sequence[str], column: int, k: int) -> List[Tuple[str, float]]:
    """Top-k rows of one factor column; ties by row index."""
    if k < 1:
        raise ConfigError(f"label count must be >= 1, got {k}")
    values = matrix[:, column]
    order = np.lexsort((np.arange(values.size), -values))[:k]
    return [(phrases[i], float(values[i])) for i in order]


def label_columns(f: FactorSet, vocab: Vocabulary, refs: Iterable[Tuple[str, int]], k: int = DEFAULT_LABEL_K) -> List[ColumnLabel]:
    sources: Dict[str, Tuple[np.ndarray, Sequence[str]]] = {
        "A": (f.A, vocab.subjects), "B": (f.B, vocab.objects), "C": (f.C, vocab.others),
    }
    labels = []
    for matrix_name, column in refs:
        matrix, phrases = sources[matrix_name]
        labels.append(ColumnLabel(matrix_name, column, label_column(matrix, phrases, column, k)))
    return labels


def induce_schemata(
    f: FactorSet,
    vocab: Vocabulary,
    n: int = DEFAULT_TOP_N,
    k: int = DEFAULT_LABEL_K,
    top_s: int = DEFAULT_TOP_S,
    min_edge_ratio: float = DEFAULT_MIN_EDGE_RATIO,
) -> List[InducedSchema]:
    """Graph, triangles, merged cliques and scores per relation, then one global ranking."""
    if top_s < 1:
        raise ConfigError(f"top_s must be >= 1, got {top_s}")
    if not 0.0 <= min_edge_ratio <= 1.0:
        raise ConfigError(f"min_edge_ratio must lie in [0, 1], got {min_edge_ratio}")
    if not all(np.all(np.isfinite(m)) for m in f.arrays()):
        raise NumericError("factors contain non-finite values")

    schemata: List[InducedSchema] = []
    for relation in range(f.n_relations):
        g = build_graph(f, relation, n, min_edge_ratio)
        name = vocab.relations[relation] if relation < len(vocab.relations) else str(relation)
        for s in merge_cliques(mine_triangles(g), relation, name):
            s.score = score_schema(s, g)
            schemata.append(s)

    schemata.sort(key=lambda s: (-s.score, s.relation, s.a_col, s.b_col))
    ranked = schemata[:top_s]
    for s in ranked:
        refs = [("A", s.a_col), ("B", s.b_col)] + [("C", c) for c in s.c_cols]
        s.labels = label_columns(f, vocab, refs, k)
    logger.info("induced %d schema(ta) over %d relation(s); kept top %d", len(schemata), f.n_relations, len(ranked))
    return ranked


def render_table(schemata: Sequence[InducedSchema], top_labels: int = DEFAULT_LABEL_K) -> str:
    """One block per schema: rank, signature and score, then the top phrases of every argument column."""
    lines: List[str] = []
    for rank, s in enumerate(schemata, 1):
        lines.append(f"#{rank}  {s.signature()}  score={s.score!r}")
        for label in s.labels:
            phrases = ", ".join(p for p, _ in label.phrases[:top_labels])
            lines.append(f"    {label.matrix}{label.column}: {phrases}")
    return "\n".join(lines) + ("\n" if lines else "")

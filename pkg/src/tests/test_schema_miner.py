#!/usr/bin/env python3
"""
Unit tests for tripartite graph construction, clique mining and schema ranking.
"""

import sys
import unittest
from pathlib import Path

import networkx as nx
import numpy as np

# Add the project root to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from src.errors import ConfigError, ContractError, NumericError
from src.models import FactorSet, InducedSchema, Vocabulary
from src.schema_miner import (
    TripartiteGraph, build_graph, induce_schemata, label_column, merge_cliques, mine_triangles,
    render_table, score_schema, split_schema, top_n_cells,
)


def graph_from_edges(ab, ac, bc, relation=0):
    g = nx.Graph()
    for a, b, w in ab:
        g.add_edge(("A", a), ("B", b), weight=w)
    for a, c, w in ac:
        g.add_edge(("A", a), ("C", c), weight=w)
    for b, c, w in bc:
        g.add_edge(("B", b), ("C", c), weight=w)
    return TripartiteGraph(relation, g)


def oracle_schemata(ab, ac, bc):
    """Every (a, b) edge with the full set of C vertices adjacent to both."""
    ab_set = {(a, b) for a, b, _ in ab}
    ac_set = {(a, c) for a, c, _ in ac}
    bc_set = {(b, c) for b, c, _ in bc}
    c_all = {c for _, c, _ in ac} | {c for _, c, _ in bc}
    out = []
    for a, b in sorted(ab_set):
        cs = tuple(sorted(c for c in c_all if (a, c) in ac_set and (b, c) in bc_set))
        if cs:
            out.append((a, b, cs))
    return out


def block_factor_set(m=2):
    """Identity-like factors with hand-placed core cells."""
    A, B, C = np.eye(3) + 1e-12, np.eye(3) + 1e-12, np.eye(4) + 1e-12
    G1, G2, G3 = np.zeros((3, 4, m)), np.zeros((3, 4, m)), np.zeros((3, 3, m))
    # relation 0: schema (A0, B1, {C2, C3}); relation 1: schema (A2, B2, {C0})
    G3[0, 1, 0], G2[0, 2, 0], G2[0, 3, 0], G1[1, 2, 0], G1[1, 3, 0] = 5.0, 4.0, 3.0, 4.0, 3.0
    G3[2, 2, 1], G2[2, 0, 1], G1[2, 0, 1] = 2.0, 1.0, 1.0
    return FactorSet(A, B, C, G1, G2, G3)


def block_vocab():
    return Vocabulary(
        subjects=["federer", "nadal", "serena"],
        objects=["wimbledon", "french open", "us open"],
        others=["london", "paris", "2009", "2010"],
        relations=["win", "lose"],
    )


class TestTopCells(unittest.TestCase):

    def test_01_ordering_and_ties(self):
        core = np.array([[1.0, 3.0], [3.0, 0.0]])
        cells = top_n_cells(core, 2)
        self.assertEqual([(c.left_col, c.right_col) for c in cells], [(0, 1), (1, 0)])

    def test_02_only_positive_cells(self):
        core = np.array([[0.0, 2.0], [0.0, 0.0]])
        self.assertEqual(len(top_n_cells(core, 5)), 1)

    def test_03_invalid_n(self):
        with self.assertRaises(ConfigError):
            top_n_cells(np.ones((2, 2)), 0)


class TestMining(unittest.TestCase):

    def test_01_merge_example(self):
        merged = merge_cliques([(2, 4, 10), (2, 4, 8)])
        self.assertEqual(len(merged), 1)
        self.assertEqual((merged[0].a_col, merged[0].b_col, merged[0].c_cols), (2, 4, (8, 10)))
        self.assertEqual(merged[0].arity, 4)

    def test_02_split_inverts_merge(self):
        triangles = [(0, 1, 3), (0, 1, 2), (1, 1, 0)]
        merged = merge_cliques(triangles)
        self.assertEqual(sorted(t for s in merged for t in split_schema(s)), sorted(triangles))
        self.assertEqual(len(merge_cliques(t for s in merged for t in split_schema(s))), len(merged))

    def test_03_no_triangle_without_ab_edge(self):
        g = graph_from_edges([], [(0, 0, 1.0)], [(0, 0, 1.0)])
        self.assertEqual(mine_triangles(g), [])

    def test_04_random_graphs_match_oracle(self):
        rng = np.random.default_rng(61)
        for _ in range(200):
            sizes = rng.integers(1, 13, size=3)
            p = rng.uniform(0.1, 0.6)

            def edges(n_left, n_right):
                return [(i, j, float(rng.random()) + 0.01) for i in range(n_left) for j in range(n_right) if rng.random() < p]

            ab, ac, bc = edges(sizes[0], sizes[1]), edges(sizes[0], sizes[2]), edges(sizes[1], sizes[2])
            g = graph_from_edges(ab, ac, bc)
            got = [(s.a_col, s.b_col, s.c_cols) for s in merge_cliques(mine_triangles(g))]
            self.assertEqual(got, oracle_schemata(ab, ac, bc))

    def test_05_score_counts_ab_edge_once(self):
        g = graph_from_edges([(0, 0, 5.0)], [(0, 1, 2.0), (0, 2, 1.0)], [(0, 1, 3.0), (0, 2, 4.0)])
        s = merge_cliques(mine_triangles(g))[0]
        self.assertEqual(score_schema(s, g), 5.0 + 2.0 + 3.0 + 1.0 + 4.0)

    def test_06_score_missing_edge(self):
        g = graph_from_edges([(0, 0, 1.0)], [], [])
        with self.assertRaises(ContractError):
            score_schema(InducedSchema(0, "r", 0, 0, (1,)), g)


class TestLabels(unittest.TestCase):

    def test_01_top_k_with_row_ties(self):
        matrix = np.array([[0.5], [0.9], [0.5], [0.1]])
        labels = label_column(matrix, ["a", "b", "c", "d"], 0, 3)
        self.assertEqual([p for p, _ in labels], ["b", "a", "c"])

    def test_02_k_larger_than_vocabulary(self):
        labels = label_column(np.array([[1.0], [2.0]]), ["a", "b"], 0, 5)
        self.assertEqual([p for p, _ in labels], ["b", "a"])


class TestInduce(unittest.TestCase):

    def test_01_hand_built_factors(self):
        f = block_factor_set()
        schemata = induce_schemata(f, block_vocab(), n=5, k=1, min_edge_ratio=0.0)
        self.assertEqual(len(schemata), 2)
        first, second = schemata
        self.assertEqual((first.relation_name, first.a_col, first.b_col, first.c_cols), ("win", 0, 1, (2, 3)))
        self.assertEqual(first.score, 5.0 + 4.0 + 4.0 + 3.0 + 3.0)
        self.assertEqual(first.signature(), "win<A0, B1, C2, C3>")
        self.assertEqual([label.phrases[0][0] for label in first.labels], ["federer", "french open", "2009", "2010"])
        self.assertEqual((second.relation_name, second.c_cols), ("lose", (0,)))

    def test_02_top_s_truncates(self):
        schemata = induce_schemata(block_factor_set(), block_vocab(), top_s=1, min_edge_ratio=0.0)
        self.assertEqual(len(schemata), 1)
        self.assertEqual(schemata[0].relation_name, "win")

    def test_03_min_edge_ratio_drops_weak_cells(self):
        f = block_factor_set()
        f.G1[0, 0, 0] = 0.01
        f.G2[0, 0, 0] = 0.01
        f.G3[0, 0, 0] = 0.01
        loose = induce_schemata(f, block_vocab(), min_edge_ratio=0.0)
        strict = induce_schemata(f, block_vocab(), min_edge_ratio=0.05)
        self.assertEqual(len(loose), 3)
        self.assertEqual(len(strict), 2)

    def test_04_no_positive_cells(self):
        f = block_factor_set()
        for g in (f.G1, f.G2, f.G3):
            g[...] = 0.0
        self.assertEqual(induce_schemata(f, block_vocab()), [])

    def test_05_non_finite_factors(self):
        f = block_factor_set()
        f.A[0, 0] = np.nan
        with self.assertRaises(NumericError):
            induce_schemata(f, block_vocab())

    def test_06_build_graph_relation_range(self):
        with self.assertRaises(ConfigError):
            build_graph(block_factor_set(), 5, 5)

    def test_07_render_table(self):
        text = render_table(induce_schemata(block_factor_set(), block_vocab(), k=2, min_edge_ratio=0.0))
        self.assertIn("#1  win<A0, B1, C2, C3>", text)
        self.assertIn("    A0: federer, ", text)

    def test_08_default_keeps_every_top_n_cell(self):
        f = block_factor_set()
        f.G1[0, 0, 0] = f.G2[0, 0, 0] = f.G3[0, 0, 0] = 0.01
        default = induce_schemata(f, block_vocab())
        plain = induce_schemata(f, block_vocab(), min_edge_ratio=0.0)
        self.assertEqual([s.signature() for s in default], [s.signature() for s in plain])
        self.assertEqual(len(default), 3)


if __name__ == "__main__":
    unittest.main()

#!/usr/bin/env python3
"""
Unit tests for the HardClust frequency baseline.
"""

import sys
import unittest
from pathlib import Path

# Add the project root to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from src.baseline_hardclust import hardclust
from src.corpus import parse_tuples, split_five_tuples
from src.errors import ConfigError
from src.models import TupleRecord

# 20 tuples over three relations; counts chosen so every ranking below is a hand count.
FIXTURE = """\
federer\twin\twimbledon\tlondon
federer\twin\twimbledon\tlondon
federer\twin\tfrench open\tparis
nadal\twin\tfrench open\tparis
nadal\twin\tfrench open\tparis
nadal\twin\tfrench open\tparis
serena\twin\tus open\tnew york
djokovic\twin\taustralian open\tmelbourne
federer\tlose\tfinal\tlondon
nadal\tlose\tfinal\tlondon
murray\tlose\tsemifinal\tlondon
murray\tlose\tfinal\tparis
murray\tlose\tfinal\tparis
police\tarrest\tsuspect\tmonday
police\tarrest\tsuspect\ttuesday
police\tarrest\tgunman\tmonday
officers\tarrest\tsuspect\tmonday
officers\tarrest\tman\tfriday
police\tarrest\tman\tfriday
agents\tarrest\tsuspect\tsunday
"""


class TestHardClust(unittest.TestCase):

    def setUp(self):
        self.records = split_five_tuples(parse_tuples(FIXTURE.splitlines()))
        self.schemata = {s.relation: s for s in hardclust(self.records, k=3)}

    def test_01_one_schema_per_relation(self):
        self.assertEqual(len(self.records), 20)
        self.assertEqual(sorted(self.schemata), ["arrest", "lose", "win"])

    def test_02_win_representatives(self):
        s = self.schemata["win"]
        self.assertEqual(s.subjects, [("federer", 3), ("nadal", 3), ("djokovic", 1)])
        self.assertEqual(s.objects, [("french open", 4), ("wimbledon", 2), ("australian open", 1)])
        self.assertEqual(s.others, [("paris", 4), ("london", 2), ("melbourne", 1)])

    def test_03_lose_representatives(self):
        s = self.schemata["lose"]
        self.assertEqual(s.subjects, [("murray", 3), ("federer", 1), ("nadal", 1)])
        self.assertEqual(s.objects, [("final", 4), ("semifinal", 1)])
        self.assertEqual(s.others, [("london", 3), ("paris", 2)])

    def test_04_arrest_representatives(self):
        s = self.schemata["arrest"]
        self.assertEqual(s.subjects, [("police", 4), ("officers", 2), ("agents", 1)])
        self.assertEqual(s.objects, [("suspect", 4), ("man", 2), ("gunman", 1)])
        self.assertEqual(s.others, [("monday", 3), ("friday", 2), ("sunday", 1)])

    def test_05_hand_count_example(self):
        records = [TupleRecord("s1", "r", "o1", ("c1",), 3), TupleRecord("s2", "r", "o1", ("c2",), 1)]
        (s,) = hardclust(records, k=3)
        self.assertEqual([p for p, _ in s.subjects], ["s1", "s2"])
        self.assertEqual([p for p, _ in s.objects], ["o1"])
        self.assertEqual([p for p, _ in s.others], ["c1", "c2"])

    def test_06_single_tuple(self):
        (s,) = hardclust([TupleRecord("a", "r", "b", ("c",))])
        self.assertEqual((s.subjects, s.objects, s.others), ([("a", 1)], [("b", 1)], [("c", 1)]))

    def test_07_empty_and_invalid(self):
        self.assertEqual(hardclust([]), [])
        with self.assertRaises(ConfigError):
            hardclust(self.records, k=0)


if __name__ == "__main__":
    unittest.main()

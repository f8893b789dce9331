import math
import random
import sys
import unittest
from pathlib import Path

# Add project root to sys.path
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from generators.ltl_printer import render_target
from models.data_models import TargetRepr
from models.errors import EmptyOutputSet
from models.output_trie import EOS, build_trie
from services.dataset_service import load_config_bundle
from services.decoder import (
    OracleScorer, SCORE_FLOOR, Translator, UniformScorer, constrained_decode, constrained_search, decode_nbest,
    safe_scores, tokenize_text, unconstrained_decode,
)
from services.synthesis_service import enumerate_formulas

DATA = project_root / "data"


def valid_labels(name, representation=TargetRepr.RAW_PREFIX):
    base = DATA / name
    b = load_config_bundle(base / "apset.jsonl", base / "lexicon.json", base / "structures.jsonl")
    return [render_target(f, representation, b.lexicon) for f in enumerate_formulas(b.structures, b.aps)]


class FuzzedScorer:
    """Seeded garbage: arbitrary magnitudes, NaN, infinities, None, short lists and stray keys."""

    def __init__(self, seed):
        self.rng = random.Random(seed)

    def _value(self):
        roll = self.rng.random()
        if roll < 0.05:
            return float("nan")
        if roll < 0.1:
            return float("inf")
        if roll < 0.15:
            return float("-inf")
        if roll < 0.2:
            return None
        if roll < 0.25:
            return "high"
        return self.rng.uniform(-1e6, 1e6)

    def score_next(self, input_tokens, output_prefix, candidates):
        mode = self.rng.random()
        if mode < 0.3:
            out = {c: self._value() for c in candidates if self.rng.random() < 0.8}
            out["not-a-candidate"] = 1e9
            return out
        values = [self._value() for _ in candidates]
        if mode < 0.4:
            return values[: self.rng.randrange(len(values) + 1)]
        if mode < 0.45:
            return None
        return values


class TestOutputTrie(unittest.TestCase):

    def test_membership_and_enumeration(self):
        trie = build_trie(["F B", "F R", "G B", "F B", "F & B F R"])
        self.assertEqual(len(trie), 4)
        self.assertIn("F B", trie)
        self.assertIn("F  R", trie)
        self.assertNotIn("F", trie)
        self.assertNotIn("", trie)
        self.assertNotIn("F B R", trie)
        self.assertEqual(list(trie.accepted()), ["F & B F R", "F B", "F R", "G B"])
        self.assertEqual(trie.vocabulary(), ["&", "B", "F", "G", "R"])

    def test_candidates_put_end_first(self):
        trie = build_trie(["F B", "F B F R"])
        self.assertEqual(trie.walk(["F", "B"]).candidates(), [EOS, "F"])
        self.assertEqual(trie.root.candidates(), ["F"])

    def test_empty_set(self):
        with self.assertRaises(EmptyOutputSet):
            build_trie([])
        with self.assertRaises(ValueError):
            build_trie(["F B", "  "])
        with self.assertRaises(ValueError):
            build_trie([f"F {EOS}"])

    def test_drone_canonical_trie_size(self):
        print("\n--- TestOutputTrie: test_drone_canonical_trie_size ---")
        labels = valid_labels("drone", TargetRepr.CANONICAL)
        trie = build_trie(labels)
        self.assertEqual(len(trie), 343)
        self.assertEqual(len(list(trie.accepted())), 343)
        self.assertEqual(set(trie.accepted()), set(labels))


class TestScoreSanitation(unittest.TestCase):

    def test_sequences_and_mappings(self):
        class Fixed:
            def __init__(self, raw):
                self.raw = raw

            def score_next(self, *_):
                return self.raw

        cands = ["a", "b", "c"]
        self.assertEqual(safe_scores(Fixed([1, float("nan"), "2"]), [], [], cands), [1.0, SCORE_FLOOR, 2.0])
        self.assertEqual(safe_scores(Fixed([0.5]), [], [], cands), [0.5, SCORE_FLOOR, SCORE_FLOOR])
        self.assertEqual(safe_scores(Fixed({"c": -1, "z": 9}), [], [], cands), [SCORE_FLOOR, SCORE_FLOOR, -1.0])
        self.assertEqual(safe_scores(Fixed(None), [], [], cands), [SCORE_FLOOR] * 3)
        self.assertTrue(all(math.isfinite(v) for v in safe_scores(Fixed([float("-inf")] * 3), [], [], cands)))

    def test_tokenize_text(self):
        self.assertEqual(tokenize_text("Head to the Yellow room, then landmark_1."),
                         ["head", "to", "the", "yellow", "room", "then", "landmark_1"])


class TestConstrainedDecoding(unittest.TestCase):

    def test_uniform_scorer_takes_first_legal_path(self):
        trie = build_trie(["F B", "F R", "G B"])
        self.assertEqual(constrained_decode("anything", UniformScorer(), trie), "F B")

    def test_oracle_recovers_every_target(self):
        print("\n--- TestConstrainedDecoding: test_oracle_recovers_every_target ---")
        for name, representation in [("pick", TargetRepr.RAW_PREFIX), ("cleanup", TargetRepr.RAW_PREFIX),
                                     ("drone", TargetRepr.RAW_INFIX), ("drone", TargetRepr.CANONICAL)]:
            labels = valid_labels(name, representation)
            trie = build_trie(labels)
            recovered = sum(constrained_decode("x", OracleScorer.for_target(t), trie) == t for t in labels)
            print(f"{name}/{representation.value}: {recovered}/{len(labels)}")
            self.assertEqual(recovered, len(labels))

    def test_oracle_by_input_text(self):
        trie = build_trie(["F B", "F R", "G B"])
        oracle = OracleScorer({"Go to the RED room": "F R", "always blue": "G B"})
        self.assertEqual(constrained_decode("go to the red room", oracle, trie), "F R")
        self.assertEqual(constrained_decode("Always blue!", oracle, trie), "G B")

    def test_oracle_outside_the_set_still_lands_inside(self):
        trie = build_trie(["F B", "F R", "G B"])
        out = constrained_decode("x", OracleScorer.for_target("F Y"), trie)
        self.assertIn(out, trie)

    def test_fuzzed_scorers_stay_in_the_set(self):
        print("\n--- TestConstrainedDecoding: test_fuzzed_scorers_stay_in_the_set ---")
        tries = {name: build_trie(valid_labels(name)) for name in ("pick", "cleanup", "drone")}
        outside = 0
        for seed in range(1000):
            scorer = FuzzedScorer(seed)
            for name, trie in tries.items():
                beam = 1 if seed % 4 else 3
                if constrained_decode(f"command {seed}", scorer, trie, beam) not in trie:
                    outside += 1
        print(f"3000 decodes, {outside} outside the valid set")
        self.assertEqual(outside, 0)

    def test_wider_beam_never_scores_lower(self):
        trie = build_trie(valid_labels("cleanup"))
        for seed in range(200):
            greedy = constrained_search("cmd", _Seeded(seed), trie, beam=1)
            wide = constrained_search("cmd", _Seeded(seed), trie, beam=4)
            self.assertGreaterEqual(wide[1], greedy[1])
            self.assertIn(wide[0], trie)

    def test_beam_finds_better_than_greedy(self):
        # greedy commits to F (score -1 vs -2) and then pays -10; the G branch totals -2
        class Trap:
            def score_next(self, _inp, prefix, candidates):
                table = {(): {"F": -1.0, "G": -2.0}, ("F",): {"B": -10.0}, ("G",): {"B": 0.0}}
                row = table.get(tuple(prefix), {})
                return [row.get(c, 0.0) for c in candidates]

        trie = build_trie(["F B", "G B"])
        self.assertEqual(constrained_search("x", Trap(), trie, beam=1), ("F B", -11.0))
        self.assertEqual(constrained_search("x", Trap(), trie, beam=2), ("G B", -2.0))

    def test_invalid_beam(self):
        with self.assertRaises(ValueError):
            constrained_search("x", UniformScorer(), build_trie(["F B"]), beam=0)

    def test_nbest(self):
        trie = build_trie(valid_labels("pick"))
        best = decode_nbest("scan and pick any red cubes", OracleScorer.for_target("G & U S ! R F R"), trie, beam=5, k=3)
        self.assertEqual(len(best), 3)
        self.assertEqual(best[0][0], "G & U S ! R F R")
        self.assertEqual(len({text for text, _ in best}), 3)
        self.assertEqual([s for _, s in best], sorted((s for _, s in best), reverse=True))
        for text, _ in best:
            self.assertIn(text, trie)
        with self.assertRaises(ValueError):
            decode_nbest("x", UniformScorer(), trie, k=0)


class _Seeded:
    """Deterministic pseudo-random finite scores keyed on the prefix."""

    def __init__(self, seed):
        self.seed = seed

    def score_next(self, _inp, prefix, candidates):
        rng = random.Random(f"{self.seed}|{' '.join(prefix)}")
        return [rng.uniform(-5, 0) for _ in candidates]


class TestUnconstrainedDecoding(unittest.TestCase):

    def test_follows_oracle_outside_the_set(self):
        out = unconstrained_decode("x", OracleScorer.for_target("F Y"), ["F", "B", "Y"])
        self.assertEqual(out, "F Y")

    def test_max_len_caps_output(self):
        class AvoidEnd:
            def score_next(self, _inp, _prefix, candidates):
                return [-100.0 if c == EOS else 0.0 for c in candidates]

        out = unconstrained_decode("x", AvoidEnd(), ["B", "F"], max_len=5)
        self.assertEqual(out.split(), ["B"] * 5)
        with self.assertRaises(ValueError):
            unconstrained_decode("x", AvoidEnd(), ["B"], max_len=0)

    def test_translator_modes(self):
        trie = build_trie(["F B", "G B"])
        oracle = OracleScorer.for_target("F Y")
        constrained = Translator(oracle, trie)
        free = Translator(oracle, trie, vocab=["B", "F", "G", "Y"], constrained=False)
        self.assertIn(constrained.translate("x"), trie)
        self.assertEqual(free.translate("x"), "F Y")
        self.assertEqual(len(constrained.translate_nbest("x", 2)), 2)
        self.assertEqual(free.translate_nbest("x", 2), [("F Y", 0.0)])
        with self.assertRaises(ValueError):
            Translator(oracle, None)
        self.assertEqual(Translator(UniformScorer(), trie, constrained=False).vocab, ["B", "F", "G"])


if __name__ == '__main__':
    unittest.main()

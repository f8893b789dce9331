import json
import math
import sys
import tempfile
import unittest
from pathlib import Path

# Add project root to sys.path
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from models.data_models import Example, Provenance, TargetRepr
from models.errors import ConfigError, EmptyCorpus
from models.output_trie import BOS, EOS, build_trie
from services.dataset_service import load_config_bundle
from services.decoder import Translator
from services.lexical_model import LexicalModel, train_lexical, training_pairs
from services.paraphrase_service import FallbackParaphraser
from services.synthesis_service import build_corpus

DATA = project_root / "data"


def example(text, target, label=None, repr_=TargetRepr.RAW_PREFIX):
    return Example(text=text, target=target, label=label or target, target_repr=repr_,
                   provenance=Provenance.BACKTRANSLATED, source_id="f00000")


def seed_corpus(name, mode="template"):
    base = DATA / name
    b = load_config_bundle(base / "apset.jsonl", base / "lexicon.json", base / "structures.jsonl")
    return b, build_corpus(b.structures, b.aps, b.lexicon, b.templates, None, n_paraphrases=0, mode=mode, seed=0)


def augmented_corpus(name, mode="template", n_paraphrases=10):
    base = DATA / name
    b = load_config_bundle(base / "apset.jsonl", base / "lexicon.json", base / "structures.jsonl")
    return b, build_corpus(b.structures, b.aps, b.lexicon, b.templates, FallbackParaphraser(seed=0),
                           n_paraphrases=n_paraphrases, mode=mode, seed=0)


class TestLexicalCounts(unittest.TestCase):

    def test_single_pair_counts(self):
        print("\n--- TestLexicalCounts: test_single_pair_counts ---")
        model = LexicalModel()
        model.observe("go to b", "F B")
        model.finalize()
        self.assertEqual(model.word_token["go"]["F"], 1)
        self.assertEqual(model.word_token["b"][EOS], 1)
        self.assertEqual(model.token_totals["F"], 3)
        self.assertEqual(model.bigram[BOS]["F"], 1)
        self.assertEqual(model.bigram["B"][EOS], 1)
        self.assertEqual(model.slot_prior["F\t0"], 1)
        self.assertEqual(model.slot_prior[f"{EOS}\t2"], 1)
        # three words spread over four buckets: 0, 2, 3
        self.assertEqual(model.feature_slot["go\t0"]["F\t0"], 1)
        self.assertEqual(model.feature_slot["to\t2"]["B\t1"], 1)
        self.assertEqual(model.feature_slot["b\t3"]["B\t1"], 1)
        self.assertEqual(model.vocabulary(), ["B", "F"])
        self.assertEqual(model.input_vocab, {"go", "to", "b"})

    def test_bad_settings(self):
        with self.assertRaises(ConfigError):
            LexicalModel(alpha=0)
        with self.assertRaises(ConfigError):
            LexicalModel(mixture_weight=1.5)
        with self.assertRaises(ConfigError):
            LexicalModel(position_buckets=0)

    def test_empty_corpus(self):
        with self.assertRaises(EmptyCorpus):
            train_lexical([])


class TestLexicalScoring(unittest.TestCase):

    def setUp(self):
        self.model = train_lexical([
            example("go to the blue room", "F B"),
            example("go to the red room", "F R"),
            example("never go to the red room", "G ! R"),
        ])

    def test_distribution_sums_to_one(self):
        for prefix, cands in [([], ["F", "G"]), (["F"], ["B", "R"]), (["G"], ["!"]), (["F", "B"], [EOS, "&", "B"])]:
            scores = self.model.score_next(["go", "to", "the", "red", "room"], prefix, cands)
            self.assertEqual(len(scores), len(cands))
            self.assertAlmostEqual(sum(math.exp(s) for s in scores), 1.0, places=9)
        self.assertEqual(self.model.score_next(["x"], [], []), [])

    def test_ranking_is_independent_of_candidate_subset(self):
        words = ["go", "to", "the", "red", "room"]
        full = dict(zip(["B", "R", "G", "F"], self.model.score_next(words, ["F"], ["B", "R", "G", "F"])))
        pair = dict(zip(["B", "R"], self.model.score_next(words, ["F"], ["B", "R"])))
        self.assertEqual(full["R"] > full["B"], pair["R"] > pair["B"])
        self.assertAlmostEqual(full["R"] - full["B"], pair["R"] - pair["B"], places=9)

    def test_lexical_choice(self):
        trie = build_trie(["F B", "F R", "G ! R"])
        translator = Translator(self.model, trie)
        self.assertEqual(translator.translate("go to the red room"), "F R")
        self.assertEqual(translator.translate("Go to the BLUE room."), "F B")
        self.assertEqual(translator.translate("never go to the red room"), "G ! R")

    def test_unknown_words_are_ignored(self):
        a = self.model.score_next(["go", "to", "the", "red", "room"], ["F"], ["B", "R"])
        b = self.model.score_next(["go", "to", "the", "zzz", "red", "room"], ["F"], ["B", "R"])
        self.assertEqual(a[1] > a[0], b[1] > b[0])


class TestLexicalPersistence(unittest.TestCase):

    def test_save_and_load_score_identically(self):
        print("\n--- TestLexicalPersistence: test_save_and_load_score_identically ---")
        _, corpus = seed_corpus("cleanup")
        model = train_lexical(corpus)
        with tempfile.TemporaryDirectory() as tmp:
            path = model.save(Path(tmp) / "model.json")
            loaded = LexicalModel.load(path)
            self.assertEqual(loaded.to_dict(), model.to_dict())
            words = ["go", "to", "the", "green", "room", "but", "never", "go", "to", "the", "red", "room"]
            for prefix in ([], ["&"], ["&", "F"]):
                cands = model.vocabulary() + [EOS]
                self.assertEqual(model.score_next(words, prefix, cands), loaded.score_next(words, prefix, cands))
            # scoring must not grow the tables
            self.assertEqual(model.to_dict(), loaded.to_dict())

    def test_training_is_deterministic(self):
        _, corpus = seed_corpus("cleanup")
        with tempfile.TemporaryDirectory() as tmp:
            a = train_lexical(corpus).save(Path(tmp) / "a.json")
            b = train_lexical(corpus).save(Path(tmp) / "b.json")
            self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_load_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                LexicalModel.load(Path(tmp) / "missing.json")
            bad = Path(tmp) / "bad.json"
            bad.write_text("{not json", encoding="utf-8")
            with self.assertRaises(ConfigError):
                LexicalModel.load(bad)
            wrong = Path(tmp) / "wrong.json"
            wrong.write_text(json.dumps({"format": "other"}), encoding="utf-8")
            with self.assertRaises(ConfigError):
                LexicalModel.load(wrong)


class TestTrainingLabels(unittest.TestCase):

    def test_labels_rerendered_in_requested_representation(self):
        b, corpus = seed_corpus("pick", mode="annotated")
        pairs = training_pairs(corpus.examples, TargetRepr.RAW_INFIX)
        self.assertEqual(pairs[0], ("scan the table and pick up any blue cubes", "G ( ( S U ! B ) & F ( B ) )"))
        canonical = training_pairs(corpus.examples, TargetRepr.CANONICAL, b.lexicon)
        self.assertTrue(canonical[0][1].startswith("globally ( and ( until ( scan"))
        with self.assertRaises(ConfigError):
            training_pairs(corpus.examples, TargetRepr.CANONICAL)
        model = train_lexical(corpus, TargetRepr.CANONICAL, b.lexicon)
        self.assertEqual(model.representation, TargetRepr.CANONICAL)
        self.assertIn("globally", model.vocabulary())


class TestParaphraseBackoff(unittest.TestCase):

    def setUp(self):
        self.seeds = [
            example("go to the blue room", "F B"),
            example("go to the red room", "F R"),
            example("never go to the red room", "G ! R"),
        ]
        self.paraphrases = [
            Example(text="visit the blue room", target="F B", label="F B", provenance=Provenance.PARAPHRASED, source_id="f00000"),
            Example(text="visit the red room", target="F R", label="F R", provenance=Provenance.PARAPHRASED, source_id="f00001"),
            Example(text="at no point visit the red room", target="G ! R", label="G ! R",
                    provenance=Provenance.PARAPHRASED, source_id="f00002"),
        ]

    def test_paraphrases_fill_the_backoff_tables(self):
        print("\n--- TestParaphraseBackoff: test_paraphrases_fill_the_backoff_tables ---")
        model = train_lexical(self.seeds + self.paraphrases)
        self.assertEqual(model.n_examples, 3)
        self.assertEqual(model.backoff.n_examples, 3)
        self.assertNotIn("visit", model.input_vocab)
        self.assertIn("visit", model.backoff.input_vocab)
        self.assertEqual(model.bigram[BOS]["G"], 1)

    def test_seed_wording_scores_as_without_paraphrases(self):
        plain = train_lexical(self.seeds)
        augmented = train_lexical(self.seeds + self.paraphrases)
        words = ["never", "go", "to", "the", "red", "room"]
        for prefix, cands in [([], ["F", "G"]), (["G"], ["!"]), (["F"], ["B", "R"])]:
            self.assertEqual(plain.score_next(words, prefix, cands), augmented.score_next(words, prefix, cands))

    def test_paraphrase_only_words_are_scored(self):
        plain = train_lexical(self.seeds)
        augmented = train_lexical(self.seeds + self.paraphrases)
        words = ["at", "no", "point", "visit", "the", "red", "room"]
        g_plain = plain.score_next(words, [], ["F", "G"])[1]
        g_augmented = augmented.score_next(words, [], ["F", "G"])[1]
        self.assertGreater(g_augmented, g_plain)

    def test_paraphrase_only_corpus_trains_as_seeds(self):
        model = train_lexical(self.paraphrases)
        self.assertIsNone(model.backoff)
        self.assertIn("visit", model.input_vocab)

    def test_backoff_survives_save_and_load(self):
        model = train_lexical(self.seeds + self.paraphrases)
        with tempfile.TemporaryDirectory() as tmp:
            loaded = LexicalModel.load(model.save(Path(tmp) / "model.json"))
        self.assertEqual(loaded.to_dict(), model.to_dict())
        words = ["visit", "the", "blue", "room"]
        self.assertEqual(loaded.score_next(words, ["F"], ["B", "R"]), model.score_next(words, ["F"], ["B", "R"]))


class TestSelfConsistency(unittest.TestCase):
    """Every back-translated seed of an augmented corpus decodes to its own formula."""

    def _check(self, name, mode):
        _, corpus = augmented_corpus(name, mode)
        model = train_lexical(corpus)
        translator = Translator(model, build_trie(ex.label for ex in corpus.examples))
        seeds = [ex for ex in corpus.examples if ex.provenance == Provenance.BACKTRANSLATED]
        self.assertGreater(len(corpus), len(seeds))
        wrong = [(ex.text, ex.label) for ex in seeds if translator.translate(ex.text) != ex.label]
        print(f"{name}: {len(seeds) - len(wrong)}/{len(seeds)} seed sentences decode to their own formula "
              f"({len(corpus)} training examples)")
        self.assertEqual(wrong, [])

    def test_cleanup_seed_sentences(self):
        print("\n--- TestSelfConsistency: test_cleanup_seed_sentences ---")
        self._check("cleanup", "template")

    def test_pick_seed_sentences(self):
        print("\n--- TestSelfConsistency: test_pick_seed_sentences ---")
        self._check("pick", "annotated")


if __name__ == '__main__':
    unittest.main()

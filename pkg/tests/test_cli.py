import json
import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import httpx

# Add project root to sys.path
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from click.testing import CliRunner

from generators.ltl_printer import render_target
from main import cli, main, translate_command
from models.data_models import RunConfig, TargetRepr
from services.dataset_service import load_config_bundle
from services.lexical_model import train_lexical
from services.paraphrase_service import FallbackParaphraser
from services.remote_scorer import RemoteScorer
from services.synthesis_service import build_corpus, enumerate_formulas, read_corpus, write_corpus

DATA = project_root / "data"


def paths(name):
    base = DATA / name
    return ["--apset", str(base / "apset.jsonl"), "--lexicon", str(base / "lexicon.json"),
            "--structures", str(base / "structures.jsonl")]


def last_line(output):
    return output.strip().splitlines()[-1]


class TestFormulaCommands(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()

    def test_parse_prefix_echoes_infix(self):
        print("\n--- TestFormulaCommands: test_parse_prefix_echoes_infix ---")
        result = self.runner.invoke(cli, ["parse", "--prefix", "F & R F X"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(result.output, "F ( R & F ( X ) )\n")

    def test_parse_infix_to_prefix(self):
        result = self.runner.invoke(cli, ["parse", "--infix", "F ( blue_room & F ( yellow_room ) )"])
        self.assertEqual(result.output, "F & blue_room F yellow_room\n")
        result = self.runner.invoke(cli, ["parse", "--infix", "! orange_room U second_floor", "--to", "infix"])
        self.assertEqual(result.output, "! orange_room U second_floor\n")

    def test_parse_errors(self):
        result = self.runner.invoke(cli, ["parse", "--infix", "F ( blue_room & )"])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("error: MalformedExpression: unexpected parenthesis at token 5", result.output)
        result = self.runner.invoke(cli, ["parse"])
        self.assertEqual(result.exit_code, 2)
        result = self.runner.invoke(cli, ["parse", "--prefix", "F Q", "--apset", str(DATA / "cleanup" / "apset.jsonl")])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("UnknownToken", result.output)

    def test_canonicalize_both_ways(self):
        lexicon = str(DATA / "cleanup" / "lexicon.json")
        result = self.runner.invoke(cli, ["canonicalize", "--formula", "F | B R", "--lexicon", lexicon])
        self.assertEqual(result.output, "finally ( or ( go to the blue room , go to the red room ) )\n")
        result = self.runner.invoke(cli, ["canonicalize", "--canonical",
                                          "finally ( or ( go to the blue room , go to the red room ) )",
                                          "--lexicon", lexicon])
        self.assertEqual(result.output, "F | B R\n")
        result = self.runner.invoke(cli, ["canonicalize", "--canonical", "finally ( go to the attic )", "--lexicon", lexicon])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("AmbiguousPhrase", result.output)

    def test_backtranslate(self):
        result = self.runner.invoke(cli, ["backtranslate", "--formula", "F & | B R F Y"] + paths("cleanup"))
        self.assertEqual(result.output, "go to the blue room or go to the red room to finally go to the yellow room\n")
        result = self.runner.invoke(cli, ["backtranslate", "--count"] + paths("cleanup"))
        self.assertEqual(result.output, "10\n")
        result = self.runner.invoke(cli, ["backtranslate", "--count", "--mode", "annotated"] + paths("pick"))
        self.assertEqual(result.output, "5\n")

    def test_check(self):
        result = self.runner.invoke(cli, ["check", "--formula", "F B", "--trace", "{} {B}"])
        self.assertEqual(result.output, "SAT\n")
        result = self.runner.invoke(cli, ["check", "--infix", "G ( ! B )", "--trace", "{} {B}"])
        self.assertEqual(result.output, "UNSAT\n")
        result = self.runner.invoke(cli, ["check", "--formula", "F B", "--trace", "{} B"])
        self.assertEqual(result.exit_code, 2)
        result = self.runner.invoke(cli, ["check", "--formula", "F B", "--trace", "{Q}",
                                          "--apset", str(DATA / "cleanup" / "apset.jsonl")])
        self.assertEqual(result.exit_code, 1)
        self.assertIn("UnknownAtom", result.output)


class TestExitCodes(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()

    def test_unknown_subcommand(self):
        print("\n--- TestExitCodes: test_unknown_subcommand ---")
        result = self.runner.invoke(cli, ["frobnicate"])
        self.assertEqual(result.exit_code, 2)
        self.assertIn("error: UnknownSubcommand", result.output)
        self.assertEqual(len([l for l in result.output.splitlines() if l.startswith("error:")]), 1)

    def test_config_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            result = self.runner.invoke(cli, ["train", "--out", str(Path(tmp) / "m.json")])
        self.assertEqual(result.exit_code, 2)
        self.assertIn("error: ConfigError: train needs a corpus", result.output)
        result = self.runner.invoke(cli, ["eval", "--seed", "0", "--config", "/nonexistent/run.json"])
        self.assertEqual(result.exit_code, 2)
        result = self.runner.invoke(cli, ["eval", "--seed", "0", "--k-folds", "-1"])
        self.assertEqual(result.exit_code, 2)

    def test_stat_mismatch(self):
        result = self.runner.invoke(cli, ["eval", "--seed", "0", "--scorer", "oracle", "--scenario", "golden-cv",
                                          "--dataset", str(DATA / "cleanup" / "adapter.full.json")] + paths("cleanup"))
        self.assertEqual(result.exit_code, 3)
        self.assertIn("error: StatMismatch", result.output)

    def test_main_returns_codes(self):
        self.assertEqual(main(["parse", "--prefix", "F B"]), 0)
        self.assertEqual(main(["frobnicate"]), 2)


class TestPipelineCommands(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_synth_and_train_match_library(self):
        print("\n--- TestPipelineCommands: test_synth_and_train_match_library ---")
        cli_corpus = self.dir / "cli.jsonl"
        result = self.runner.invoke(cli, ["synth", "--out", str(cli_corpus), "--n-paraphrases", "3", "--seed", "7"]
                                    + paths("cleanup"))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(last_line(result.output).endswith(f"-> {cli_corpus}"))

        b = load_config_bundle(*[DATA / "cleanup" / f for f in ("apset.jsonl", "lexicon.json", "structures.jsonl")])
        lib_corpus = build_corpus(b.structures, b.aps, b.lexicon, b.templates, FallbackParaphraser(seed=7),
                                  n_paraphrases=3, seed=7)
        lib_path = write_corpus(lib_corpus, self.dir / "lib.jsonl")
        self.assertEqual(cli_corpus.read_bytes(), lib_path.read_bytes())

        cli_model = self.dir / "cli-model.json"
        result = self.runner.invoke(cli, ["train", "--corpus", str(cli_corpus), "--out", str(cli_model)])
        self.assertEqual(result.exit_code, 0, result.output)
        lib_model = train_lexical(read_corpus(lib_path), TargetRepr.RAW_PREFIX).save(self.dir / "lib-model.json")
        self.assertEqual(cli_model.read_bytes(), lib_model.read_bytes())

        result = self.runner.invoke(cli, ["translate", "--input", "go to the green room but never go to the red room",
                                          "--model", str(cli_model)] + paths("cleanup"))
        self.assertEqual(result.exit_code, 0, result.output)
        config = RunConfig(model=str(cli_model), apset=str(DATA / "cleanup" / "apset.jsonl"),
                           lexicon=str(DATA / "cleanup" / "lexicon.json"),
                           structures=str(DATA / "cleanup" / "structures.jsonl"))
        expected = translate_command(config, "go to the green room but never go to the red room")
        self.assertEqual(last_line(result.output), expected[0])
        valid = {render_target(f, TargetRepr.RAW_PREFIX) for f in enumerate_formulas(b.structures, b.aps)}
        self.assertIn(expected[0], valid)

        result = self.runner.invoke(cli, ["translate", "--input", "go to the blue room", "--model", str(cli_model),
                                          "--top-k", "3"] + paths("cleanup"))
        self.assertEqual(result.exit_code, 0, result.output)
        lines = [line for line in result.output.splitlines() if "\t" in line]
        self.assertTrue(1 <= len(lines) <= 3)
        self.assertEqual(len(set(lines)), len(lines))
        for line in lines:
            score, formula = line.split("\t")
            float(score)
            self.assertIn(formula, valid)

    def test_drone_translate_with_golden_model(self):
        print("\n--- TestPipelineCommands: test_drone_translate_with_golden_model ---")
        model = self.dir / "drone-model.json"
        result = self.runner.invoke(cli, ["train", "--dataset", str(DATA / "drone" / "adapter.json"),
                                          "--representation", "raw-infix", "--out", str(model)])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(last_line(result.output), f"10 examples -> {model}")
        result = self.runner.invoke(cli, ["translate", "--input",
                                          "head to the yellow room , but make sure to go through the blue room first .",
                                          "--model", str(model)] + paths("drone"))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(last_line(result.output), "F ( blue_room & F ( yellow_room ) )")

    def test_drone_synthetic_translate_stays_in_output_set(self):
        corpus = self.dir / "drone.jsonl"
        model = self.dir / "drone-model.json"
        result = self.runner.invoke(cli, ["synth", "--out", str(corpus), "--n-paraphrases", "0", "--seed", "0",
                                          "--representation", "raw-infix", "--backtranslation", "rule"] + paths("drone"))
        self.assertEqual(result.exit_code, 0, result.output)
        result = self.runner.invoke(cli, ["train", "--corpus", str(corpus), "--representation", "raw-infix", "--out", str(model)])
        self.assertEqual(result.exit_code, 0, result.output)
        result = self.runner.invoke(cli, ["translate", "--input",
                                          "head to the yellow room , but make sure to go through the blue room first .",
                                          "--model", str(model)] + paths("drone"))
        self.assertEqual(result.exit_code, 0, result.output)
        b = load_config_bundle(*[DATA / "drone" / f for f in ("apset.jsonl", "lexicon.json", "structures.jsonl")])
        valid = {render_target(f, TargetRepr.RAW_INFIX) for f in enumerate_formulas(b.structures, b.aps)}
        self.assertIn(last_line(result.output), valid)

    def test_remote_translate_closes_the_client(self):
        created = []

        def handler(request):
            body = json.loads(request.content)
            return httpx.Response(200, json={"scores": [-0.1 * (i + 1) for i in range(len(body["candidates"]))]})

        def factory():
            scorer = RemoteScorer(endpoint="http://scorer.test/v1/score", api_key="", backoff_base_s=0,
                                  transport=httpx.MockTransport(handler))
            created.append(scorer)
            return scorer

        base = DATA / "pick"
        config = RunConfig(scorer="remote", apset=str(base / "apset.jsonl"), lexicon=str(base / "lexicon.json"),
                           structures=str(base / "structures.jsonl"))
        with mock.patch("main.RemoteScorer", factory):
            out = translate_command(config, "scan the table and pick up any red cubes")
        self.assertEqual(len(out), 1)
        self.assertEqual(len(created), 1)
        self.assertTrue(created[0].client.is_closed)

    def test_translate_needs_model(self):
        result = self.runner.invoke(cli, ["translate", "--input", "go"] + paths("cleanup"))
        self.assertEqual(result.exit_code, 2)

    def test_eval_with_config_file_and_report(self):
        print("\n--- TestPipelineCommands: test_eval_with_config_file_and_report ---")
        base = DATA / "pick"
        config = self.dir / "run.json"
        config.write_text(json.dumps({
            "apset": str(base / "apset.jsonl"),
            "lexicon": str(base / "lexicon.json"),
            "structures": str(base / "structures.jsonl"),
            "dataset": str(base / "adapter.json"),
            "scenario": "golden-cv",
            "scorer": "oracle",
            "k_folds": 3,
        }), encoding="utf-8")
        out = self.dir / "report"
        result = self.runner.invoke(cli, ["eval", "--config", str(config), "--k-folds", "2", "--seed", "1",
                                          "--out", str(out)])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(last_line(result.output), "accuracy 1.0000 (10/10)")
        report = json.loads((self.dir / "report.json").read_text(encoding="utf-8"))
        # command-line flags override the file; file values override defaults
        self.assertEqual(report["config"]["k_folds"], 2)
        self.assertEqual(report["config"]["scorer"], "oracle")
        self.assertEqual(report["config"]["seed"], 1)
        self.assertEqual(len(report["fold_accuracies"]), 2)
        self.assertTrue((self.dir / "report.txt").exists())


if __name__ == '__main__':
    unittest.main()

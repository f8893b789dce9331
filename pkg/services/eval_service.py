# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import json
import logging
import random
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, TypeVar

from config import LOG_LEVEL
from generators.ltl_printer import render_target
from models.data_models import (
    APSet, AnnotationTemplate, Corpus, Dataset, EvalReport, Example, Lexicon, LtlStructure, Prediction,
    Provenance, RunConfig, TargetRepr,
)
from models.errors import ConfigError, EmptyCorpus, LtlPipelineError, TooFewExamples
from models.ltl import Formula
from models.output_trie import OutputTrie, build_trie
from parsers.ltl_parser import parse_prefix
from services.dataset_service import load_apset, load_config_bundle, load_dataset, load_lexicon, valid_targets
from services.decoder import OracleScorer, Translator
from services.lexical_model import LexicalModel, train_lexical
from services.paraphrase_service import make_paraphraser
from services.remote_scorer import RemoteScorer
from services.synthesis_service import build_corpus, enumerate_formulas, read_corpus
from templates.report_templates import render_report_table

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)

T = TypeVar("T")


def exact_match(predicted: str, gold: str) -> bool:
    """String equality after collapsing whitespace runs; no other normalization."""
    return " ".join(predicted.split()) == " ".join(gold.split())


def kfold_split(examples: Sequence[T], k: int, seed: int) -> List[Tuple[List[T], List[T]]]:
    """``k`` (train, test) pairs over a seeded shuffle; test folds are disjoint,
    cover every example and differ in size by at most one."""
    if k < 2:
        raise TooFewExamples(f"k-fold needs k >= 2, got {k}", {"k": k})
    n = len(examples)
    if n < k:
        raise TooFewExamples(f"{n} examples cannot fill {k} folds", {"k": k, "n": n})
    order = list(range(n))
    random.Random(seed).shuffle(order)
    folds: List[List[int]] = []
    start = 0
    for i in range(k):
        size = n // k + (1 if i < n % k else 0)
        folds.append(sorted(order[start:start + size]))
        start += size
    splits = []
    for i, test_idx in enumerate(folds):
        held_out = set(test_idx)
        train = [examples[j] for j in range(n) if j not in held_out]
        splits.append((train, [examples[j] for j in test_idx]))
    return splits


def recount_accuracy(report: EvalReport) -> float:
    """Accuracy recomputed from the stored per-example predictions."""
    if not report.predictions:
        return 0.0
    return sum(exact_match(p.predicted, p.gold) for p in report.predictions) / len(report.predictions)


@dataclass
class EvalSetup:
    """Everything a run needs besides the scorer: gold data, the output set and label rendering."""

    dataset: Dataset
    representation: TargetRepr
    lexicon: Optional[Lexicon]
    aps: Optional[APSet]
    structures: List[LtlStructure]
    templates: List[AnnotationTemplate]
    valid_formulas: List[Formula]
    trie: OutputTrie

    def label(self, prefix_target: str) -> str:
        return render_target(parse_prefix(prefix_target), self.representation, self.lexicon)


def prepare(config: RunConfig, dataset: Optional[Dataset] = None) -> EvalSetup:
    representation = TargetRepr(config.representation)
    if dataset is None:
        if not config.dataset:
            raise ConfigError("evaluation needs a dataset adapter (--dataset)")
        dataset = load_dataset(config.dataset)

    aps, lexicon, structures, templates = None, None, [], []
    if config.apset and config.lexicon:
        bundle = load_config_bundle(config.apset, config.lexicon, config.structures)
        aps, lexicon, structures, templates = bundle.aps, bundle.lexicon, bundle.structures, bundle.templates
    elif config.structures:
        raise ConfigError("a structures file needs --apset and --lexicon")
    else:
        aps = load_apset(config.apset) if config.apset else None
        lexicon = load_lexicon(config.lexicon) if config.lexicon else None
    if representation == TargetRepr.CANONICAL and lexicon is None:
        raise ConfigError("canonical representation needs a lexicon")

    if structures:
        valid = enumerate_formulas(structures, aps)
        missing = set(valid_targets(dataset)) - set(valid)
        if missing:
            logger.warning(f"{len(missing)} gold formulas lie outside the enumerated output set")
    else:
        valid = valid_targets(dataset)
    trie = build_trie(render_target(f, representation, lexicon) for f in valid)
    logger.info(f"Output set: {len(trie)} targets in {representation.value}")
    return EvalSetup(dataset, representation, lexicon, aps, structures, templates, valid, trie)


def _decode_all(translator: Translator, texts: List[str], workers: int) -> List[str]:
    if workers <= 1:
        return [translator.translate(t) for t in texts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(translator.translate, texts))


def _translator(config: RunConfig, scorer, setup: EvalSetup) -> Translator:
    vocab = set(setup.trie.vocabulary())
    if hasattr(scorer, "vocabulary"):
        vocab.update(scorer.vocabulary())
    return Translator(scorer, setup.trie, sorted(vocab), beam=max(1, config.beam),
                      constrained=not config.no_constrained_decoding)


def _scorer(config: RunConfig, setup: EvalSetup, train: Sequence[Example]):
    if config.scorer == "oracle":
        return OracleScorer({ex.text: setup.label(ex.target) for ex in setup.dataset.examples})
    if config.scorer == "remote":
        return RemoteScorer()
    if config.model and config.scenario == "low-resource":
        model = LexicalModel.load(config.model)
        if model.representation != setup.representation:
            raise ConfigError(
                f"model was trained on {model.representation.value} labels, run asks for {setup.representation.value}"
            )
        return model
    return train_lexical(list(train), setup.representation, setup.lexicon)


def _predict(config: RunConfig, setup: EvalSetup, train: Sequence[Example], test: Sequence[Example],
             fold: int) -> List[Prediction]:
    scorer = _scorer(config, setup, train)
    try:
        return _evaluate(_translator(config, scorer, setup), setup, test, fold, config.workers)
    finally:
        # the remote scorer holds an HTTP client
        if hasattr(scorer, "close"):
            scorer.close()


def training_corpus(config: RunConfig, setup: EvalSetup) -> Corpus:
    """Synthetic training data for the low-resource scenario: the configured
    corpus file, or a corpus built from the structures."""
    if config.corpus:
        corpus = read_corpus(config.corpus)
        if config.no_augmentation:
            kept = [ex for ex in corpus.examples if ex.provenance != Provenance.PARAPHRASED]
            if not kept:
                raise EmptyCorpus(f"corpus {config.corpus} has no unparaphrased examples")
            corpus = Corpus(examples=kept, fingerprint=corpus.fingerprint)
        return corpus
    if not setup.structures:
        raise ConfigError("the low-resource scenario needs structures or a corpus")
    svc = make_paraphraser(config.paraphrase_backend, seed=config.seed) if config.effective_paraphrases else None
    return build_corpus(
        setup.structures, setup.aps, setup.lexicon, setup.templates, svc,
        n_paraphrases=config.effective_paraphrases, representation=setup.representation,
        mode=config.backtranslation, seed=config.seed,
    )


def _evaluate(translator: Translator, setup: EvalSetup, test: Sequence[Example], fold: int,
              workers: int) -> List[Prediction]:
    predicted = _decode_all(translator, [ex.text for ex in test], workers)
    out = []
    for ex, pred in zip(test, predicted):
        gold = setup.label(ex.target)
        out.append(Prediction(text=ex.text, gold=gold, predicted=pred, correct=exact_match(pred, gold), fold=fold))
    return out


def run_eval(config: RunConfig, dataset: Optional[Dataset] = None) -> EvalReport:
    setup = prepare(config, dataset)
    golden = list(setup.dataset.examples)
    predictions: List[Prediction] = []
    fold_accuracies: List[float] = []

    if config.scenario == "golden-cv":
        for fold, (train, test) in enumerate(kfold_split(golden, config.k_folds, config.seed), start=1):
            preds = _predict(config, setup, train, test, fold)
            fold_accuracies.append(sum(p.correct for p in preds) / len(preds))
            logger.info(f"Fold {fold}/{config.k_folds}: accuracy {fold_accuracies[-1]:.4f} on {len(preds)} examples")
            predictions.extend(preds)
    else:
        train = training_corpus(config, setup).examples if config.scorer == "lexical" and not config.model else []
        predictions = _predict(config, setup, train, golden, 0)
        fold_accuracies.append(sum(p.correct for p in predictions) / len(predictions))

    confusion: Dict[str, Dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for p in predictions:
        confusion[p.gold][p.predicted] += 1
    n_correct = sum(p.correct for p in predictions)
    echo = config.model_dump(mode="json")
    echo.update({"n_valid": len(setup.trie), "n_golden": len(golden), "dataset_name": setup.dataset.name})
    report = EvalReport(
        accuracy=n_correct / len(predictions),
        n_correct=n_correct,
        n_total=len(predictions),
        fold_accuracies=fold_accuracies,
        confusion={g: dict(row) for g, row in confusion.items()},
        predictions=predictions,
        config=echo,
    )
    logger.info(f"Accuracy {report.accuracy:.4f} ({n_correct}/{len(predictions)}) "
                f"[{config.scenario}, {setup.representation.value}, "
                f"constrained={not config.no_constrained_decoding}, augmented={not config.no_augmentation}]")
    return report


def report_paths(out) -> Tuple[Path, Path]:
    out = Path(out)
    if out.suffix in (".json", ".txt"):
        out = out.with_suffix("")
    return out.with_name(out.name + ".json"), out.with_name(out.name + ".txt")


def write_report(report: EvalReport, out) -> Tuple[Path, Path]:
    """``<out>.json`` (full report with predictions) and ``<out>.txt`` (table)."""
    json_path, txt_path = report_paths(out)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    data = report.model_dump(mode="json")
    json_path.write_text(json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    txt_path.write_text(render_report_table(data), encoding="utf-8")
    logger.info(f"Wrote report to {json_path} and {txt_path}")
    return json_path, txt_path


if __name__ == "__main__":
    base = _project_root / "data" / "cleanup"
    demo = RunConfig(
        apset=str(base / "apset.jsonl"),
        lexicon=str(base / "lexicon.json"),
        structures=str(base / "structures.jsonl"),
        dataset=str(base / "adapter.json"),
        n_paraphrases=3,
    )
    try:
        result = run_eval(demo)
        print(render_report_table(result.model_dump(mode="json")))
    except LtlPipelineError as e:
        logger.error(json.dumps(e.to_dict()))

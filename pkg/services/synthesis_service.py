# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import asyncio
import itertools
import json
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from config import LOG_LEVEL, PARAPHRASE_CONFIG
from generators.ltl_printer import print_prefix, render_target
from models.data_models import (
    APSet, AnnotationTemplate, Corpus, CorpusFingerprint, Example, Lexicon, LtlStructure, Provenance,
    TargetRepr, stable_hash,
)
from models.errors import ConfigError, EmptyCorpus, InsufficientAPs, LtlPipelineError, ParseFailure
from models.ltl import Formula
from services.backtranslate_service import back_translate, instantiate
from services.paraphrase_service import normalize_sentence, paraphrase

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)


def enumerate_formulas(structures: Sequence[LtlStructure], aps: APSet) -> List[Formula]:
    """Every instantiation of every structure: structure order, then
    lexicographic AP assignment. Repeated formulas keep their first position."""
    all_names = aps.names()
    out: Dict[Formula, None] = {}
    for structure in structures:
        if structure.distinct_slots and structure.slot_count > len(all_names):
            raise InsufficientAPs(
                f"structure {structure.id!r} needs {structure.slot_count} distinct APs, APSet has {len(all_names)}",
                {"structure": structure.id, "slot_count": structure.slot_count, "n_aps": len(all_names)},
            )
        domains = []
        for hole in range(1, structure.slot_count + 1):
            domain = sorted(structure.domain(hole, all_names))
            unknown = [name for name in domain if name not in aps]
            if unknown:
                raise ConfigError(f"structure {structure.id!r} hole {hole} domain names unknown APs {unknown}")
            domains.append(domain)
        before = len(out)
        for combo in itertools.product(*domains):
            if structure.distinct_slots and len(set(combo)) != len(combo):
                continue
            out.setdefault(instantiate(structure, dict(enumerate(combo, start=1))), None)
        logger.debug(f"Structure {structure.id}: {len(out) - before} formulas")
    return list(out)


def dedup_examples(examples: Iterable[Example]) -> List[Example]:
    """Drop repeated (normalized text, label) pairs, then order by source id and provenance."""
    seen = set()
    kept: List[Example] = []
    for ex in examples:
        key = (normalize_sentence(ex.text), ex.label)
        if key in seen:
            continue
        seen.add(key)
        kept.append(ex)
    return sorted(kept, key=lambda e: (e.source_id, e.provenance.rank))


def corpus_fingerprint(
    aps: APSet,
    structures: Sequence[LtlStructure],
    lex: Lexicon,
    paraphrase_settings: Dict,
    seed: Optional[int],
) -> CorpusFingerprint:
    structures_payload = [
        {"id": s.id, "skeleton": print_prefix(s.skeleton), "distinct": s.distinct_slots,
         "domains": {str(k): v for k, v in sorted(s.slot_domains.items())}}
        for s in structures
    ]
    return CorpusFingerprint(
        apset_hash=aps.fingerprint(),
        structures_hash=stable_hash(structures_payload),
        lexicon_hash=lex.fingerprint(),
        paraphrase=paraphrase_settings,
        seed=seed,
    )


async def _paraphrase_all(sentences: List[str], n: int, svc, max_concurrency: int) -> List[List[str]]:
    semaphore = asyncio.Semaphore(max(1, max_concurrency))

    async def one(sentence: str) -> List[str]:
        async with semaphore:
            try:
                return await paraphrase(sentence, n, svc)
            except LtlPipelineError as e:
                logger.warning(f"Paraphrasing failed for {sentence[:60]!r}, keeping the back-translation only: {e.message}")
                return []

    return list(await asyncio.gather(*(one(s) for s in sentences)))


async def build_corpus_async(
    structures: Sequence[LtlStructure],
    aps: APSet,
    lex: Lexicon,
    templates: Optional[Sequence[AnnotationTemplate]] = None,
    svc=None,
    n_paraphrases: int = 10,
    representation: TargetRepr = TargetRepr.RAW_PREFIX,
    mode: str = "template",
    seed: Optional[int] = None,
    max_concurrency: Optional[int] = None,
) -> Corpus:
    formulas = enumerate_formulas(structures, aps)
    logger.info(f"Enumerated {len(formulas)} formulas from {len(structures)} structures over {len(aps)} APs")

    seeds: List[Tuple[str, Formula, str, str]] = []
    for index, formula in enumerate(formulas):
        sentence = back_translate(formula, lex, mode, structures, templates)
        seeds.append((f"f{index:05d}", formula, sentence, render_target(formula, representation, lex)))

    paraphrases: List[List[str]] = [[] for _ in seeds]
    if n_paraphrases > 0:
        if svc is None:
            raise ConfigError("n_paraphrases > 0 needs a paraphrase backend")
        concurrency = max_concurrency or PARAPHRASE_CONFIG.get("max_concurrency", 4)
        paraphrases = await _paraphrase_all([s[2] for s in seeds], n_paraphrases, svc, concurrency)

    examples: List[Example] = []
    for (source_id, formula, sentence, label), variants in zip(seeds, paraphrases):
        common = dict(target=print_prefix(formula), target_repr=representation, label=label, source_id=source_id)
        examples.append(Example(text=sentence, provenance=Provenance.BACKTRANSLATED, **common))
        for text in variants:
            if text.strip():
                examples.append(Example(text=text, provenance=Provenance.PARAPHRASED, **common))

    settings = {"n_paraphrases": n_paraphrases, "mode": mode, "representation": TargetRepr(representation).value}
    if svc is not None and n_paraphrases > 0:
        settings.update(svc.settings())
    corpus = Corpus(
        examples=dedup_examples(examples),
        fingerprint=corpus_fingerprint(aps, structures, lex, settings, seed),
    )
    logger.info(f"Built corpus: {len(corpus)} examples ({len(formulas)} formulas, n_paraphrases={n_paraphrases})")
    return corpus


def build_corpus(
    structures: Sequence[LtlStructure],
    aps: APSet,
    lex: Lexicon,
    templates: Optional[Sequence[AnnotationTemplate]] = None,
    svc=None,
    n_paraphrases: int = 10,
    **kwargs,
) -> Corpus:
    """Synchronous entry point around ``build_corpus_async``."""
    return asyncio.run(build_corpus_async(structures, aps, lex, templates, svc, n_paraphrases, **kwargs))


def merge_corpora(a: Corpus, b: Corpus) -> Corpus:
    return Corpus(examples=dedup_examples(list(a.examples) + list(b.examples)), fingerprint=a.fingerprint)


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_corpus(corpus: Corpus, path) -> Path:
    """JSON Lines, one Example per line, plus a ``.meta.json`` fingerprint sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for ex in corpus.examples:
            fh.write(json.dumps(ex.model_dump(mode="json"), ensure_ascii=False, sort_keys=True) + "\n")
    meta_path(path).write_text(
        json.dumps(corpus.fingerprint.model_dump(mode="json"), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    logger.info(f"Wrote {len(corpus)} examples to {path}")
    return path


def read_corpus(path) -> Corpus:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"corpus not found: {path}")
    examples: List[Example] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                examples.append(Example(**json.loads(line)))
            except (json.JSONDecodeError, ValidationError, TypeError) as e:
                raise ParseFailure(f"bad corpus record: {e}", lineno, {"file": str(path)})
    if not examples:
        raise EmptyCorpus(f"corpus {path} has no examples")
    sidecar = meta_path(path)
    fingerprint = (
        CorpusFingerprint(**json.loads(sidecar.read_text(encoding="utf-8")))
        if sidecar.exists() else CorpusFingerprint(apset_hash="", structures_hash="")
    )
    return Corpus(examples=examples, fingerprint=fingerprint)


if __name__ == "__main__":
    from services.dataset_service import load_config_bundle
    from services.paraphrase_service import FallbackParaphraser

    base = _project_root / "data" / "cleanup"
    bundle = load_config_bundle(base / "apset.jsonl", base / "lexicon.json", base / "structures.jsonl")
    demo = build_corpus(bundle.structures, bundle.aps, bundle.lexicon, bundle.templates,
                        FallbackParaphraser(seed=0), n_paraphrases=3, seed=0)
    for ex in demo.examples[:8]:
        print(f"{ex.source_id} {ex.provenance.value:14s} {ex.label:20s} {ex.text}")

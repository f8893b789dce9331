# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

# Count-based next-token scorer trained on (command, label) pairs.
#
# Per candidate output token two signals are combined: a naive-Bayes
# co-occurrence score of the input words given the candidate (plain
# word/token counts interpolated with (word, input bucket) x (token, output
# position) counts, which favour near-diagonal alignments), and an
# output-token bigram. The mixture is log-linear and renormalized over the
# presented candidates, so a candidate's rank does not depend on which other
# candidates are presented.
#
# Paraphrased examples train a separate backoff table set. It is consulted
# only for input words the seed sentences never used, so a command worded like
# a seed scores exactly as it would under a seed-only model, and the
# structure statistics (prior, bigram) come from the seeds alone.

import json
import logging
import math
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from config import DECODER_DEFAULTS, LOG_LEVEL
from generators.ltl_printer import render_target
from models.data_models import Corpus, Example, Lexicon, Provenance, TargetRepr
from models.errors import ConfigError, EmptyCorpus, LtlPipelineError
from models.output_trie import BOS, EOS
from parsers.ltl_parser import parse_prefix
from services.decoder import tokenize_text

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)

MODEL_FORMAT = "ltl-lexical/2"
SEP = "\t"  # joins composite count keys; "|" is an output token
_EMPTY: Counter = Counter()


def _key(*parts) -> str:
    return SEP.join(str(p) for p in parts)


def _log_softmax(values: List[float]) -> List[float]:
    top = max(values)
    total = math.log(sum(math.exp(v - top) for v in values)) + top
    return [v - total for v in values]


class LexicalModel:
    def __init__(
        self,
        alpha: float = DECODER_DEFAULTS["alpha"],
        mixture_weight: float = DECODER_DEFAULTS["mixture_weight"],
        position_buckets: int = DECODER_DEFAULTS["position_buckets"],
        position_weight: float = DECODER_DEFAULTS["position_weight"],
        max_position: int = DECODER_DEFAULTS["max_position"],
        representation: TargetRepr = TargetRepr.RAW_PREFIX,
    ):
        if alpha <= 0:
            raise ConfigError("alpha must be positive")
        if not 0.0 <= mixture_weight <= 1.0 or not 0.0 <= position_weight <= 1.0:
            raise ConfigError("mixture and position weights must lie in [0, 1]")
        if position_buckets < 1:
            raise ConfigError("position_buckets must be >= 1")
        self.alpha = alpha
        self.mixture_weight = mixture_weight
        self.position_buckets = position_buckets
        self.position_weight = position_weight
        self.max_position = max_position
        self.representation = TargetRepr(representation)

        self.input_vocab: set = set()
        self.output_vocab: set = set()
        self.word_token: Dict[str, Counter] = defaultdict(Counter)       # word -> token -> n
        self.token_totals: Counter = Counter()                            # token -> n
        self.feature_slot: Dict[str, Counter] = defaultdict(Counter)     # word\tbucket -> token\tpos -> n
        self.slot_totals: Counter = Counter()                             # token\tpos -> n
        self.slot_prior: Counter = Counter()                              # token\tpos -> occurrences
        self.position_totals: Counter = Counter()                         # pos -> occurrences
        self.bigram: Dict[str, Counter] = defaultdict(Counter)           # prev -> token -> n
        self.n_features = 0
        self.n_examples = 0
        self.backoff: Optional["LexicalModel"] = None

    # -- training ---------------------------------------------------------

    def _bucket(self, j: int, n: int) -> int:
        return min(self.position_buckets - 1, int(self.position_buckets * (j + 0.5) / n))

    def _pos(self, i: int) -> int:
        return min(i, self.max_position)

    def observe(self, text: str, label: str) -> None:
        words = tokenize_text(text)
        outputs = label.split() + [EOS]
        features = [(w, self._bucket(j, len(words))) for j, w in enumerate(words)]
        self.input_vocab.update(words)
        prev = BOS
        for i, tok in enumerate(outputs):
            slot = _key(tok, self._pos(i))
            self.output_vocab.add(tok)
            self.slot_prior[slot] += 1
            self.position_totals[str(self._pos(i))] += 1
            self.bigram[prev][tok] += 1
            prev = tok
            for w, b in features:
                self.word_token[w][tok] += 1
                self.token_totals[tok] += 1
                self.feature_slot[_key(w, b)][slot] += 1
                self.slot_totals[slot] += 1
        self.n_examples += 1

    def observe_backoff(self, text: str, label: str) -> None:
        """Count a paraphrased pair into the backoff tables."""
        if self.backoff is None:
            self.backoff = LexicalModel(representation=self.representation, **self.settings())
        self.backoff.observe(text, label)
        self.output_vocab.update(label.split() + [EOS])

    def finalize(self) -> "LexicalModel":
        self.n_features = len(self.feature_slot)
        if self.backoff is not None:
            self.backoff.finalize()
        return self

    # -- scoring ----------------------------------------------------------

    def _word_prob(self, w: str, b: int, tok: str, slot: str) -> float:
        a = self.alpha
        plain = (self.word_token.get(w, _EMPTY)[tok] + a) / (self.token_totals[tok] + a * len(self.input_vocab))
        plain /= self.position_buckets
        positional = (self.feature_slot.get(_key(w, b), _EMPTY)[slot] + a) / (self.slot_totals[slot] + a * max(1, self.n_features))
        return self.position_weight * positional + (1.0 - self.position_weight) * plain

    def cooccurrence(self, input_tokens: Sequence[str], position: int, tok: str) -> float:
        """Unnormalized log P(token, position) + sum of log P(word, bucket | token, position)."""
        a = self.alpha
        pos = self._pos(position)
        slot = _key(tok, pos)
        prior = (self.slot_prior[slot] + a) / (self.position_totals[str(pos)] + a * max(1, len(self.output_vocab)))
        score = math.log(prior)
        n = len(input_tokens)
        for j, w in enumerate(input_tokens):
            if w in self.input_vocab:
                score += math.log(self._word_prob(w, self._bucket(j, n), tok, slot))
            elif self.backoff is not None and w in self.backoff.input_vocab:
                score += math.log(self.backoff._word_prob(w, self._bucket(j, n), tok, slot))
        return score

    def score_next(self, input_tokens: Sequence[str], output_prefix: Sequence[str],
                   candidates: Sequence[str]) -> List[float]:
        """Log-probabilities over ``candidates`` (they sum to 1 in probability space)."""
        if not candidates:
            return []
        # the counts are keyed by lowercased word tokens
        input_tokens = [w for t in input_tokens for w in tokenize_text(t)]
        prev = output_prefix[-1] if output_prefix else BOS
        following = self.bigram.get(prev, Counter())
        cooc = _log_softmax([self.cooccurrence(input_tokens, len(output_prefix), c) for c in candidates])
        bigram = [following[c] + self.alpha for c in candidates]
        norm = sum(bigram)
        lam = self.mixture_weight
        mixed = [lam * lc + (1.0 - lam) * math.log(bg / norm) for lc, bg in zip(cooc, bigram)]
        return _log_softmax(mixed)

    def vocabulary(self) -> List[str]:
        """Output tokens seen in training, end-of-sequence excluded."""
        return sorted(self.output_vocab - {EOS})

    # -- persistence ------------------------------------------------------

    def settings(self) -> Dict:
        return {
            "alpha": self.alpha,
            "mixture_weight": self.mixture_weight,
            "position_buckets": self.position_buckets,
            "position_weight": self.position_weight,
            "max_position": self.max_position,
        }

    def to_dict(self) -> Dict:
        def nested(table: Dict[str, Counter]) -> Dict[str, Dict[str, int]]:
            return {k: dict(v) for k, v in table.items() if v}

        return {
            "format": MODEL_FORMAT,
            "representation": self.representation.value,
            "settings": self.settings(),
            "n_examples": self.n_examples,
            "input_vocab": sorted(self.input_vocab),
            "output_vocab": sorted(self.output_vocab),
            "word_token": nested(self.word_token),
            "token_totals": dict(self.token_totals),
            "feature_slot": nested(self.feature_slot),
            "slot_totals": dict(self.slot_totals),
            "slot_prior": dict(self.slot_prior),
            "position_totals": dict(self.position_totals),
            "bigram": nested(self.bigram),
            "backoff": self.backoff.to_dict() if self.backoff is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "LexicalModel":
        if data.get("format") != MODEL_FORMAT:
            raise ConfigError(f"unsupported model format {data.get('format')!r}, expected {MODEL_FORMAT!r}")
        model = cls(representation=data["representation"], **data["settings"])
        model.n_examples = data["n_examples"]
        model.input_vocab = set(data["input_vocab"])
        model.output_vocab = set(data["output_vocab"])
        for name in ("word_token", "feature_slot", "bigram"):
            table = getattr(model, name)
            for k, row in data[name].items():
                table[k] = Counter(row)
        model.token_totals = Counter(data["token_totals"])
        model.slot_totals = Counter(data["slot_totals"])
        model.slot_prior = Counter(data["slot_prior"])
        model.position_totals = Counter(data["position_totals"])
        if data.get("backoff"):
            model.backoff = cls.from_dict(data["backoff"])
        return model.finalize()

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
        logger.info(f"Saved lexical model ({self.n_examples} examples) to {path}")
        return path

    @classmethod
    def load(cls, path) -> "LexicalModel":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"model not found: {path}")
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ConfigError(f"invalid model file {path}: {e}")


def training_pairs(examples: Iterable[Example], representation: Optional[TargetRepr] = None,
                   lex: Optional[Lexicon] = None) -> List[Tuple[str, str]]:
    """(text, label) pairs with labels in ``representation``; examples stored in
    another representation are re-rendered from their prefix target."""
    pairs = []
    for ex in examples:
        if representation is None or TargetRepr(representation) == ex.target_repr:
            pairs.append((ex.text, ex.label))
            continue
        if TargetRepr(representation) == TargetRepr.CANONICAL and lex is None:
            raise ConfigError("canonical labels need a lexicon")
        pairs.append((ex.text, render_target(parse_prefix(ex.target), representation, lex)))
    return pairs


def train_lexical(
    corpus: Union[Corpus, Sequence[Example]],
    representation: Optional[TargetRepr] = None,
    lex: Optional[Lexicon] = None,
    **settings,
) -> LexicalModel:
    examples = corpus.examples if isinstance(corpus, Corpus) else list(corpus)
    if not examples:
        raise EmptyCorpus("cannot train on an empty corpus")
    if representation is None:
        representation = examples[0].target_repr
    seeds = [ex for ex in examples if ex.provenance != Provenance.PARAPHRASED]
    paraphrased = [ex for ex in examples if ex.provenance == Provenance.PARAPHRASED]
    if not seeds:
        seeds, paraphrased = examples, []
    model = LexicalModel(representation=representation, **settings)
    for text, label in training_pairs(seeds, representation, lex):
        model.observe(text, label)
    for text, label in training_pairs(paraphrased, representation, lex):
        model.observe_backoff(text, label)
    model.finalize()
    backoff = model.backoff
    logger.info(
        f"Trained lexical model on {model.n_examples} seed and {backoff.n_examples if backoff else 0} paraphrased examples: "
        f"{len(model.input_vocab)} input words, {len(model.output_vocab)} output tokens"
    )
    return model


if __name__ == "__main__":
    from services.decoder import Translator
    from models.output_trie import build_trie

    demo = [
        Example(text="go to the blue room", target="F B", label="F B", provenance="golden", source_id="g1"),
        Example(text="go to the red room", target="F R", label="F R", provenance="golden", source_id="g2"),
        Example(text="go to the red room and then the blue room", target="F & R F B", label="F & R F B",
                provenance="golden", source_id="g3"),
    ]
    try:
        model = train_lexical(demo)
        translator = Translator(model, build_trie(e.label for e in demo))
        for sentence in ("head to the red room", "visit the blue room", "red room and then blue room"):
            print(f"{sentence!r} -> {translator.translate(sentence)!r}")
    except LtlPipelineError as e:
        logger.error(json.dumps(e.to_dict()))

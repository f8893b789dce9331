# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import logging
import math
import re
from typing import Callable, Dict, List, Mapping, Optional, Protocol, Sequence, Tuple

from config import DECODER_DEFAULTS, LOG_LEVEL
from models.output_trie import EOS, OutputTrie, TrieNode

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)

SCORE_FLOOR = DECODER_DEFAULTS["score_floor"]

_WORD = re.compile(r"[a-z0-9_]+")


def tokenize_text(text: str) -> List[str]:
    """Lowercased word tokens of a natural-language command."""
    return _WORD.findall(text.lower())


class Scorer(Protocol):
    """Next-token scoring contract.

    ``score_next`` returns one log-score per candidate, either as a sequence
    aligned with ``candidates`` or as a token -> score mapping.
    """

    def score_next(self, input_tokens: Sequence[str], output_prefix: Sequence[str],
                   candidates: Sequence[str]) -> Sequence[float]:
        ...


def safe_scores(scorer: Scorer, input_tokens: Sequence[str], prefix: Sequence[str],
                candidates: Sequence[str]) -> List[float]:
    """Scorer output aligned with ``candidates``.

    Missing, non-numeric and non-finite scores become ``SCORE_FLOOR``; scores
    for tokens outside ``candidates`` are ignored.
    """
    raw = scorer.score_next(list(input_tokens), list(prefix), list(candidates))
    if isinstance(raw, Mapping):
        values = [raw.get(c) for c in candidates]
    else:
        raw = list(raw) if raw is not None else []
        values = [raw[i] if i < len(raw) else None for i in range(len(candidates))]
    out = []
    for v in values:
        try:
            v = float(v)
        except (TypeError, ValueError):
            v = SCORE_FLOOR
        out.append(v if math.isfinite(v) else SCORE_FLOOR)
    return out


# A decoding state machine: state -> ordered candidate tokens, (state, token) -> next state.
Candidates = Callable[[object, int], List[str]]
Advance = Callable[[object, str], object]


def _pick(scores: List[float]) -> int:
    """Index of the best score; earliest candidate wins ties."""
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def _greedy(input_tokens, scorer, start, candidates: Candidates, advance: Advance) -> Tuple[List[str], float]:
    state, prefix, total = start, [], 0.0
    while True:
        cands = candidates(state, len(prefix))
        if not cands:
            return prefix, total
        scores = safe_scores(scorer, input_tokens, prefix, cands)
        i = _pick(scores)
        total += scores[i]
        if cands[i] == EOS:
            return prefix, total
        prefix = prefix + [cands[i]]
        state = advance(state, cands[i])


def _beam(input_tokens, scorer, start, candidates: Candidates, advance: Advance,
          width: int) -> List[Tuple[float, List[str]]]:
    """Finished hypotheses as (score, tokens), best first."""
    beams: List[Tuple[float, List[str], object]] = [(0.0, [], start)]
    finished: List[Tuple[float, List[str]]] = []
    while beams:
        expansions: List[Tuple[float, List[str], object]] = []
        for score, prefix, state in beams:
            cands = candidates(state, len(prefix))
            if not cands:
                finished.append((score, prefix))
                continue
            for tok, s in zip(cands, safe_scores(scorer, input_tokens, prefix, cands)):
                if tok == EOS:
                    finished.append((score + s, prefix))
                else:
                    expansions.append((score + s, prefix + [tok], advance(state, tok)))
        expansions.sort(key=lambda h: (-h[0], h[1]))
        beams = expansions[:width]
    finished.sort(key=lambda h: (-h[0], h[1]))
    return finished


def _trie_candidates(node: TrieNode, _: int) -> List[str]:
    return node.candidates()


def _trie_advance(node: TrieNode, tok: str) -> TrieNode:
    return node.children[tok]


def constrained_search(input_text: str, scorer: Scorer, trie: OutputTrie,
                       beam: int = 1) -> Tuple[str, float]:
    """Best trie-legal output and its summed score.

    Beam search keeps the greedy path as a fallback, so a wider beam never
    returns a lower-scoring output than greedy.
    """
    if beam < 1:
        raise ValueError("beam must be >= 1")
    tokens = tokenize_text(input_text)
    greedy, greedy_score = _greedy(tokens, scorer, trie.root, _trie_candidates, _trie_advance)
    if beam == 1:
        return " ".join(greedy), greedy_score
    finished = _beam(tokens, scorer, trie.root, _trie_candidates, _trie_advance, beam)
    if finished and finished[0][0] > greedy_score:
        return " ".join(finished[0][1]), finished[0][0]
    return " ".join(greedy), greedy_score


def constrained_decode(input_text: str, scorer: Scorer, trie: OutputTrie, beam: int = 1) -> str:
    return constrained_search(input_text, scorer, trie, beam)[0]


def decode_nbest(input_text: str, scorer: Scorer, trie: OutputTrie, beam: int = 5,
                 k: int = 5) -> List[Tuple[str, float]]:
    """Top-``k`` distinct trie-legal outputs with their summed scores."""
    if k < 1:
        raise ValueError("k must be >= 1")
    tokens = tokenize_text(input_text)
    greedy, greedy_score = _greedy(tokens, scorer, trie.root, _trie_candidates, _trie_advance)
    pool = _beam(tokens, scorer, trie.root, _trie_candidates, _trie_advance, max(beam, k)) + [(greedy_score, greedy)]
    pool.sort(key=lambda h: (-h[0], h[1]))
    out: List[Tuple[str, float]] = []
    seen = set()
    for score, toks in pool:
        text = " ".join(toks)
        if text in seen:
            continue
        seen.add(text)
        out.append((text, score))
        if len(out) == k:
            break
    return out


def unconstrained_decode(input_text: str, scorer: Scorer, vocab: Sequence[str],
                         max_len: Optional[int] = None, beam: int = 1) -> str:
    """Decode over the full output vocabulary plus end-of-sequence; the result
    need not be a valid formula."""
    if max_len is None:
        max_len = DECODER_DEFAULTS["max_len"]
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ordered = [EOS] + sorted(set(vocab) - {EOS})

    def candidates(_state, length: int) -> List[str]:
        return [EOS] if length >= max_len else ordered

    def advance(state, _tok):
        return state

    tokens = tokenize_text(input_text)
    greedy, greedy_score = _greedy(tokens, scorer, None, candidates, advance)
    if beam > 1:
        finished = _beam(tokens, scorer, None, candidates, advance, beam)
        if finished and finished[0][0] > greedy_score:
            return " ".join(finished[0][1])
    return " ".join(greedy)


class UniformScorer:
    """Every candidate scores 0."""

    def score_next(self, input_tokens, output_prefix, candidates):
        return [0.0] * len(candidates)


class OracleScorer:
    """One-hot scorer that follows a known input -> target mapping."""

    def __init__(self, mapping: Dict[str, str], default: Optional[str] = None, miss_score: float = -1e6):
        self.targets = {" ".join(tokenize_text(text)): target.split() for text, target in mapping.items()}
        self.default = default.split() if default else None
        self.miss_score = miss_score

    @classmethod
    def for_target(cls, target: str) -> "OracleScorer":
        """Oracle that pushes every input toward ``target``."""
        return cls({}, default=target)

    def score_next(self, input_tokens, output_prefix, candidates):
        target = self.targets.get(" ".join(input_tokens), self.default)
        if target is None:
            return [0.0] * len(candidates)
        n = len(output_prefix)
        wanted = target[n] if n < len(target) and list(output_prefix) == target[:n] else EOS
        return [0.0 if c == wanted else self.miss_score for c in candidates]


class Translator:
    """Scorer plus decoding settings: constrained over a trie or, for the
    ablation, unconstrained over a vocabulary."""

    def __init__(self, scorer: Scorer, trie: Optional[OutputTrie] = None, vocab: Optional[Sequence[str]] = None,
                 beam: int = 1, constrained: bool = True, max_len: Optional[int] = None):
        if constrained and trie is None:
            raise ValueError("constrained decoding needs an output trie")
        if not constrained and not vocab:
            vocab = trie.vocabulary() if trie is not None else None
            if not vocab:
                raise ValueError("unconstrained decoding needs an output vocabulary")
        self.scorer = scorer
        self.trie = trie
        self.vocab = list(vocab or [])
        self.beam = beam
        self.constrained = constrained
        self.max_len = max_len or DECODER_DEFAULTS["max_len"]

    def translate(self, text: str) -> str:
        if self.constrained:
            return constrained_decode(text, self.scorer, self.trie, self.beam)
        return unconstrained_decode(text, self.scorer, self.vocab, self.max_len, self.beam)

    def translate_nbest(self, text: str, k: int) -> List[Tuple[str, float]]:
        if not self.constrained:
            return [(self.translate(text), 0.0)]
        return decode_nbest(text, self.scorer, self.trie, max(self.beam, k), k)

# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import asyncio
import json
import logging
import math
import re
import time
from typing import Any, Dict, List, Optional, Sequence

import httpx
from cachetools import LRUCache

from config import LOG_LEVEL, PARAPHRASE_CONFIG
from knowledge.paraphrase_synonyms import PHRASE_SYNONYMS
from models.errors import ConfigError, MalformedServiceResponse, ServiceUnavailable
from prompts.paraphrase_prompts import build_paraphrase_prompt

# Configure basic logging for this module
logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)

_NUMBERED_LINE = re.compile(r"^\s*(\d+)\.\s*(.*?)\s*$")


def normalize_sentence(text: str) -> str:
    return " ".join(text.lower().split())


def parse_numbered_list(completion: str, source: str, n: int) -> List[str]:
    """Outputs of a "1. ... / 2. ..." completion.

    Lines without ``k.`` numbering, empty items, duplicates and restatements
    of the source (after whitespace/case normalization) are dropped.
    """
    seen = {normalize_sentence(source)}
    out: List[str] = []
    for line in completion.splitlines():
        m = _NUMBERED_LINE.match(line)
        if not m:
            continue
        text = m.group(2).strip()
        key = normalize_sentence(text)
        if not key or key in seen:
            continue
        seen.add(key)
        out.append(text)
        if len(out) == n:
            break
    return out


class ParaphraseService:
    """Client for an operator-configured text-completion endpoint.

    Accepts both completion-style (``choices[0].text``) and chat-style
    (``choices[0].message.content``) response bodies.
    """

    backend = "service"

    def __init__(
        self,
        endpoint: Optional[str] = None,
        model: Optional[str] = None,
        api_key: Optional[str] = None,
        max_attempts: Optional[int] = None,
        backoff_base_s: Optional[float] = None,
        timeout_s: Optional[float] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        self.endpoint = endpoint or PARAPHRASE_CONFIG.get("endpoint")
        if not self.endpoint:
            raise ConfigError("paraphrase endpoint not configured (set LTL_PARAPHRASE_ENDPOINT or use the fallback backend)")
        self.model = model or PARAPHRASE_CONFIG.get("model")
        self.api_key = api_key if api_key is not None else PARAPHRASE_CONFIG.get("api_key")
        self.max_attempts = max_attempts or PARAPHRASE_CONFIG.get("max_attempts", 3)
        self.backoff_base_s = PARAPHRASE_CONFIG.get("backoff_base_s", 1.0) if backoff_base_s is None else backoff_base_s
        self.timeout_s = timeout_s or PARAPHRASE_CONFIG.get("timeout_s", 60.0)
        self.transport = transport
        self.cache: LRUCache = LRUCache(maxsize=PARAPHRASE_CONFIG.get("cache_size", 4096))
        self.call_stats = {"attempts": 0, "success": 0, "errors": 0, "total_time_s": 0.0}
        logger.info(f"Initializing ParaphraseService endpoint={self.endpoint} model={self.model} max_attempts={self.max_attempts}")

    def settings(self) -> Dict[str, Any]:
        return {"backend": self.backend, "endpoint": self.endpoint, "model": self.model}

    def _payload(self, prompt: str) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "model": self.model,
            "temperature": PARAPHRASE_CONFIG.get("temperature", 0.7),
            "max_tokens": PARAPHRASE_CONFIG.get("max_tokens", 512),
        }
        if self.endpoint.rstrip("/").endswith("chat/completions"):
            payload["messages"] = [{"role": "user", "content": prompt}]
        else:
            payload["prompt"] = prompt
        return payload

    @staticmethod
    def _completion_text(body: Any) -> str:
        try:
            choice = body["choices"][0]
            text = choice.get("text")
            if text is None:
                text = choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise MalformedServiceResponse(f"unexpected response structure: {e}", {"body": str(body)[:500]})
        if not isinstance(text, str):
            raise MalformedServiceResponse("completion text is not a string", {"body": str(body)[:500]})
        return text

    async def _request(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        async with httpx.AsyncClient(transport=self.transport, timeout=self.timeout_s) as client:
            response = await client.post(self.endpoint, headers=headers, json=self._payload(prompt))
            response.raise_for_status()
            try:
                body = response.json()
            except json.JSONDecodeError as e:
                raise MalformedServiceResponse(f"response is not JSON: {e}", {"body": response.text[:500]})
        return self._completion_text(body)

    async def paraphrase(self, sentence: str, n: int) -> List[str]:
        if n < 1:
            raise ValueError("n must be >= 1")
        key = (sentence, n)
        if key in self.cache:
            return list(self.cache[key])

        prompt = build_paraphrase_prompt(sentence, n)
        self.call_stats["attempts"] += 1
        start_time = time.perf_counter()
        last_error: Optional[Exception] = None

        for attempt in range(self.max_attempts):
            logger.debug(f"Paraphrase call ({attempt + 1}/{self.max_attempts}) for {sentence[:60]!r}")
            try:
                completion = await self._request(prompt)
                outputs = parse_numbered_list(completion, sentence, n)
                if not outputs:
                    raise MalformedServiceResponse("no numbered outputs in completion", {"completion": completion[:500]})
                self.call_stats["success"] += 1
                self.call_stats["total_time_s"] += time.perf_counter() - start_time
                self.cache[key] = list(outputs)
                return outputs
            except httpx.HTTPStatusError as e:
                status = e.response.status_code
                logger.error(f"HTTP error from paraphrase service: {status} - {e.response.text[:200]}")
                last_error = ServiceUnavailable(f"HTTP {status}", {"status_code": status})
                if not (500 <= status < 600) and status != 429:
                    break
            except httpx.TimeoutException as e:
                logger.error(f"Timeout calling paraphrase service: {e}")
                last_error = ServiceUnavailable(f"timeout: {e}")
            except httpx.RequestError as e:
                logger.error(f"Request error calling paraphrase service: {e}")
                last_error = ServiceUnavailable(f"request error: {e}")
            except MalformedServiceResponse as e:
                logger.error(f"Malformed paraphrase response: {e.message}")
                last_error = e

            if attempt < self.max_attempts - 1:
                delay = self.backoff_base_s * (2 ** attempt)
                logger.info(f"Waiting {delay:.2f}s before retrying paraphrase service...")
                await asyncio.sleep(delay)
            else:
                logger.warning("Max attempts reached for paraphrase service.")

        self.call_stats["errors"] += 1
        self.call_stats["total_time_s"] += time.perf_counter() - start_time
        raise last_error or ServiceUnavailable("paraphrase service failed")

    def get_call_statistics(self) -> Dict[str, Any]:
        return dict(self.call_stats)

    def log_call_statistics(self) -> None:
        stats = self.call_stats
        avg_time = (stats["total_time_s"] / stats["success"]) if stats["success"] > 0 else 0
        logger.info(f"Paraphrase calls: Attempts={stats['attempts']}, Success={stats['success']}, Errors={stats['errors']}, "
                    f"TotalTime={stats['total_time_s']:.2f}s, AvgTimePerSuccess={avg_time:.2f}s")


class FallbackParaphraser:
    """Offline paraphraser: phrase substitution from a shipped synonym table.

    Variant ``k`` rewrites every matched phrase ``p`` with alternative
    ``(k + seed) mod len(alternatives(p))``. Sentences built from the same
    template therefore receive the same rewrites, so a substituted word never
    becomes evidence for one formula over a sibling formula. Output depends
    only on the table, the seed and the input sentence.
    """

    backend = "fallback"

    def __init__(self, seed: int = 0, synonyms: Optional[Dict[str, Sequence[str]]] = None):
        self.seed = seed
        table = PHRASE_SYNONYMS if synonyms is None else synonyms
        self.synonyms = {tuple(k.split()): list(v) for k, v in table.items() if v}
        self._longest = max((len(k) for k in self.synonyms), default=1)

    def settings(self) -> Dict[str, Any]:
        return {"backend": self.backend, "seed": self.seed}

    def _phrases(self, words: List[str]) -> List[Any]:
        """Split ``words`` into plain words and matched phrase keys, longest match first."""
        out: List[Any] = []
        i = 0
        while i < len(words):
            for size in range(min(self._longest, len(words) - i), 0, -1):
                key = tuple(words[i:i + size])
                if key in self.synonyms:
                    out.append(key)
                    i += size
                    break
            else:
                out.append(words[i])
                i += 1
        return out

    def _variant(self, pieces: List[Any], k: int) -> str:
        words: List[str] = []
        for piece in pieces:
            if isinstance(piece, tuple):
                options = self.synonyms[piece]
                words.extend(options[(k + self.seed) % len(options)].split())
            else:
                words.append(piece)
        return " ".join(words).replace(" , ", ", ")

    def paraphrase_sync(self, sentence: str, n: int) -> List[str]:
        if n < 1:
            raise ValueError("n must be >= 1")
        text = normalize_sentence(sentence).rstrip(".!").strip()
        pieces = self._phrases(text.replace(",", " , ").split())
        sizes = [len(self.synonyms[p]) for p in pieces if isinstance(p, tuple)]
        if not sizes:
            return []
        period = math.lcm(*sizes)
        seen = {normalize_sentence(text)}
        out: List[str] = []
        for k in range(min(n, period)):
            candidate = self._variant(pieces, k)
            key = normalize_sentence(candidate)
            if key and key not in seen:
                seen.add(key)
                out.append(candidate)
        return out

    async def paraphrase(self, sentence: str, n: int) -> List[str]:
        return self.paraphrase_sync(sentence, n)

    def log_call_statistics(self) -> None:
        logger.info("Fallback paraphraser makes no service calls.")


async def paraphrase(sentence: str, n: int, svc) -> List[str]:
    """Up to ``n`` paraphrases of ``sentence`` from ``svc`` (service or fallback)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return await svc.paraphrase(sentence, n)


def make_paraphraser(backend: str, seed: int = 0, **kwargs):
    if backend == "fallback":
        return FallbackParaphraser(seed=seed)
    if backend == "service":
        return ParaphraseService(**kwargs)
    raise ConfigError(f"unknown paraphrase backend {backend!r}")


if __name__ == "__main__":
    source = "Go to the blue room or go to the red room to finally go to the yellow room."
    for line in FallbackParaphraser(seed=0).paraphrase_sync(source, 10):
        print(line)

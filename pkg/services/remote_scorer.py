# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import json
import logging
import time
from typing import Any, Dict, Optional, Sequence

import httpx

from config import LOG_LEVEL, SCORER_CONFIG
from models.errors import ConfigError, MalformedServiceResponse, ServiceUnavailable

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)


class RemoteScorer:
    """Next-token scorer backed by an operator-supplied HTTP endpoint.

    Request body: ``{"input": [...], "prefix": [...], "candidates": [...]}``.
    Response body: ``{"scores": [...]}`` aligned with the candidates, or
    ``{"scores": {token: score}}``. Score sanitation (missing or non-finite
    values) is left to the decoder.
    """

    def __init__(
        self,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        timeout_s: Optional[float] = None,
        max_attempts: Optional[int] = None,
        backoff_base_s: Optional[float] = None,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint or SCORER_CONFIG.get("endpoint")
        if not self.endpoint:
            raise ConfigError("remote scorer endpoint not configured (set LTL_SCORER_ENDPOINT)")
        self.api_key = api_key if api_key is not None else SCORER_CONFIG.get("api_key")
        self.timeout_s = timeout_s or SCORER_CONFIG.get("timeout_s", 30.0)
        self.max_attempts = max_attempts or SCORER_CONFIG.get("max_attempts", 3)
        self.backoff_base_s = SCORER_CONFIG.get("backoff_base_s", 0.5) if backoff_base_s is None else backoff_base_s
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        self.client = httpx.Client(transport=transport, timeout=self.timeout_s, headers=headers)
        self.call_stats = {"attempts": 0, "success": 0, "errors": 0, "total_time_s": 0.0}
        logger.info(f"Initializing RemoteScorer endpoint={self.endpoint} max_attempts={self.max_attempts}")

    def close(self) -> None:
        self.client.close()

    def __enter__(self) -> "RemoteScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @staticmethod
    def _scores(body: Any, candidates: Sequence[str]):
        if not isinstance(body, dict) or "scores" not in body:
            raise MalformedServiceResponse("response has no 'scores' field", {"body": str(body)[:500]})
        scores = body["scores"]
        if isinstance(scores, dict):
            return scores
        if isinstance(scores, list):
            if len(scores) != len(candidates):
                logger.warning(f"Scorer returned {len(scores)} scores for {len(candidates)} candidates")
            return scores
        raise MalformedServiceResponse("'scores' must be a list or an object", {"body": str(body)[:500]})

    def score_next(self, input_tokens: Sequence[str], output_prefix: Sequence[str],
                   candidates: Sequence[str]):
        payload = {"input": list(input_tokens), "prefix": list(output_prefix), "candidates": list(candidates)}
        self.call_stats["attempts"] += 1
        start_time = time.perf_counter()
        last_error: Optional[Exception] = None

        for attempt in range(self.max_attempts):
            try:
                response = self.client.post(self.endpoint, json=payload)
                response.raise_for_status()
                try:
                    body = response.json()
                except json.JSONDecodeError as e:
                    raise MalformedServiceResponse(f"response is not JSON: {e}", {"body": response.text[:500]})
                scores = self._scores(body, candidates)
                self.call_stats["success"] += 1
                self.call_stats["total_time_s"] += time.perf_counter() - start_time
                return scores
            except httpx.HTTPStatusError as e:
                status = e.response.status_code
                logger.error(f"HTTP error from scorer: {status} - {e.response.text[:200]}")
                last_error = ServiceUnavailable(f"HTTP {status}", {"status_code": status})
                if not (500 <= status < 600) and status != 429:
                    break
            except httpx.TimeoutException as e:
                logger.error(f"Timeout calling scorer: {e}")
                last_error = ServiceUnavailable(f"timeout: {e}")
            except httpx.RequestError as e:
                logger.error(f"Request error calling scorer: {e}")
                last_error = ServiceUnavailable(f"request error: {e}")
            except MalformedServiceResponse as e:
                logger.error(f"Malformed scorer response: {e.message}")
                last_error = e

            if attempt < self.max_attempts - 1:
                delay = self.backoff_base_s * (2 ** attempt)
                logger.info(f"Waiting {delay:.2f}s before retrying scorer...")
                time.sleep(delay)

        self.call_stats["errors"] += 1
        self.call_stats["total_time_s"] += time.perf_counter() - start_time
        raise last_error or ServiceUnavailable("scorer failed")

    def get_call_statistics(self) -> Dict[str, Any]:
        return dict(self.call_stats)


if __name__ == "__main__":
    try:
        with RemoteScorer() as scorer:
            print(scorer.score_next(["go", "to", "the", "blue", "room"], [], ["F", "G", "&"]))
    except (ConfigError, ServiceUnavailable, MalformedServiceResponse) as e:
        logger.error(json.dumps(e.to_dict()))

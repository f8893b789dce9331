import json
import sys
import unittest
from pathlib import Path

# Add project root to sys.path
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

import httpx

from models.errors import ConfigError, MalformedServiceResponse, ServiceUnavailable
from models.output_trie import build_trie
from services.decoder import constrained_decode
from services.remote_scorer import RemoteScorer

ENDPOINT = "http://scorer.test/next"


def scorer_with(handler, **kwargs):
    kwargs.setdefault("max_attempts", 3)
    return RemoteScorer(endpoint=ENDPOINT, api_key="", backoff_base_s=0, transport=httpx.MockTransport(handler), **kwargs)


class TestRemoteScorer(unittest.TestCase):

    def test_list_scores(self):
        print("\n--- TestRemoteScorer: test_list_scores ---")
        seen = []

        def handler(request):
            body = json.loads(request.content)
            seen.append(body)
            return httpx.Response(200, json={"scores": [-0.1 * (i + 1) for i in range(len(body["candidates"]))]})

        with scorer_with(handler) as scorer:
            scores = scorer.score_next(["go", "to", "b"], ["F"], ["B", "R"])
            self.assertEqual(scores, [-0.1, -0.2])
            self.assertEqual(seen[0], {"input": ["go", "to", "b"], "prefix": ["F"], "candidates": ["B", "R"]})
            self.assertEqual(scorer.get_call_statistics()["success"], 1)

    def test_dict_scores_drive_decoding(self):
        preferred = {"": "F", "F": "R"}

        def handler(request):
            body = json.loads(request.content)
            want = preferred.get(" ".join(body["prefix"]), "</s>")
            return httpx.Response(200, json={"scores": {tok: (0.0 if tok == want else -5.0) for tok in body["candidates"]}})

        trie = build_trie(["F B", "F R", "G B"])
        with scorer_with(handler) as scorer:
            self.assertEqual(constrained_decode("go to the red room", scorer, trie), "F R")

    def test_retries_then_succeeds(self):
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) == 1:
                return httpx.Response(429, text="slow down")
            return httpx.Response(200, json={"scores": [0.0]})

        with scorer_with(handler) as scorer:
            self.assertEqual(scorer.score_next([], [], ["F"]), [0.0])
        self.assertEqual(len(calls), 2)

    def test_server_errors_exhaust_attempts(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(500, text="boom")

        with scorer_with(handler) as scorer:
            with self.assertRaises(ServiceUnavailable):
                scorer.score_next([], [], ["F"])
            self.assertEqual(scorer.get_call_statistics()["errors"], 1)
        self.assertEqual(len(calls), 3)

    def test_client_error_not_retried(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(404, text="no such model")

        with scorer_with(handler) as scorer:
            with self.assertRaises(ServiceUnavailable):
                scorer.score_next([], [], ["F"])
        self.assertEqual(len(calls), 1)

    def test_malformed_bodies(self):
        with scorer_with(lambda request: httpx.Response(200, json={"logits": []}), max_attempts=1) as scorer:
            with self.assertRaises(MalformedServiceResponse):
                scorer.score_next([], [], ["F"])
        with scorer_with(lambda request: httpx.Response(200, text="not json"), max_attempts=1) as scorer:
            with self.assertRaises(MalformedServiceResponse):
                scorer.score_next([], [], ["F"])
        with scorer_with(lambda request: httpx.Response(200, json={"scores": 3}), max_attempts=1) as scorer:
            with self.assertRaises(MalformedServiceResponse):
                scorer.score_next([], [], ["F"])

    def test_missing_endpoint(self):
        with self.assertRaises(ConfigError):
            RemoteScorer(endpoint="", api_key="")


if __name__ == '__main__':
    unittest.main()

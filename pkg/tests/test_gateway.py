import threading
import time

import numpy as np
import pytest
import requests

from casecontext.api.client import ChatApiClient
from casecontext.api.gateway import Gateway
from casecontext.api.mock import MockBackend
from casecontext.api.models import ChatRequest, DecodeParams, EmbeddingRequest
from casecontext.errors import GatewayError, TranscriptMissError


class FakeResponse:

    def __init__(self, status_code, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        return self._payload

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"{self.status_code} error")


class FakeSession:
    """
    Replays queued responses (or exceptions) and records every call.
    """

    def __init__(self, responses):
        self.headers = {}
        self.responses = list(responses)
        self.calls = []

    def post(self, url, json=None, timeout=None):
        self.calls.append((url, json))
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


class CountingBackend:
    chat_model = "counting"
    embedding_model = "counting-embed"

    def __init__(self, delay=0.0, dim=4):
        self.calls = 0
        self.delay = delay
        self.dim = dim
        self._lock = threading.Lock()

    def chat(self, request):
        with self._lock:
            self.calls += 1
        time.sleep(self.delay)
        return f"answer to {request.user_prompt}"

    def embed(self, texts):
        with self._lock:
            self.calls += 1
        return [[float(len(t))] * self.dim for t in texts]


class ExplodingBackend(CountingBackend):

    def chat(self, request):
        raise AssertionError("backend called in replay mode")

    def embed(self, texts):
        raise AssertionError("backend called in replay mode")


def _chat_payload(content):
    return {"choices": [{"message": {"content": content}}]}


class TestRequests:

    def test_cache_key_covers_decode_params_and_model(self):
        a = ChatRequest("sys", "user")
        b = ChatRequest("sys", "user", DecodeParams(temperature=0.7))
        assert a.cache_key("m") == ChatRequest("sys", "user").cache_key("m")
        assert a.cache_key("m") != b.cache_key("m")
        assert a.cache_key("m") != a.cache_key("other")

    def test_validation(self):
        with pytest.raises(GatewayError):
            ChatRequest("sys", "")
        with pytest.raises(GatewayError):
            DecodeParams(temperature=-1)
        with pytest.raises(GatewayError):
            EmbeddingRequest([], "m")


class TestMockBackend:

    def test_deterministic_summary(self):
        backend = MockBackend(seed=0, dim=16, summary_words=3)
        request = ChatRequest("", "Summarize in 50 words: The refugee claimant sought the refugee protection.")
        assert backend.chat(request) == backend.chat(request)
        assert backend.chat(request).split()[1:] == ["refugee", "claimant", "sought"]

    def test_embedding_dimension(self):
        vectors = MockBackend(dim=32).embed(["a case", "another case"])
        assert [len(v) for v in vectors] == [32, 32]


class TestGateway:

    def test_cache_hits_skip_backend(self):
        backend = CountingBackend()
        gateway = Gateway(backend)
        request = ChatRequest("", "hello")
        assert gateway.chat_complete(request) == gateway.chat_complete(request) == "answer to hello"
        assert backend.calls == 1
        assert gateway.upstream_calls == 1

    def test_concurrent_identical_requests_share_one_call(self):
        backend = CountingBackend(delay=0.05)
        gateway = Gateway(backend, max_in_flight=8)
        answers = gateway.chat_many([ChatRequest("", "same")] * 8)
        assert answers == ["answer to same"] * 8
        assert backend.calls == 1

    def test_per_key_locks_released(self, tmp_path):
        gateway = Gateway(CountingBackend(delay=0.01), max_in_flight=4)
        prompts = [f"p{i % 20}" for i in range(60)]
        gateway.chat_many([ChatRequest("", p) for p in prompts])
        gateway.embed(EmbeddingRequest(["one", "two"], "counting-embed"))
        assert gateway._key_locks == {}

        transcript = tmp_path / "transcript.jsonl"
        transcript.write_text("", encoding="utf-8")
        replayer = Gateway(ExplodingBackend(), mode="replay", transcript_path=transcript)
        with pytest.raises(TranscriptMissError):
            replayer.chat_complete(ChatRequest("s", "never recorded"))
        assert replayer._key_locks == {}

    def test_chat_many_preserves_order(self):
        gateway = Gateway(CountingBackend(), max_in_flight=3)
        prompts = [f"p{i}" for i in range(10)]
        assert gateway.chat_many([ChatRequest("", p) for p in prompts]) == [f"answer to {p}" for p in prompts]

    def test_record_then_replay(self, tmp_path):
        transcript = tmp_path / "transcript.jsonl"
        recorder = Gateway(CountingBackend(), mode="record", transcript_path=transcript)
        chat = recorder.chat_complete(ChatRequest("s", "recorded"))
        vectors = recorder.embed(EmbeddingRequest(["one", "three"], "counting-embed"))
        assert len(transcript.read_text(encoding="utf-8").splitlines()) == 3

        replayer = Gateway(ExplodingBackend(), mode="replay", transcript_path=transcript)
        assert replayer.chat_complete(ChatRequest("s", "recorded")) == chat
        replayed = replayer.embed(EmbeddingRequest(["three", "one"], "counting-embed"))
        np.testing.assert_array_equal(replayed[0], vectors[1])
        with pytest.raises(TranscriptMissError):
            replayer.chat_complete(ChatRequest("s", "never recorded"))
        assert replayer.upstream_calls == 0

    def test_replay_needs_transcript(self, tmp_path):
        with pytest.raises(GatewayError, match="transcript file not found"):
            Gateway(CountingBackend(), mode="replay", transcript_path=tmp_path / "missing.jsonl")
        with pytest.raises(GatewayError, match="needs a transcript path"):
            Gateway(CountingBackend(), mode="record")
        with pytest.raises(GatewayError, match="unknown gateway mode"):
            Gateway(CountingBackend(), mode="offline")

    def test_embed_deduplicates_texts(self):
        backend = CountingBackend(dim=3)
        gateway = Gateway(backend)
        vectors = gateway.embed(EmbeddingRequest(["ab", "abc", "ab"], "counting-embed"))
        np.testing.assert_array_equal(vectors[0], vectors[2])
        assert vectors[1].dtype == np.float64
        gateway.embed(EmbeddingRequest(["abc"], "counting-embed"))
        assert backend.calls == 1

    def test_mixed_dimensions_rejected(self):
        class Ragged(CountingBackend):
            def embed(self, texts):
                return [[1.0] * (i + 2) for i, _ in enumerate(texts)]

        with pytest.raises(GatewayError, match="mixed embedding dimensions"):
            Gateway(Ragged()).embed(EmbeddingRequest(["a", "b"], "m"))


class TestChatApiClient:

    def _client(self, responses, **kwargs):
        session = FakeSession(responses)
        delays = []
        client = ChatApiClient(
            base_url="http://backend.test/", api_token="secret", session=session, sleep=delays.append, **kwargs
        )
        return client, session, delays

    def test_chat_payload_and_auth(self):
        client, session, _ = self._client([FakeResponse(200, _chat_payload("ok"))])
        assert client.chat(ChatRequest("sys", "user", DecodeParams(0.0, 64))) == "ok"
        url, payload = session.calls[0]
        assert url == "http://backend.test/v1/chat/completions"
        assert payload["messages"] == [{"role": "system", "content": "sys"}, {"role": "user", "content": "user"}]
        assert payload["max_tokens"] == 64
        assert session.headers["Authorization"] == "Bearer secret"

    def test_transient_failures_are_retried_with_backoff(self):
        client, session, delays = self._client([
            FakeResponse(503),
            requests.ConnectionError("reset"),
            FakeResponse(200, _chat_payload("finally")),
        ], backoff_seconds=0.5)
        assert client.chat(ChatRequest("", "hi")) == "finally"
        assert delays == [0.5, 1.0]
        assert len(session.calls) == 3

    def test_retries_exhausted(self):
        client, _, _ = self._client([FakeResponse(429)] * 3, max_retries=2)
        with pytest.raises(GatewayError, match="retries exhausted after 3 attempts") as info:
            client.chat(ChatRequest("", "hi"))
        assert info.value.status == 429

    def test_client_errors_are_not_retried(self):
        client, session, _ = self._client([FakeResponse(401, text="bad token")])
        with pytest.raises(GatewayError, match="bad token"):
            client.chat(ChatRequest("", "hi"))
        assert len(session.calls) == 1

    def test_error_payload(self):
        client, _, _ = self._client([FakeResponse(200, {"error": "quota"})])
        with pytest.raises(GatewayError, match="quota"):
            client.chat(ChatRequest("", "hi"))

    def test_embeddings_sorted_by_index(self):
        payload = {"data": [{"index": 1, "embedding": [0, 1]}, {"index": 0, "embedding": [1, 0]}]}
        client, _, _ = self._client([FakeResponse(200, payload)])
        assert client.embed(["first", "second"]) == [[1.0, 0.0], [0.0, 1.0]]

    def test_embedding_count_mismatch(self):
        client, _, _ = self._client([FakeResponse(200, {"data": [{"index": 0, "embedding": [1]}]})])
        with pytest.raises(GatewayError, match="expected 2 embeddings"):
            client.embed(["a", "b"])

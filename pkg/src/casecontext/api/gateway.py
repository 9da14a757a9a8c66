"""
Caching gateway in front of a chat/embedding backend.
"""
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Union

import numpy as np
from tqdm import tqdm

from casecontext.api.models import ChatRequest, EmbeddingRequest, TranscriptEntry, embedding_key
from casecontext.errors import GatewayError, TranscriptMissError
from casecontext.utils.helpers import read_jsonl

logger = logging.getLogger(__name__)

MODES = ("live", "record", "replay")


class Backend(Protocol):
    chat_model: str
    embedding_model: str

    def chat(self, request: ChatRequest) -> str: ...

    def embed(self, texts: List[str]) -> List[List[float]]: ...


class Gateway:
    """
    Uniform, cached access to a chat and embedding backend.

    Every response is cached in memory by request content hash. In
    ``record`` mode new responses are also appended to the transcript file;
    in ``replay`` mode the transcript is the only source and a miss raises
    ``TranscriptMissError``. Concurrent identical chat requests share one
    upstream call.
    """

    def __init__(
        self,
        backend: Backend,
        mode: str = "live",
        transcript_path: Optional[Union[str, Path]] = None,
        max_in_flight: int = 4
    ):
        """
        Initialize the gateway.

        Args:
            backend (Backend): Upstream backend; never called in replay mode.
            mode (str): ``live``, ``record`` or ``replay``.
            transcript_path (Optional[Union[str, Path]]): Transcript file; required
                for ``record`` and ``replay``.
            max_in_flight (int): Concurrent upstream requests in ``chat_many``.
        """
        if mode not in MODES:
            raise GatewayError(f"unknown gateway mode '{mode}'")
        if mode != "live" and transcript_path is None:
            raise GatewayError(f"gateway mode '{mode}' needs a transcript path")
        if max_in_flight < 1:
            raise GatewayError("max_in_flight must be at least 1")

        self.backend = backend
        self.mode = mode
        self.transcript_path = Path(transcript_path) if transcript_path else None
        self.max_in_flight = max_in_flight
        self.upstream_calls = 0

        self._cache: Dict[str, Any] = {}
        self._lock = threading.Lock()
        self._key_locks: Dict[str, threading.Lock] = {}
        self._embed_lock = threading.Lock()

        if self.transcript_path is not None and self.transcript_path.is_file():
            for record in read_jsonl(self.transcript_path):
                entry = TranscriptEntry.from_record(record)
                self._cache[entry.hash] = entry.response
            logger.info("Loaded %d transcript entries from %s", len(self._cache), self.transcript_path)
        elif mode == "replay":
            raise GatewayError(f"transcript file not found: {self.transcript_path}")

    @property
    def chat_model(self) -> str:
        return self.backend.chat_model

    @property
    def embedding_model(self) -> str:
        return self.backend.embedding_model

    def _append_transcript(self, entry: TranscriptEntry) -> None:
        self.transcript_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.transcript_path, "a", encoding="utf-8", newline="\n") as handle:
            handle.write(json.dumps(entry.to_record(), ensure_ascii=False))
            handle.write("\n")

    def _store(self, key: str, request: Dict[str, Any], value: Any) -> None:
        with self._lock:
            self._cache[key] = value
            if self.mode == "record":
                self._append_transcript(TranscriptEntry(key, request, value))

    def _single_flight(self, key: str, request: Dict[str, Any], compute: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._cache:
                logger.debug("Cache hit %s", key[:12])
                return self._cache[key]
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        try:
            with key_lock:
                with self._lock:
                    if key in self._cache:
                        return self._cache[key]
                if self.mode == "replay":
                    raise TranscriptMissError(key)
                logger.debug("Cache miss %s", key[:12])
                value = compute()
                with self._lock:
                    self.upstream_calls += 1
                self._store(key, request, value)
                return value
        finally:
            with self._lock:
                if self._key_locks.get(key) is key_lock:
                    del self._key_locks[key]

    def chat_complete(self, request: ChatRequest) -> str:
        """
        Complete a chat request through the cache.

        Args:
            request (ChatRequest): Prompts and decoding parameters.

        Returns:
            str: The completion text.
        """
        key = request.cache_key(self.chat_model)
        return self._single_flight(key, request.to_record(), lambda: self.backend.chat(request))

    def chat_many(self, requests: Sequence[ChatRequest], desc: str = "chat") -> List[str]:
        """
        Complete several chat requests concurrently, preserving order.

        Args:
            requests (Sequence[ChatRequest]): Requests in output order.
            desc (str): Progress bar label.

        Returns:
            List[str]: Completions aligned with ``requests``.
        """
        if not requests:
            return []
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            return list(tqdm(pool.map(self.chat_complete, requests), total=len(requests), desc=desc, disable=None))

    def embed(self, request: EmbeddingRequest) -> List[np.ndarray]:
        """
        Embed a batch of texts through the cache.

        Repeated texts are embedded once; missing texts go upstream in a
        single batch.

        Args:
            request (EmbeddingRequest): Texts and model tag.

        Returns:
            List[np.ndarray]: One float64 vector per text, order-aligned.
        """
        keys = [embedding_key(request.model_tag, text) for text in request.texts]
        with self._embed_lock:
            missing: Dict[str, str] = {}
            for key, text in zip(keys, request.texts):
                if key not in self._cache and key not in missing:
                    missing[key] = text
            if missing and self.mode == "replay":
                raise TranscriptMissError(next(iter(missing)))
            if missing:
                logger.debug("Embedding %d uncached texts", len(missing))
                vectors = self.backend.embed(list(missing.values()))
                with self._lock:
                    self.upstream_calls += 1
                for (key, text), vector in zip(missing.items(), vectors):
                    self._store(key, {"kind": "embedding", "model": request.model_tag, "chars": len(text)}, vector)

        result = [np.asarray(self._cache[key], dtype=np.float64) for key in keys]
        dims = {v.shape[0] for v in result}
        if len(dims) != 1:
            raise GatewayError(f"backend returned mixed embedding dimensions {sorted(dims)}")
        return result

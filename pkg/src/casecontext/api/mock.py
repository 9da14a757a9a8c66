"""
Deterministic stand-in backend for tests and desk-scale runs.
"""
import hashlib
import re
from functools import lru_cache
from typing import FrozenSet, List

from casecontext.api.models import ChatRequest
from casecontext.encoding.local_embed import local_embed
from casecontext.utils.helpers import canonical_json, load_resource_lines, word_tokens

_MOCK_TAG_RE = re.compile(r"\[mock:[0-9a-f]+\]")


@lru_cache(maxsize=1)
def english_stopwords() -> FrozenSet[str]:
    return frozenset(load_resource_lines("stopwords_en.txt"))


class MockBackend:
    """
    Backend whose outputs depend only on the request text and its seed.

    Chat completions are a tagged digest of the prompts followed by the
    first distinct content words of the user prompt after its first
    ``": "``. Embeddings are ``local_embed`` vectors.
    """

    def __init__(self, seed: int = 0, dim: int = 4096, summary_words: int = 40):
        self.seed = seed
        self.dim = dim
        self.summary_words = summary_words
        self.chat_model = "mock-chat"
        self.embedding_model = f"mock-embed-{dim}-{seed}"

    def chat(self, request: ChatRequest) -> str:
        digest = hashlib.sha256(
            canonical_json([request.system_prompt, request.user_prompt]).encode("utf-8")
        ).hexdigest()[:12]
        _, sep, body = request.user_prompt.partition(": ")
        text = _MOCK_TAG_RE.sub(" ", body if sep else request.user_prompt)

        stopwords = english_stopwords()
        words: List[str] = []
        seen = set()
        for word in word_tokens(text):
            if len(word) < 3 or word in stopwords or word in seen:
                continue
            seen.add(word)
            words.append(word)
            if len(words) == self.summary_words:
                break
        return " ".join([f"[mock:{digest}]"] + words)

    def embed(self, texts: List[str]) -> List[List[float]]:
        return [local_embed(text, self.dim, self.seed).tolist() for text in texts]

"""
Request and transcript models for the chat and embedding gateway.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List

from casecontext.errors import GatewayError
from casecontext.utils.helpers import content_hash


@dataclass(frozen=True)
class DecodeParams:
    """
    Decoding parameters sent with every chat request.
    """
    temperature: float = 0.0
    max_output_tokens: int = 256

    def __post_init__(self):
        if self.temperature < 0:
            raise GatewayError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_output_tokens < 1:
            raise GatewayError(f"max_output_tokens must be positive, got {self.max_output_tokens}")


@dataclass(frozen=True)
class ChatRequest:
    """
    A system/user prompt pair for chat completion.
    """
    system_prompt: str
    user_prompt: str
    decode_params: DecodeParams = field(default_factory=DecodeParams)

    def __post_init__(self):
        if not self.user_prompt:
            raise GatewayError("user_prompt must not be empty")

    def to_record(self) -> Dict[str, Any]:
        return {
            "kind": "chat",
            "system_prompt": self.system_prompt,
            "user_prompt": self.user_prompt,
            "temperature": self.decode_params.temperature,
            "max_output_tokens": self.decode_params.max_output_tokens,
        }

    def cache_key(self, model: str) -> str:
        """
        Content hash of the request and the model it is sent to.
        """
        return content_hash({**self.to_record(), "model": model})


@dataclass(frozen=True)
class EmbeddingRequest:
    """
    An ordered batch of texts to embed with one model.
    """
    texts: List[str]
    model_tag: str

    def __post_init__(self):
        if not self.texts:
            raise GatewayError("an embedding request needs at least one text")
        if any(not text for text in self.texts):
            raise GatewayError("embedding texts must be non-empty")


def embedding_key(model_tag: str, text: str) -> str:
    """
    Cache key of one embedded text.
    """
    return content_hash({"kind": "embedding", "model": model_tag, "text_hash": content_hash(text)})


@dataclass(frozen=True)
class TranscriptEntry:
    """
    One recorded backend response.
    """
    hash: str
    request: Dict[str, Any]
    response: Any

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'TranscriptEntry':
        return cls(hash=data['hash'], request=data.get('request', {}), response=data['response'])

    def to_record(self) -> Dict[str, Any]:
        return {"hash": self.hash, "request": self.request, "response": self.response}

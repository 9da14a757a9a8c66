"""
Embedding backends: the local hashing embedder and the gateway.
"""
import logging
from typing import TYPE_CHECKING, List, Optional, Protocol, Sequence

import numpy as np

from casecontext.api.models import EmbeddingRequest
from casecontext.encoding.local_embed import local_embed
from casecontext.errors import EncodingError

if TYPE_CHECKING:
    from casecontext.api.gateway import Gateway

logger = logging.getLogger(__name__)


class EmbeddingBackend(Protocol):
    tag: str

    @property
    def dimension(self) -> Optional[int]: ...

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray: ...


class LocalEmbeddingBackend:
    """
    In-process feature-hashing backend.
    """

    def __init__(self, dim: int = 4096, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.tag = f"local-{dim}-{seed}"

    @property
    def dimension(self) -> Optional[int]:
        return self.dim

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.vstack([local_embed(text, self.dim, self.seed) for text in texts])


class GatewayEmbeddingBackend:
    """
    Embeddings served through the caching gateway, in fixed-size batches.
    """

    def __init__(self, gateway: 'Gateway', batch_size: int = 16):
        self.gateway = gateway
        self.batch_size = batch_size
        self.tag = gateway.embedding_model
        self._dimension: Optional[int] = None

    @property
    def dimension(self) -> Optional[int]:
        return self._dimension

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        rows: List[np.ndarray] = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start:start + self.batch_size])
            rows.extend(self.gateway.embed(EmbeddingRequest(batch, self.tag)))
        if not rows:
            return np.zeros((0, self._dimension or 0))
        dims = {row.shape[0] for row in rows}
        if len(dims) != 1 or (self._dimension is not None and dims != {self._dimension}):
            raise EncodingError(f"embedding dimension changed across batches: {sorted(dims)}")
        self._dimension = dims.pop()
        return np.vstack(rows)

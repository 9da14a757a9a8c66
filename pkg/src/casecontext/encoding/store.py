"""
Case embeddings, the on-disk embedding store and case encoding.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from casecontext.encoding.adapter import Adapter
from casecontext.encoding.backends import EmbeddingBackend
from casecontext.encoding.context import ContextualisedCase
from casecontext.errors import EncodingError, MissingArtifactError
from casecontext.utils.helpers import read_json, write_json

logger = logging.getLogger(__name__)

SIMILARITY_KINDS = ("dot", "cosine")


@dataclass(frozen=True)
class CaseEmbedding:
    """
    The vector of one case and where it came from.
    """
    case_id: str
    vector: np.ndarray
    backend_tag: str
    adapter_version: Optional[str] = None
    normalized: bool = False


def _check_kind(similarity_kind: str) -> None:
    if similarity_kind not in SIMILARITY_KINDS:
        raise EncodingError(f"unknown similarity kind '{similarity_kind}'")


def finish_vectors(
    matrix: np.ndarray,
    ids: Sequence[str],
    adapter: Optional[Adapter],
    similarity_kind: str
) -> np.ndarray:
    """
    Apply the adapter (if any) and, under cosine, L2-normalize every row.

    Raises EncodingError naming the first case whose vector has zero norm
    under cosine.
    """
    _check_kind(similarity_kind)
    if adapter is not None:
        matrix = adapter.apply(matrix)
    if similarity_kind == "cosine":
        norms = np.linalg.norm(matrix, axis=1)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise EncodingError(f"case '{ids[zero[0]]}' has a zero vector and cannot be normalized")
        matrix = matrix / norms[:, None]
    return matrix


def encode_case(
    ctx: ContextualisedCase,
    backend: EmbeddingBackend,
    adapter: Optional[Adapter] = None,
    similarity_kind: str = "cosine"
) -> CaseEmbedding:
    """
    Embed one contextualised case.

    Args:
        ctx (ContextualisedCase): Rendered case.
        backend (EmbeddingBackend): Embedding backend.
        adapter (Optional[Adapter]): Adapter applied to the base vector.
        similarity_kind (str): ``dot`` or ``cosine``; cosine normalizes.

    Returns:
        CaseEmbedding: The case vector.
    """
    base = backend.embed_texts([ctx.embedding_text])
    vector = finish_vectors(base, [ctx.case_id], adapter, similarity_kind)[0]
    return CaseEmbedding(
        case_id=ctx.case_id,
        vector=vector,
        backend_tag=backend.tag,
        adapter_version=adapter.version if adapter else None,
        normalized=similarity_kind == "cosine"
    )


@dataclass(frozen=True)
class EmbeddingStore:
    """
    Row-aligned case ids and vectors produced under one setting.
    """
    ids: List[str]
    matrix: np.ndarray
    backend_tag: str
    template_id: str
    adapter_version: Optional[str] = None
    normalized: bool = False
    variant: str = "full"
    _rows: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.ids):
            raise EncodingError(f"store has {len(self.ids)} ids but matrix shape {self.matrix.shape}")
        rows = {case_id: i for i, case_id in enumerate(self.ids)}
        if len(rows) != len(self.ids):
            raise EncodingError("duplicate case ids in embedding store")
        object.__setattr__(self, "_rows", rows)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, case_id: object) -> bool:
        return case_id in self._rows

    def __len__(self) -> int:
        return len(self.ids)

    def vector(self, case_id: str) -> np.ndarray:
        if case_id not in self._rows:
            raise EncodingError(f"no embedding for case '{case_id}'")
        return self.matrix[self._rows[case_id]]

    def get(self, case_id: str) -> CaseEmbedding:
        return CaseEmbedding(case_id, self.vector(case_id), self.backend_tag, self.adapter_version, self.normalized)

    def rows(self, case_ids: Sequence[str]) -> np.ndarray:
        return np.array([self._rows[case_id] for case_id in case_ids], dtype=np.int64)

    def unnormalizable_ids(self) -> List[str]:
        """
        Ids whose vector has zero norm, such as text with no words under the
        local embedder. Cosine projection fails on any of them.
        """
        return [self.ids[i] for i in np.flatnonzero(np.linalg.norm(self.matrix, axis=1) == 0)]

    def metadata(self) -> Dict[str, Any]:
        return {
            "ids": list(self.ids),
            "backend_tag": self.backend_tag,
            "template_id": self.template_id,
            "adapter_version": self.adapter_version,
            "normalized": self.normalized,
            "variant": self.variant,
            "unnormalizable": self.unnormalizable_ids(),
            "dimension": self.dimension,
        }

    def project(self, adapter: Optional[Adapter], similarity_kind: str) -> 'EmbeddingStore':
        """
        A new store with the adapter applied and cosine normalization done.
        """
        return EmbeddingStore(
            ids=list(self.ids),
            matrix=finish_vectors(self.matrix, self.ids, adapter, similarity_kind),
            backend_tag=self.backend_tag,
            template_id=self.template_id,
            adapter_version=adapter.version if adapter else None,
            normalized=similarity_kind == "cosine",
            variant=self.variant
        )


def encode_contexts(contexts: Sequence[ContextualisedCase], backend: EmbeddingBackend) -> EmbeddingStore:
    """
    Embed contexts with the backend only; no adapter, no normalization.

    Args:
        contexts (Sequence[ContextualisedCase]): Rendered cases of one template.
        backend (EmbeddingBackend): Embedding backend.

    Returns:
        EmbeddingStore: Base vectors in context order.
    """
    template_ids = {ctx.template_id for ctx in contexts}
    if len(template_ids) > 1:
        raise EncodingError(f"contexts mix templates {sorted(template_ids)}")
    variants = {ctx.variant for ctx in contexts}
    if len(variants) > 1:
        raise EncodingError(f"contexts mix variants {sorted(variants)}")
    matrix = backend.embed_texts([ctx.embedding_text for ctx in contexts])
    logger.info("Encoded %d contexts with %s (dimension %d)", len(contexts), backend.tag, matrix.shape[1])
    store = EmbeddingStore(
        ids=[ctx.case_id for ctx in contexts],
        matrix=np.asarray(matrix, dtype=np.float64),
        backend_tag=backend.tag,
        template_id=template_ids.pop() if template_ids else "default",
        variant=variants.pop() if variants else "full"
    )
    unnormalizable = store.unnormalizable_ids()
    if unnormalizable:
        logger.warning(
            "%d context(s) embed to the zero vector and cannot be cosine-normalized: %s",
            len(unnormalizable), ", ".join(unnormalizable[:5])
        )
    return store


def save_store(directory: Union[str, Path], name: str, store: EmbeddingStore) -> None:
    """
    Write ``<name>.npy`` and its ``<name>.json`` metadata.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.save(directory / f"{name}.npy", np.ascontiguousarray(store.matrix, dtype=np.float64), allow_pickle=False)
    write_json(directory / f"{name}.json", store.metadata())


def load_store(directory: Union[str, Path], name: str, stage: str = "encode") -> EmbeddingStore:
    """
    Read a store written by ``save_store``.

    Args:
        directory (Union[str, Path]): Store directory.
        name (str): Store name.
        stage (str): Stage that produces the store, for the missing-artifact error.

    Returns:
        EmbeddingStore: The loaded store.
    """
    directory = Path(directory)
    matrix_path = directory / f"{name}.npy"
    meta_path = directory / f"{name}.json"
    if not matrix_path.is_file() or not meta_path.is_file():
        raise MissingArtifactError(str(matrix_path), stage)
    meta = read_json(meta_path)
    return EmbeddingStore(
        ids=list(meta["ids"]),
        matrix=np.load(matrix_path, allow_pickle=False),
        backend_tag=meta["backend_tag"],
        template_id=meta["template_id"],
        adapter_version=meta.get("adapter_version"),
        normalized=bool(meta.get("normalized", False)),
        variant=meta.get("variant", "full")
    )

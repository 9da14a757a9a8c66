"""
Exact dense retrieval over case embeddings.
"""
import logging
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np

from casecontext.encoding.store import CaseEmbedding, EmbeddingStore
from casecontext.errors import RetrievalError
from casecontext.retrieval.models import RankedList, RetrievalRun, rank_scores
from casecontext.utils.helpers import content_hash

logger = logging.getLogger(__name__)


def similarity(a: np.ndarray, b: np.ndarray, kind: str = "cosine") -> float:
    """
    Dot product or cosine similarity of two vectors.

    Args:
        a (np.ndarray): First vector.
        b (np.ndarray): Second vector of the same dimension.
        kind (str): ``dot`` or ``cosine``.

    Returns:
        float: The similarity; cosine lies in [-1, 1].
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise RetrievalError(f"dimension mismatch: {a.shape} vs {b.shape}")
    dot = float(np.dot(a, b))
    if kind == "dot":
        return dot
    if kind != "cosine":
        raise RetrievalError(f"unknown similarity kind '{kind}'")
    norms = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if norms == 0:
        raise RetrievalError("cosine similarity is undefined for a zero vector")
    return float(np.clip(dot / norms, -1.0, 1.0))


def score_matrix(query: np.ndarray, matrix: np.ndarray, kind: str = "cosine") -> np.ndarray:
    """
    Similarities of one query vector against every row of a matrix.
    """
    if matrix.ndim != 2 or matrix.shape[1] != query.shape[0]:
        raise RetrievalError(f"dimension mismatch: query {query.shape} vs candidates {matrix.shape}")
    dots = matrix @ query
    if kind == "dot":
        return dots
    if kind != "cosine":
        raise RetrievalError(f"unknown similarity kind '{kind}'")
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(query)
    if np.any(norms == 0):
        raise RetrievalError("cosine similarity is undefined for a zero vector")
    return np.clip(dots / norms, -1.0, 1.0)


def search(
    query_emb: CaseEmbedding,
    candidates: EmbeddingStore,
    k: int,
    exclude: Iterable[str] = (),
    kind: str = "cosine"
) -> RankedList:
    """
    Exhaustive top-k search.

    The query id is always excluded. Ties are broken by ascending case id.

    Args:
        query_emb (CaseEmbedding): Query vector.
        candidates (EmbeddingStore): Candidate vectors.
        k (int): Depth, at least 1.
        exclude (Iterable[str]): Further case ids to skip.
        kind (str): ``dot`` or ``cosine``.

    Returns:
        RankedList: At most ``k`` entries.
    """
    if k < 1:
        raise RetrievalError(f"k must be >= 1, got {k}")
    excluded = set(exclude) | {query_emb.case_id}
    keep = [i for i, case_id in enumerate(candidates.ids) if case_id not in excluded]
    if not keep:
        return RankedList(query_emb.case_id, [])
    scores = score_matrix(query_emb.vector, candidates.matrix[keep], kind)
    by_id = {candidates.ids[i]: float(s) for i, s in zip(keep, scores)}
    return rank_scores(query_emb.case_id, by_id, k)


def run_fingerprint(settings: Dict[str, Any]) -> str:
    """
    Hash of the backend, adapter, template and similarity settings of a run.
    """
    return content_hash(settings)


def produce_run(
    queries: Sequence[str],
    store: EmbeddingStore,
    k: int,
    settings: Optional[Dict[str, Any]] = None,
    kind: str = "cosine",
    candidates: Optional[Sequence[str]] = None
) -> RetrievalRun:
    """
    Search every query against the store.

    Args:
        queries (Sequence[str]): Query case ids.
        store (EmbeddingStore): Embeddings of queries and candidates.
        k (int): Depth.
        settings (Optional[Dict[str, Any]]): Extra settings bound into the fingerprint.
        kind (str): ``dot`` or ``cosine``.
        candidates (Optional[Sequence[str]]): Candidate ids; every stored case by default.

    Returns:
        RetrievalRun: One ranked list per query.
    """
    missing = [q for q in queries if q not in store]
    if candidates is not None:
        missing += [c for c in candidates if c not in store]
    if missing:
        raise RetrievalError(f"missing embeddings for {', '.join(sorted(set(missing)))}")

    pool = store
    if candidates is not None:
        rows = store.rows(list(candidates))
        pool = EmbeddingStore(
            list(candidates), store.matrix[rows], store.backend_tag, store.template_id,
            store.adapter_version, store.normalized, store.variant
        )

    full_settings = {
        "backend_tag": store.backend_tag,
        "adapter_version": store.adapter_version,
        "template_id": store.template_id,
        "variant": store.variant,
        "similarity_kind": kind,
        "k": k,
        **(settings or {}),
    }
    ranked = {query_id: search(store.get(query_id), pool, k, kind=kind) for query_id in queries}
    logger.info("Produced run over %d queries at depth %d", len(ranked), k)
    return RetrievalRun(ranked, run_fingerprint(full_settings), full_settings)

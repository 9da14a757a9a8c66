"""
Training examples and batch assembly with in-batch negatives.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from casecontext.encoding.store import EmbeddingStore
from casecontext.errors import BatchConstructionError, TrainingError
from casecontext.evaluation.qrels import Qrels


@dataclass(frozen=True)
class TrainingExample:
    """
    A query with one positive, its easy negatives and its hard negatives.
    """
    query_id: str
    positive_id: str
    easy_negative_ids: List[str] = field(default_factory=list)
    hard_negative_ids: List[str] = field(default_factory=list)

    def __post_init__(self):
        easy, hard = set(self.easy_negative_ids), set(self.hard_negative_ids)
        if self.positive_id in easy | hard:
            raise BatchConstructionError(f"positive '{self.positive_id}' of '{self.query_id}' is also a negative")
        if easy & hard:
            raise BatchConstructionError(f"easy and hard negatives of '{self.query_id}' overlap")
        if self.query_id in easy | hard | {self.positive_id}:
            raise BatchConstructionError(f"query '{self.query_id}' appears among its own candidates")


@dataclass(frozen=True)
class BatchItem:
    """
    Row indices of one example inside a batch: positive first, then the
    effective easy negatives, then the hard negatives.
    """
    query_id: str
    query_row: int
    candidate_rows: np.ndarray
    easy_ids: List[str]
    hard_ids: List[str]

    @property
    def n_easy(self) -> int:
        return len(self.easy_ids)

    @property
    def n_hard(self) -> int:
        return len(self.hard_ids)


@dataclass(frozen=True)
class Batch:
    ids: List[str]
    embeddings: np.ndarray
    items: List[BatchItem]


def effective_easy_negatives(
    examples: Sequence[TrainingExample],
    index: int,
    qrels: Optional[Qrels] = None
) -> List[str]:
    """
    Own easy negatives plus every other example's positive and negatives.

    The example's own query, positive and hard negatives never enter the
    set, nor do cases the qrels mark relevant to the query. Order is own
    negatives first, then other examples in batch order; duplicates collapse.
    """
    example = examples[index]
    blocked = {example.query_id, example.positive_id, *example.hard_negative_ids}
    if qrels is not None:
        blocked |= qrels.get(example.query_id)

    candidates = list(example.easy_negative_ids)
    for j, other in enumerate(examples):
        if j != index:
            candidates += [other.positive_id, *other.easy_negative_ids, *other.hard_negative_ids]

    result: List[str] = []
    seen = set()
    for case_id in candidates:
        if case_id in seen or case_id in blocked:
            continue
        seen.add(case_id)
        result.append(case_id)
    return result


def assemble_batch(
    examples: Sequence[TrainingExample],
    store: EmbeddingStore,
    qrels: Optional[Qrels] = None
) -> Batch:
    """
    Gather base embeddings and index structures for a batch.

    Args:
        examples (Sequence[TrainingExample]): At least one example.
        store (EmbeddingStore): Base embeddings of every referenced case.
        qrels (Optional[Qrels]): Known relevance, kept out of in-batch negatives.

    Returns:
        Batch: Unique case rows and per-example candidate rows.
    """
    if not examples:
        raise TrainingError("a batch needs at least one example")

    ids: List[str] = []
    rows: Dict[str, int] = {}

    def row(case_id: str) -> int:
        if case_id not in rows:
            if case_id not in store:
                raise TrainingError(f"no embedding for case '{case_id}'")
            rows[case_id] = len(ids)
            ids.append(case_id)
        return rows[case_id]

    items = []
    for i, example in enumerate(examples):
        easy = effective_easy_negatives(examples, i, qrels)
        hard = list(example.hard_negative_ids)
        if example.positive_id in easy or example.query_id in easy:
            raise BatchConstructionError(f"example '{example.query_id}' would use its positive or query as a negative")
        query_row = row(example.query_id)
        candidate_rows = np.array([row(c) for c in [example.positive_id, *easy, *hard]], dtype=np.int64)
        items.append(BatchItem(example.query_id, query_row, candidate_rows, easy, hard))

    embeddings = store.matrix[store.rows(ids)]
    return Batch(ids=ids, embeddings=embeddings, items=items)

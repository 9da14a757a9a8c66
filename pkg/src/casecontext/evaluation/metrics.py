"""
Ranking metrics at a cutoff K and the per-run metrics report.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, List, Sequence, Tuple

import pandas as pd

from casecontext.errors import MetricsError
from casecontext.evaluation.qrels import Qrels
from casecontext.retrieval.models import RankedList, RetrievalRun

logger = logging.getLogger(__name__)

AGGREGATE_KEYS = ("P@K", "R@K", "MicroF1", "MacroF1", "MRR@K", "MAP", "NDCG@K")
PER_QUERY_KEYS = ("p_at_k", "r_at_k", "rr_at_k", "ap_at_k", "ndcg_at_k")
AP_NORMALIZERS = ("min_rel_k", "rel")


def _ids(ranked) -> List[str]:
    return ranked.case_ids() if isinstance(ranked, RankedList) else list(ranked)


def _check_k(k: int) -> None:
    if k < 1:
        raise MetricsError(f"k must be >= 1, got {k}")


def hits_at_k(ranked, relevant: AbstractSet[str], k: int) -> int:
    _check_k(k)
    return sum(1 for case_id in _ids(ranked)[:k] if case_id in relevant)


def precision_recall_at_k(ranked, relevant: AbstractSet[str], k: int) -> Tuple[float, float]:
    """
    Precision with the fixed denominator ``k`` and recall over ``|relevant|``.

    Args:
        ranked: RankedList or sequence of case ids, best first.
        relevant (AbstractSet[str]): Relevant case ids, non-empty.
        k (int): Cutoff.

    Returns:
        Tuple[float, float]: (precision, recall).
    """
    if not relevant:
        raise MetricsError("precision and recall need a non-empty relevant set")
    hits = hits_at_k(ranked, relevant, k)
    return hits / k, hits / len(relevant)


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def micro_macro_f1(per_query_hits: Sequence[int], k: int, relevant_counts: Sequence[int]) -> Tuple[float, float]:
    """
    Micro-F1 over pooled hits and Macro-F1 as the mean per-query F1.

    Args:
        per_query_hits (Sequence[int]): Hits in the top ``k`` per query.
        k (int): Cutoff.
        relevant_counts (Sequence[int]): ``|relevant|`` per query, same order.

    Returns:
        Tuple[float, float]: (micro_f1, macro_f1).
    """
    _check_k(k)
    if not per_query_hits or len(per_query_hits) != len(relevant_counts):
        raise MetricsError("micro/macro F1 need aligned, non-empty hit and relevance counts")
    macro = sum(_f1(h / k, h / n) for h, n in zip(per_query_hits, relevant_counts)) / len(per_query_hits)
    total_hits = sum(per_query_hits)
    micro = _f1(total_hits / (k * len(per_query_hits)), total_hits / sum(relevant_counts))
    return micro, macro


def mrr_at_k(ranked, relevant: AbstractSet[str], k: int) -> float:
    """
    Reciprocal rank of the first relevant case within the top ``k``.
    """
    _check_k(k)
    for rank, case_id in enumerate(_ids(ranked)[:k], start=1):
        if case_id in relevant:
            return 1.0 / rank
    return 0.0


def average_precision_at_k(ranked, relevant: AbstractSet[str], k: int, normalizer: str = "min_rel_k") -> float:
    """
    Sum of precision at each relevant rank within ``k``, divided by
    ``min(|relevant|, k)`` (or ``|relevant|`` with ``normalizer="rel"``).
    """
    _check_k(k)
    if normalizer not in AP_NORMALIZERS:
        raise MetricsError(f"unknown AP normalizer '{normalizer}'")
    if not relevant:
        return 0.0
    hits = 0
    total = 0.0
    for rank, case_id in enumerate(_ids(ranked)[:k], start=1):
        if case_id in relevant:
            hits += 1
            total += hits / rank
    denominator = min(len(relevant), k) if normalizer == "min_rel_k" else len(relevant)
    return total / denominator


def ndcg_at_k(ranked, relevant: AbstractSet[str], k: int) -> float:
    """
    Binary-gain NDCG with ``log2(rank + 1)`` discounts.
    """
    _check_k(k)
    if not relevant:
        return 0.0
    dcg = sum(
        1.0 / math.log2(rank + 1)
        for rank, case_id in enumerate(_ids(ranked)[:k], start=1)
        if case_id in relevant
    )
    ideal = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(len(relevant), k) + 1))
    return dcg / ideal


@dataclass(frozen=True)
class MetricsReport:
    """
    Per-query and aggregate metrics of one run.
    """
    per_query: Dict[str, Dict[str, float]]
    aggregate: Dict[str, float]
    k: int
    run_fingerprint: str
    flagged: List[str] = field(default_factory=list)

    def to_record(self) -> Dict:
        return {
            "k": self.k,
            "run_fingerprint": self.run_fingerprint,
            "aggregate": dict(self.aggregate),
            "per_query": {q: dict(v) for q, v in sorted(self.per_query.items())},
            "flagged": list(self.flagged),
        }

    @classmethod
    def from_record(cls, data: Dict) -> 'MetricsReport':
        return cls(
            per_query=data["per_query"],
            aggregate=data["aggregate"],
            k=int(data["k"]),
            run_fingerprint=data.get("run_fingerprint", ""),
            flagged=list(data.get("flagged", []))
        )

    def to_frame(self) -> pd.DataFrame:
        """
        Per-query values as a table indexed by query id.
        """
        return pd.DataFrame.from_dict(self.per_query, orient="index", columns=list(PER_QUERY_KEYS))


def evaluate_run(run: RetrievalRun, qrels: Qrels, k: int = 5, ap_normalizer: str = "min_rel_k") -> MetricsReport:
    """
    Compute every per-query and aggregate metric of a run.

    Every qrels query is evaluated; queries the run does not contain score
    0 everywhere and are flagged. Run queries without qrels are reported and
    skipped.

    Args:
        run (RetrievalRun): Ranked lists.
        qrels (Qrels): Relevance judgements.
        k (int): Cutoff.
        ap_normalizer (str): ``min_rel_k`` or ``rel``.

    Returns:
        MetricsReport: The report.
    """
    _check_k(k)
    queries = [q for q in qrels.queries() if qrels.get(q)]
    if not queries:
        raise MetricsError("qrels contain no query with relevant cases")
    for query_id in sorted(set(run.ranked) - set(queries)):
        logger.warning("Run query '%s' has no qrels; skipped", query_id)

    per_query: Dict[str, Dict[str, float]] = {}
    hits: List[int] = []
    counts: List[int] = []
    flagged: List[str] = []
    for query_id in queries:
        relevant = qrels.get(query_id)
        ranked = run.get(query_id)
        if ranked is None:
            flagged.append(query_id)
            ranked = RankedList(query_id, [])
        p, r = precision_recall_at_k(ranked, relevant, k)
        per_query[query_id] = {
            "p_at_k": p,
            "r_at_k": r,
            "rr_at_k": mrr_at_k(ranked, relevant, k),
            "ap_at_k": average_precision_at_k(ranked, relevant, k, ap_normalizer),
            "ndcg_at_k": ndcg_at_k(ranked, relevant, k),
        }
        hits.append(hits_at_k(ranked, relevant, k))
        counts.append(len(relevant))
    if flagged:
        logger.warning("%d queries missing from the run scored 0: %s", len(flagged), ", ".join(flagged))

    frame = pd.DataFrame.from_dict(per_query, orient="index")
    micro, macro = micro_macro_f1(hits, k, counts)
    aggregate = {
        "P@K": float(frame["p_at_k"].mean()),
        "R@K": float(frame["r_at_k"].mean()),
        "MicroF1": micro,
        "MacroF1": macro,
        "MRR@K": float(frame["rr_at_k"].mean()),
        "MAP": float(frame["ap_at_k"].mean()),
        "NDCG@K": float(frame["ndcg_at_k"].mean()),
    }
    return MetricsReport(per_query, aggregate, k, run.config_fingerprint, flagged)

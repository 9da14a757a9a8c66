"""
Ranked lists, retrieval runs and the run file format.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from casecontext.errors import MissingArtifactError, RetrievalError
from casecontext.utils.helpers import read_json, write_json


@dataclass(frozen=True)
class RankedList:
    """
    Candidates retrieved for one query, best first.
    """
    query_id: str
    entries: List[Tuple[str, float]] = field(default_factory=list)

    def __post_init__(self):
        ids = [case_id for case_id, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise RetrievalError(f"duplicate case ids in ranking for '{self.query_id}'")
        if self.query_id in ids:
            raise RetrievalError(f"query '{self.query_id}' retrieved itself")
        scores = [score for _, score in self.entries]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise RetrievalError(f"scores for '{self.query_id}' are not non-increasing")

    def case_ids(self) -> List[str]:
        return [case_id for case_id, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def rank_scores(query_id: str, scores: Dict[str, float], k: int) -> RankedList:
    """
    Sort scored candidates by descending score, then ascending case id, and
    keep the first ``k``.
    """
    if k < 1:
        raise RetrievalError(f"k must be >= 1, got {k}")
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return RankedList(query_id, [(case_id, float(score)) for case_id, score in ordered])


@dataclass(frozen=True)
class RetrievalRun:
    """
    One ranked list per query, bound to the settings that produced it.
    """
    ranked: Dict[str, RankedList]
    config_fingerprint: str
    settings: Dict[str, Any] = field(default_factory=dict)

    def queries(self) -> List[str]:
        return sorted(self.ranked)

    def get(self, query_id: str) -> Optional[RankedList]:
        return self.ranked.get(query_id)


def write_run(path: Union[str, Path], run: RetrievalRun) -> None:
    """
    Write ``<query_id>\\t<rank>\\t<case_id>\\t<score>`` lines plus a
    ``.meta.json`` sidecar with the fingerprint and settings.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for query_id in run.queries():
            for rank, (case_id, score) in enumerate(run.ranked[query_id].entries, start=1):
                handle.write(f"{query_id}\t{rank}\t{case_id}\t{score:.6f}\n")
    write_json(meta_path(path), {"config_fingerprint": run.config_fingerprint, "settings": run.settings})


def meta_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name.replace(".run.tsv", "") + ".meta.json")


def read_run(path: Union[str, Path], queries: Optional[List[str]] = None) -> RetrievalRun:
    """
    Read a run file and its sidecar.

    Args:
        path (Union[str, Path]): Run file.
        queries (Optional[List[str]]): Queries to include even when they
            retrieved nothing.

    Returns:
        RetrievalRun: The run; entries ordered by rank.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(str(path), "retrieve")
    rows: Dict[str, List[Tuple[int, str, float]]] = {q: [] for q in queries or []}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise RetrievalError(f"{path}: line {line_number}: expected 4 tab-separated fields")
            query_id, rank, case_id, score = parts
            rows.setdefault(query_id, []).append((int(rank), case_id, float(score)))
    ranked = {
        query_id: RankedList(query_id, [(case_id, score) for _, case_id, score in sorted(items)])
        for query_id, items in rows.items()
    }
    meta = read_json(meta_path(path)) if meta_path(path).is_file() else {}
    return RetrievalRun(ranked, meta.get("config_fingerprint", ""), meta.get("settings", {}))

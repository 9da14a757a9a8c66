"""
Ground-truth relevance judgements (qrels).
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Tuple, Union

from casecontext.errors import CorpusError


@dataclass(frozen=True)
class Qrels:
    """
    Binary relevance judgements: query id to the set of relevant case ids.
    """
    relevant: Dict[str, FrozenSet[str]] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, str]]) -> 'Qrels':
        """
        Build qrels from (query_id, relevant_case_id) pairs.

        Args:
            pairs (Iterable[Tuple[str, str]]): Judgement pairs; duplicates collapse.

        Returns:
            Qrels: A Qrels instance.
        """
        grouped: Dict[str, set] = {}
        for query_id, case_id in pairs:
            grouped.setdefault(query_id, set()).add(case_id)
        return cls({query_id: frozenset(cases) for query_id, cases in sorted(grouped.items())})

    def queries(self) -> List[str]:
        """
        Query ids in ascending order.
        """
        return sorted(self.relevant)

    def get(self, query_id: str) -> FrozenSet[str]:
        return self.relevant.get(query_id, frozenset())

    def pairs(self) -> List[Tuple[str, str]]:
        """
        All (query_id, case_id) pairs sorted by query then case.
        """
        return [(q, c) for q in self.queries() for c in sorted(self.relevant[q])]

    def case_ids(self) -> FrozenSet[str]:
        """
        Every id mentioned, as query or as relevant case.
        """
        ids = set(self.relevant)
        for cases in self.relevant.values():
            ids.update(cases)
        return frozenset(ids)

    def avg_relevant(self) -> float:
        if not self.relevant:
            return 0.0
        return sum(len(c) for c in self.relevant.values()) / len(self.relevant)

    def __len__(self) -> int:
        return len(self.relevant)


def _strip_suffix(case_id: str) -> str:
    return case_id[:-4] if case_id.endswith(".txt") else case_id


def load_qrels(path: Union[str, Path], fmt: str = "tsv") -> Qrels:
    """
    Read qrels from disk.

    Args:
        path (Union[str, Path]): Qrels file.
        fmt (str): ``tsv`` for ``<query_id>\\t<case_id>`` lines, or ``json`` for
            the COLIEE layout mapping ``"q.txt"`` to a list of ``"d.txt"``.

    Returns:
        Qrels: Parsed judgements.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"qrels file not found: {path}")

    pairs: List[Tuple[str, str]] = []
    if fmt == "json":
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise CorpusError(f"{path}: expected a JSON object of query -> case list")
        for query_id, cases in data.items():
            for case_id in cases:
                pairs.append((_strip_suffix(str(query_id)), _strip_suffix(str(case_id))))
    elif fmt == "tsv":
        with open(path, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                    raise CorpusError(f"{path}: line {line_number}: expected '<query_id>\\t<case_id>'")
                pairs.append((parts[0].strip(), parts[1].strip()))
    else:
        raise CorpusError(f"unknown qrels format '{fmt}'")
    return Qrels.from_pairs(pairs)


def write_qrels(path: Union[str, Path], qrels: Qrels) -> None:
    """
    Write qrels as sorted ``<query_id>\\t<case_id>`` lines.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for query_id, case_id in qrels.pairs():
            handle.write(f"{query_id}\t{case_id}\n")

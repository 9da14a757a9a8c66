"""
Data models for case corpora.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

from casecontext.evaluation.qrels import Qrels


@dataclass(frozen=True)
class CaseSections:
    """
    Named sections of a case: background text, analysis and conclusion sentences.
    """
    background: str = ""
    analysis_sentences: List[str] = field(default_factory=list)
    conclusion_sentences: List[str] = field(default_factory=list)

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'CaseSections':
        return cls(
            background=data.get('background', ''),
            analysis_sentences=list(data.get('analysis_sentences', [])),
            conclusion_sentences=list(data.get('conclusion_sentences', []))
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "background": self.background,
            "analysis_sentences": list(self.analysis_sentences),
            "conclusion_sentences": list(self.conclusion_sentences),
        }


@dataclass(frozen=True)
class CaseDocument:
    """
    One legal case after ingestion.

    ``raw_text`` is the case text with French lines already removed and
    ``token_count`` counts its whitespace tokens.
    """
    case_id: str
    raw_text: str
    sections: CaseSections
    token_count: int

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'CaseDocument':
        """
        Create a CaseDocument from a persisted record.

        Args:
            data (Dict[str, Any]): Record with case_id, raw_text, sections, token_count.

        Returns:
            CaseDocument: A CaseDocument instance.
        """
        return cls(
            case_id=data['case_id'],
            raw_text=data['raw_text'],
            sections=CaseSections.from_record(data.get('sections', {})),
            token_count=int(data['token_count'])
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "raw_text": self.raw_text,
            "sections": self.sections.to_record(),
            "token_count": self.token_count,
        }


@dataclass(frozen=True)
class CorpusStats:
    """
    Dataset statistics in the shape of a benchmark statistics table.
    """
    num_queries: int
    num_candidates: int
    avg_relevant: float
    avg_tokens: float
    max_tokens: int

    @classmethod
    def compute(cls, cases: List[CaseDocument], qrels: Optional[Qrels]) -> 'CorpusStats':
        """
        Compute statistics over ingested cases.

        Candidates are the cases that are not queries; token statistics cover
        every case.

        Args:
            cases (List[CaseDocument]): Ingested cases.
            qrels (Optional[Qrels]): Relevance judgements, if any.

        Returns:
            CorpusStats: Statistics for the corpus.
        """
        queries = set(qrels.queries()) if qrels else set()
        tokens = pd.Series([c.token_count for c in cases], dtype="int64")
        return cls(
            num_queries=len(queries),
            num_candidates=sum(1 for c in cases if c.case_id not in queries),
            avg_relevant=qrels.avg_relevant() if qrels else 0.0,
            avg_tokens=float(tokens.mean()) if len(tokens) else 0.0,
            max_tokens=int(tokens.max()) if len(tokens) else 0
        )

    def to_frame(self) -> pd.DataFrame:
        """
        Render the statistics as a one-column table.
        """
        return pd.DataFrame(
            {
                "value": [
                    self.num_queries,
                    self.num_candidates,
                    round(self.avg_relevant, 2),
                    round(self.avg_tokens, 1),
                    self.max_tokens,
                ]
            },
            index=["# Query", "# Candidates", "# Avg. relevant cases", "Avg. length (# token)", "Largest length (# token)"],
        )


@dataclass(frozen=True)
class CorpusHandle:
    """
    An ingested corpus. Immutable once built.
    """
    corpus_id: str
    cases: Dict[str, CaseDocument]
    qrels: Optional[Qrels]
    stats: CorpusStats
    warnings: List[str] = field(default_factory=list)

    def case_ids(self) -> List[str]:
        return sorted(self.cases)

    def get(self, case_id: str) -> CaseDocument:
        return self.cases[case_id]

    def __contains__(self, case_id: object) -> bool:
        return case_id in self.cases

    def __len__(self) -> int:
        return len(self.cases)

"""
Okapi BM25 lexical retrieval and hard-negative mining.
"""
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from casecontext.corpus.models import CaseDocument, CorpusHandle
from casecontext.errors import Bm25Error, MissingArtifactError
from casecontext.retrieval.models import RankedList, RetrievalRun, rank_scores
from casecontext.utils.helpers import content_hash, load_resource_lines, read_json, write_json

logger = logging.getLogger(__name__)

_TERM_RE = re.compile(r"[^\W_]+")


@lru_cache(maxsize=1)
def default_stopwords() -> FrozenSet[str]:
    return frozenset(load_resource_lines("stopwords_en.txt"))


@dataclass(frozen=True)
class Analyzer:
    """
    Lowercasing, punctuation-stripping unigram analyzer with stopword removal.
    """
    stopwords: FrozenSet[str] = field(default_factory=default_stopwords)

    def analyze(self, text: str) -> List[str]:
        return [t for t in _TERM_RE.findall(text.lower()) if t not in self.stopwords]


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0 or not 0 <= self.b <= 1:
            raise Bm25Error(f"invalid BM25 parameters k1={self.k1}, b={self.b}")


@dataclass(frozen=True)
class Bm25Index:
    """
    Inverted index with the statistics Okapi BM25 needs.
    """
    doc_frequencies: Dict[str, int]
    doc_lengths: Dict[str, int]
    avg_doc_length: float
    postings: Dict[str, List[Tuple[str, int]]]
    params: Bm25Params = field(default_factory=Bm25Params)
    analyzer: Analyzer = field(default_factory=Analyzer)
    _tf: Dict[str, Dict[str, int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tf: Dict[str, Dict[str, int]] = {case_id: {} for case_id in self.doc_lengths}
        for term, entries in self.postings.items():
            for case_id, count in entries:
                tf[case_id][term] = count
        object.__setattr__(self, "_tf", tf)

    @property
    def num_docs(self) -> int:
        return len(self.doc_lengths)

    def case_ids(self) -> List[str]:
        return sorted(self.doc_lengths)

    def idf(self, term: str) -> float:
        """
        ``ln(1 + (N - df + 0.5) / (df + 0.5))``; never negative.
        """
        df = self.doc_frequencies.get(term, 0)
        return math.log(1.0 + (self.num_docs - df + 0.5) / (df + 0.5))

    def term_frequency(self, case_id: str, term: str) -> int:
        return self._tf[case_id].get(term, 0)

    def term_score(self, term: str, tf: int, length: int) -> float:
        if tf == 0:
            return 0.0
        k1, b = self.params.k1, self.params.b
        norm = k1 * (1.0 - b + b * length / self.avg_doc_length) if self.avg_doc_length > 0 else k1
        return self.idf(term) * tf * (k1 + 1.0) / (tf + norm)


def build_bm25(
    corpus: Union[CorpusHandle, Dict[str, str]],
    analyzer: Optional[Analyzer] = None,
    params: Optional[Bm25Params] = None
) -> Bm25Index:
    """
    Index the raw text of every case.

    Args:
        corpus (Union[CorpusHandle, Dict[str, str]]): Corpus, or case id to text.
        analyzer (Optional[Analyzer]): Tokenization settings.
        params (Optional[Bm25Params]): k1 and b.

    Returns:
        Bm25Index: The index.
    """
    analyzer = analyzer or Analyzer()
    if isinstance(corpus, CorpusHandle):
        texts = {case_id: corpus.get(case_id).raw_text for case_id in corpus.case_ids()}
    else:
        texts = dict(corpus)
    if not texts:
        raise Bm25Error("cannot build a BM25 index over an empty corpus")

    doc_lengths: Dict[str, int] = {}
    postings: Dict[str, List[Tuple[str, int]]] = {}
    for case_id in sorted(texts):
        terms = analyzer.analyze(texts[case_id])
        doc_lengths[case_id] = len(terms)
        for term, count in sorted(Counter(terms).items()):
            postings.setdefault(term, []).append((case_id, count))

    postings = {term: postings[term] for term in sorted(postings)}
    index = Bm25Index(
        doc_frequencies={term: len(entries) for term, entries in postings.items()},
        doc_lengths=doc_lengths,
        avg_doc_length=sum(doc_lengths.values()) / len(doc_lengths),
        postings=postings,
        params=params or Bm25Params(),
        analyzer=analyzer
    )
    logger.info("Built BM25 index over %d cases, %d terms", index.num_docs, len(postings))
    return index


def bm25_score(index: Bm25Index, query_terms: Sequence[str], case_id: str) -> float:
    """
    Okapi BM25 score of one case for a list of analysed query terms.

    Args:
        index (Bm25Index): The index.
        query_terms (Sequence[str]): Query terms; each occurrence contributes.
        case_id (str): Indexed case.

    Returns:
        float: The score, 0.0 when no term occurs in the case.
    """
    if case_id not in index.doc_lengths:
        raise Bm25Error(f"case '{case_id}' is not indexed")
    length = index.doc_lengths[case_id]
    return sum(index.term_score(term, index.term_frequency(case_id, term), length) for term in query_terms)


def query_terms(index: Bm25Index, query_text: str) -> List[str]:
    """
    Distinct analysed terms of a query, in order of first appearance.
    """
    return list(dict.fromkeys(index.analyzer.analyze(query_text)))


def bm25_top_k(
    index: Bm25Index,
    query_text: str,
    k: int,
    exclude: Iterable[str] = ()
) -> List[Tuple[str, float]]:
    """
    Rank every indexed case for a query text.

    Args:
        index (Bm25Index): The index.
        query_text (str): Raw query text, reduced to its distinct terms.
        k (int): Depth, at least 1.
        exclude (Iterable[str]): Case ids never returned.

    Returns:
        List[Tuple[str, float]]: (case_id, score) by descending score, ties by case id.
    """
    if k < 1:
        raise Bm25Error(f"k must be >= 1, got {k}")
    excluded = set(exclude)
    scores = {case_id: 0.0 for case_id in index.doc_lengths if case_id not in excluded}
    for term in query_terms(index, query_text):
        for case_id, tf in index.postings.get(term, []):
            if case_id in scores:
                scores[case_id] += index.term_score(term, tf, index.doc_lengths[case_id])
    return rank_scores("", scores, k).entries if scores else []


@dataclass(frozen=True)
class MinedNegatives:
    """
    Hard negatives of one query; ``short`` when fewer than requested were found.
    """
    query_id: str
    case_ids: List[str]
    short: bool = False


def mine_hard_negatives(
    index: Bm25Index,
    query: CaseDocument,
    positives: Iterable[str],
    count: int = 1,
    pool_depth: int = 10
) -> MinedNegatives:
    """
    The highest-ranked BM25 results for a query that are not relevant to it.

    Args:
        index (Bm25Index): The index.
        query (CaseDocument): Query case; its raw text is the query.
        positives (Iterable[str]): Relevant case ids.
        count (int): Negatives wanted, at least 1.
        pool_depth (int): BM25 depth searched, at least ``count``.

    Returns:
        MinedNegatives: Up to ``count`` negatives, best first.
    """
    if count < 1 or pool_depth < count:
        raise Bm25Error(f"need 1 <= count <= pool_depth, got count={count}, pool_depth={pool_depth}")
    pool = bm25_top_k(index, query.raw_text, pool_depth, exclude={query.case_id})
    blocked = set(positives) | {query.case_id}
    negatives = [case_id for case_id, _ in pool if case_id not in blocked][:count]
    short = len(negatives) < count
    if short:
        logger.warning("Only %d of %d hard negatives found for query '%s'", len(negatives), count, query.case_id)
    return MinedNegatives(query.case_id, negatives, short)


def bm25_run(index: Bm25Index, corpus: CorpusHandle, queries: Sequence[str], k: int) -> RetrievalRun:
    """
    Baseline run: every query's raw text against every other case.
    """
    settings = {
        "kind": "bm25",
        "k": k,
        "k1": index.params.k1,
        "b": index.params.b,
        "stopwords": content_hash(sorted(index.analyzer.stopwords)),
    }
    ranked = {}
    for query_id in queries:
        entries = bm25_top_k(index, corpus.get(query_id).raw_text, k, exclude={query_id})
        ranked[query_id] = RankedList(query_id, entries)
    return RetrievalRun(ranked, content_hash(settings), settings)


def save_index(path: Union[str, Path], index: Bm25Index) -> None:
    """
    Persist the index as one JSON document.
    """
    write_json(path, {
        "params": {"k1": index.params.k1, "b": index.params.b},
        "stopwords": sorted(index.analyzer.stopwords),
        "avg_doc_length": index.avg_doc_length,
        "doc_lengths": index.doc_lengths,
        "doc_frequencies": index.doc_frequencies,
        "postings": {term: [[case_id, tf] for case_id, tf in entries] for term, entries in index.postings.items()},
    })


def load_index(path: Union[str, Path]) -> Bm25Index:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(str(path), "index")
    data = read_json(path)
    return Bm25Index(
        doc_frequencies=dict(data["doc_frequencies"]),
        doc_lengths=dict(data["doc_lengths"]),
        avg_doc_length=float(data["avg_doc_length"]),
        postings={term: [(case_id, int(tf)) for case_id, tf in entries] for term, entries in data["postings"].items()},
        params=Bm25Params(**data["params"]),
        analyzer=Analyzer(frozenset(data["stopwords"]))
    )


def write_hard_negatives(path: Union[str, Path], mined: Sequence[MinedNegatives]) -> None:
    """
    Write ``<query_id>\\t<negative_case_id>`` lines in query order.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for item in sorted(mined, key=lambda m: m.query_id):
            for case_id in item.case_ids:
                handle.write(f"{item.query_id}\t{case_id}\n")


def read_hard_negatives(path: Union[str, Path]) -> Dict[str, List[str]]:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(str(path), "mine")
    negatives: Dict[str, List[str]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise Bm25Error(f"{path}: line {line_number}: expected '<query_id>\\t<case_id>'")
            negatives.setdefault(parts[0], []).append(parts[1])
    return negatives

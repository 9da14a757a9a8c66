"""
Corpus ingestion, French filtering and section segmentation.
"""
from casecontext.corpus.language import LanguageFilterConfig, strip_non_english
from casecontext.corpus.models import CaseDocument, CaseSections, CorpusHandle, CorpusStats
from casecontext.corpus.segment import SegmentationRules, partition_lines, segment_sections, split_sentences
from casecontext.corpus.store import CorpusLayout, build_case, ingest_corpus, load_corpus, save_corpus

__all__ = [
    "CaseDocument",
    "CaseSections",
    "CorpusHandle",
    "CorpusLayout",
    "CorpusStats",
    "LanguageFilterConfig",
    "SegmentationRules",
    "build_case",
    "ingest_corpus",
    "load_corpus",
    "partition_lines",
    "save_corpus",
    "segment_sections",
    "split_sentences",
    "strip_non_english",
]

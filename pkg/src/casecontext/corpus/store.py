"""
Corpus ingestion and persistence.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

from casecontext.corpus.language import LanguageFilterConfig, strip_non_english
from casecontext.corpus.models import CaseDocument, CorpusHandle, CorpusStats
from casecontext.corpus.segment import SegmentationRules, segment_sections
from casecontext.errors import CorpusError
from casecontext.evaluation.qrels import Qrels, load_qrels
from casecontext.utils.helpers import count_tokens, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorpusLayout:
    """
    Where the case files and relevance judgements of a corpus live.

    ``qrels`` is resolved against the corpus root when relative.
    """
    case_glob: str = "*.txt"
    qrels: Optional[str] = None
    qrels_format: str = "tsv"
    corpus_id: Optional[str] = None


def _read_case_file(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"unreadable case file {path}: {exc}") from exc


def build_case(
    case_id: str,
    text: str,
    language: Optional[LanguageFilterConfig] = None,
    rules: Optional[SegmentationRules] = None
) -> CaseDocument:
    """
    Turn one raw case text into a CaseDocument.

    French lines are removed before segmentation.

    Args:
        case_id (str): Case identifier.
        text (str): Raw file contents.
        language (Optional[LanguageFilterConfig]): French filter settings.
        rules (Optional[SegmentationRules]): Heading rules.

    Returns:
        CaseDocument: The ingested case (raw_text may be empty).
    """
    english = strip_non_english(text, language)
    return CaseDocument(
        case_id=case_id,
        raw_text=english,
        sections=segment_sections(english, rules),
        token_count=count_tokens(english)
    )


def ingest_corpus(
    root_path: Union[str, Path],
    layout: Optional[CorpusLayout] = None,
    language: Optional[LanguageFilterConfig] = None,
    rules: Optional[SegmentationRules] = None
) -> CorpusHandle:
    """
    Ingest a directory of ``<case_id>.txt`` files and an optional qrels file.

    Cases that are empty after French removal are skipped with a warning.
    Qrels ids that do not resolve to an ingested case are reported in the
    handle's warnings, not raised.

    Args:
        root_path (Union[str, Path]): Corpus directory.
        layout (Optional[CorpusLayout]): File pattern and qrels location.
        language (Optional[LanguageFilterConfig]): French filter settings.
        rules (Optional[SegmentationRules]): Heading rules.

    Returns:
        CorpusHandle: The ingested corpus.
    """
    layout = layout or CorpusLayout()
    root = Path(root_path)
    if not root.is_dir():
        raise CorpusError(f"corpus path does not exist: {root}")

    files = sorted(p for p in root.glob(layout.case_glob) if p.is_file())
    if not files:
        raise CorpusError(f"no case files found in {root} matching '{layout.case_glob}'")

    cases: Dict[str, CaseDocument] = {}
    warnings: List[str] = []
    for path in files:
        case_id = path.stem
        if not case_id:
            raise CorpusError(f"case file {path} has an empty case id")
        if case_id in cases:
            raise CorpusError(f"duplicate case_id '{case_id}' ({path})")
        case = build_case(case_id, _read_case_file(path), language, rules)
        if not case.raw_text.strip():
            message = f"case '{case_id}' is empty after French removal; skipped"
            logger.warning(message)
            warnings.append(message)
            continue
        cases[case_id] = case

    qrels = None
    if layout.qrels:
        qrels_path = Path(layout.qrels)
        if not qrels_path.is_absolute():
            qrels_path = root / qrels_path
        qrels = load_qrels(qrels_path, layout.qrels_format)
        for case_id in sorted(qrels.case_ids() - set(cases)):
            message = f"qrels reference unknown case id '{case_id}'"
            logger.warning(message)
            warnings.append(message)

    ordered = {case_id: cases[case_id] for case_id in sorted(cases)}
    stats = CorpusStats.compute(list(ordered.values()), qrels)
    logger.info(
        "Ingested %d cases from %s (%d queries, %.2f relevant per query)",
        len(ordered), root, stats.num_queries, stats.avg_relevant
    )
    return CorpusHandle(
        corpus_id=layout.corpus_id or root.name,
        cases=ordered,
        qrels=qrels,
        stats=stats,
        warnings=warnings
    )


def save_corpus(path: Union[str, Path], handle: CorpusHandle) -> None:
    """
    Persist the cases of a corpus as one record per line, sorted by case_id.
    """
    write_jsonl(path, (handle.cases[case_id].to_record() for case_id in handle.case_ids()))


def load_corpus(
    path: Union[str, Path],
    qrels: Optional[Qrels] = None,
    corpus_id: Optional[str] = None
) -> CorpusHandle:
    """
    Reload a corpus written by ``save_corpus``.

    Args:
        path (Union[str, Path]): Record file.
        qrels (Optional[Qrels]): Judgements to attach.
        corpus_id (Optional[str]): Identifier; defaults to the file stem.

    Returns:
        CorpusHandle: The reloaded corpus.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")
    cases: Dict[str, CaseDocument] = {}
    for record in read_jsonl(path):
        case = CaseDocument.from_record(record)
        if case.case_id in cases:
            raise CorpusError(f"duplicate case_id '{case.case_id}' in {path}")
        cases[case.case_id] = case
    ordered = {case_id: cases[case_id] for case_id in sorted(cases)}
    return CorpusHandle(
        corpus_id=corpus_id or path.stem,
        cases=ordered,
        qrels=qrels,
        stats=CorpusStats.compute(list(ordered.values()), qrels)
    )

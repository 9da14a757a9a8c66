"""
Pattern-based relation triplet extraction and triplet import/export.
"""
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import FrozenSet, List, Optional, Union

from casecontext.corpus.segment import split_sentences
from casecontext.errors import TripletImportError
from casecontext.extraction.models import CaseTriplets, LegalElements, RelationTriplet, TripletSet
from casecontext.utils.helpers import load_resource_lines

logger = logging.getLogger(__name__)

AUXILIARIES = frozenset({
    "is", "are", "was", "were", "be", "been", "has", "have", "had", "do", "does", "did",
    "will", "would", "shall", "should", "may", "might", "must", "can", "could",
})
ADVERBS = frozenset({
    "not", "also", "never", "then", "thus", "therefore", "subsequently", "later",
    "previously", "properly", "further", "already", "still", "clearly", "duly",
})
DETERMINERS = frozenset({"the", "a", "an", "this", "that", "these", "those"})
SUBORDINATORS = frozenset({
    "because", "that", "which", "who", "whereas", "although", "when", "since", "while",
})
_NOT_VERBS = frozenset({"indeed", "need", "speed", "creed", "deed", "hundred"})
_EDGE = ".,;:!?\"'()[]{}“”‘’"
_CLAUSE_END = (",", ";", ":")

EMPTY_SENTINEL = "(none)"


@lru_cache(maxsize=1)
def finite_verbs() -> FrozenSet[str]:
    """
    The shipped list of irregular and third-person finite verb forms.
    """
    return frozenset(load_resource_lines("verbs_en.txt"))


def _bare(word: str) -> str:
    return word.strip(_EDGE).lower()


def _is_verb(word: str) -> bool:
    stripped = word.strip(_EDGE)
    if not stripped or not stripped[0].islower():
        return False
    bare = stripped.lower()
    if bare in AUXILIARIES or bare in finite_verbs():
        return True
    return bare.endswith("ed") and len(bare) > 4 and bare not in _NOT_VERBS


def _span(words: List[str]) -> str:
    return " ".join(words).strip(_EDGE).strip()


def _verb_group(words: List[str], start: int) -> int:
    end = start + 1
    while end < len(words) and not words[end - 1].endswith(_CLAUSE_END):
        if not (_is_verb(words[end]) or _bare(words[end]) in ADVERBS):
            break
        end += 1
    while end - 1 > start and _bare(words[end - 1]) in ADVERBS:
        end -= 1
    return end


def _head(words: List[str], verb_start: int) -> str:
    head = words[:verb_start]
    for i in range(len(head) - 1, -1, -1):
        if head[i].endswith(_CLAUSE_END):
            head = head[i + 1:]
            break
    while head and _bare(head[0]) in DETERMINERS:
        head = head[1:]
    return _span(head)


def _tail(words: List[str], verb_end: int) -> str:
    tail: List[str] = []
    for word in words[verb_end:]:
        if _bare(word) in SUBORDINATORS:
            break
        tail.append(word)
        if word.endswith(_CLAUSE_END):
            break
    return _span(tail)


def sentence_triplet(sentence: str, sentence_index: int = 0) -> Optional[RelationTriplet]:
    """
    Apply the subject-verb-object pattern to one sentence.

    The first verb group with a non-empty noun phrase before it and a
    non-empty remainder after it yields the triplet. Leading determiners are
    dropped from the head and kept in the tail.

    Args:
        sentence (str): A single sentence with single-space word separators.
        sentence_index (int): Position of the sentence in its text.

    Returns:
        Optional[RelationTriplet]: The triplet, or None when the pattern fails.
    """
    words = sentence.split()
    position = 1
    while position < len(words):
        if not _is_verb(words[position]):
            position += 1
            continue
        end = _verb_group(words, position)
        head = _head(words, position)
        relation = _span(words[position:end])
        tail = _tail(words, end)
        if head and relation and tail:
            return RelationTriplet(head, relation, tail, sentence_index)
        position = end
    return None


def extract_triplets(text: str, source_field: str = "facts") -> TripletSet:
    """
    Extract at most one triplet per sentence of a text.

    Args:
        text (str): Facts summary or joined issue sentences.
        source_field (str): ``facts`` or ``issues``.

    Returns:
        TripletSet: Built-in triplets in sentence order.
    """
    triplets = []
    for index, sentence in enumerate(split_sentences(text)):
        triplet = sentence_triplet(sentence, index)
        if triplet is not None:
            triplets.append(triplet)
    return TripletSet(triplets=triplets, origin="builtin", source_field=source_field)


def render_triplets(triplet_set: TripletSet) -> str:
    """
    Render triplets as ``(h, r, t)`` items joined by ``"; "``; ``(none)`` when empty.
    """
    if not len(triplet_set):
        return EMPTY_SENTINEL
    return "; ".join(t.render() for t in triplet_set)


def import_triplets(path: Union[str, Path], source_field: str) -> TripletSet:
    """
    Read triplets produced by an external extraction pipeline.

    Each line is a JSON object with ``head``, ``relation``, ``tail`` and
    ``sentence_index``. Duplicates keep their first occurrence.

    Args:
        path (Union[str, Path]): Line-delimited JSON file.
        source_field (str): ``facts`` or ``issues``.

    Returns:
        TripletSet: Imported triplets.
    """
    path = Path(path)
    if not path.is_file():
        raise TripletImportError(str(path), 0, "file not found")
    triplets = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            triplets.append(_parse_record(str(path), line_number, line))
    logger.debug("Imported %d triplets from %s", len(triplets), path)
    return TripletSet(triplets=triplets, origin="imported", source_field=source_field)


def _parse_record(path: str, line_number: int, line: str) -> RelationTriplet:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TripletImportError(path, line_number, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(record, dict):
        raise TripletImportError(path, line_number, "expected a JSON object")
    values: List[str] = []
    for key in ("head", "relation", "tail"):
        value = record.get(key)
        if not isinstance(value, str) or not value.strip():
            raise TripletImportError(path, line_number, f"field '{key}' must be a non-empty string")
        values.append(value.strip())
    index = record.get("sentence_index", 0)
    if not isinstance(index, int) or isinstance(index, bool) or index < 0:
        raise TripletImportError(path, line_number, "field 'sentence_index' must be a non-negative integer")
    return RelationTriplet(values[0], values[1], values[2], index)


def save_triplet_set(path: Union[str, Path], triplet_set: TripletSet) -> None:
    """
    Write a triplet set in the import format.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for triplet in triplet_set:
            handle.write(json.dumps(triplet.to_record(), ensure_ascii=False))
            handle.write("\n")


def case_triplets(elements: LegalElements, import_dir: Optional[Union[str, Path]] = None) -> CaseTriplets:
    """
    Build R_Fact and R_Issue for one case.

    ``<case_id>.facts.jsonl`` or ``<case_id>.issues.jsonl`` in ``import_dir``
    replace the built-in extractor for that field.

    Args:
        elements (LegalElements): Extracted elements of the case.
        import_dir (Optional[Union[str, Path]]): Directory of imported triplet files.

    Returns:
        CaseTriplets: Both triplet sets.
    """
    sources = {"facts": elements.facts, "issues": " ".join(elements.issues)}
    sets = {}
    for source_field, text in sources.items():
        imported = Path(import_dir) / f"{elements.case_id}.{source_field}.jsonl" if import_dir else None
        if imported is not None and imported.is_file():
            sets[source_field] = import_triplets(imported, source_field)
        else:
            sets[source_field] = extract_triplets(text, source_field)
    return CaseTriplets(case_id=elements.case_id, r_fact=sets["facts"], r_issue=sets["issues"])

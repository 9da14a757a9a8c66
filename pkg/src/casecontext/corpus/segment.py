"""
Section segmentation and rule-based sentence splitting for case documents.
"""
import re
import string
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Pattern, Sequence, Tuple

from casecontext.corpus.models import CaseSections

DEFAULT_ABBREVIATIONS: Tuple[str, ...] = (
    "v.", "vs.", "No.", "Nos.", "Inc.", "Ltd.", "Co.", "Corp.", "Mr.", "Mrs.", "Ms.",
    "Dr.", "Jr.", "Sr.", "St.", "JJ.", "para.", "paras.", "s.", "ss.", "Art.", "art.",
    "cf.", "e.g.", "i.e.", "al.", "Fed.", "Supp.", "App.", "Cir.", "R.S.C.", "S.C.",
    "F.C.", "S.C.R.", "c.",
) + tuple(f"{letter}." for letter in string.ascii_uppercase)

DEFAULT_BACKGROUND_PATTERNS: Tuple[str, ...] = (r"background",)
DEFAULT_ANALYSIS_PATTERNS: Tuple[str, ...] = (
    r"analysis",
    r"reasons(?:\s+for\s+(?:judg(?:e)?ment|order))?",
)
DEFAULT_CONCLUSION_PATTERNS: Tuple[str, ...] = (r"judg(?:e)?ment", r"order")

_ENUMERATOR_RE = re.compile(r"^(?:[IVXLC]+|\d+|[A-Za-z])[.)]\s+")
_TERMINAL_RE = re.compile(r"[.!?][\"'”’)\]]*$")
_SENTENCE_START_RE = re.compile(r"^[\"'“‘(\[]?[A-Z]")
_OPENERS = "\"'“‘(["

REGIONS = ("background", "analysis", "conclusion")


def _compile(patterns: Sequence[str]) -> Tuple[Pattern[str], ...]:
    return tuple(re.compile(p, re.IGNORECASE) for p in patterns)


@dataclass(frozen=True)
class SegmentationRules:
    """
    Ordered heading patterns for the three regions and the abbreviation list
    protected by the sentence splitter.

    Patterns must match a whole heading line, ignoring case, a leading
    enumerator such as ``I.`` or ``2)`` and a trailing colon or period.
    """
    background_patterns: Tuple[str, ...] = DEFAULT_BACKGROUND_PATTERNS
    analysis_patterns: Tuple[str, ...] = DEFAULT_ANALYSIS_PATTERNS
    conclusion_patterns: Tuple[str, ...] = DEFAULT_CONCLUSION_PATTERNS
    abbreviations: Tuple[str, ...] = DEFAULT_ABBREVIATIONS
    _compiled: Dict[str, Tuple[Pattern[str], ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_compiled", {
            "background": _compile(self.background_patterns),
            "analysis": _compile(self.analysis_patterns),
            "conclusion": _compile(self.conclusion_patterns),
        })

    def matches(self, region: str, line: str) -> bool:
        """
        Whether a line is a heading for the given region.
        """
        key = heading_key(line)
        if not key:
            return False
        return any(p.fullmatch(key) for p in self._compiled[region])


def heading_key(line: str) -> str:
    """
    Normalize a candidate heading line: strip enumerators, whitespace and a
    trailing colon or period.
    """
    key = _ENUMERATOR_RE.sub("", line.strip())
    return key.rstrip(":.").strip()


def split_sentences(text: str, abbreviations: Optional[Sequence[str]] = None) -> List[str]:
    """
    Split text into sentences.

    A sentence ends at a word closing with ``.``, ``!`` or ``?`` (optionally
    followed by closing quotes or brackets) when the next word starts with an
    uppercase letter or the text ends. Only listed abbreviations are protected,
    with or without an opening quote or bracket; the defaults list the
    single-letter initials ``A.`` to ``Z.``. Joining the result with single
    spaces gives the whitespace-normalized input.

    Args:
        text (str): Input text.
        abbreviations (Optional[Sequence[str]]): Protected abbreviations;
            defaults to ``DEFAULT_ABBREVIATIONS``.

    Returns:
        List[str]: Non-empty sentences in order.
    """
    protected = set(DEFAULT_ABBREVIATIONS if abbreviations is None else abbreviations)
    words = text.split()
    sentences: List[str] = []
    current: List[str] = []
    for i, word in enumerate(words):
        current.append(word)
        next_word = words[i + 1] if i + 1 < len(words) else None
        if not _TERMINAL_RE.search(word):
            continue
        if word in protected or word.lstrip(_OPENERS) in protected:
            continue
        if next_word is None or _SENTENCE_START_RE.match(next_word):
            sentences.append(" ".join(current))
            current = []
    if current:
        sentences.append(" ".join(current))
    return sentences


def _locate_headings(lines: List[str], rules: SegmentationRules) -> Dict[str, int]:
    """
    Find the first heading line of each region, searching in region order.
    """
    found: Dict[str, int] = {}
    start = 0
    for region in REGIONS:
        for index in range(start, len(lines)):
            if rules.matches(region, lines[index]):
                found[region] = index
                start = index + 1
                break
    return found


def partition_lines(doc_text: str, rules: Optional[SegmentationRules] = None) -> List[Tuple[str, str]]:
    """
    Label every line of a document with the region it belongs to.

    Lines before the first heading belong to the background; heading lines
    are labelled ``<region>_heading``. Concatenating the lines restores the input.

    Args:
        doc_text (str): Document text.
        rules (Optional[SegmentationRules]): Heading rules.

    Returns:
        List[Tuple[str, str]]: (label, line) pairs, line endings kept.
    """
    rules = rules or SegmentationRules()
    lines = doc_text.splitlines(keepends=True)
    headings = _locate_headings(lines, rules)
    boundaries = sorted((index, region) for region, index in headings.items())

    labels: List[Tuple[str, str]] = []
    current = "background"
    cursor = 0
    for index, region in boundaries:
        labels.extend((current, line) for line in lines[cursor:index])
        labels.append((f"{region}_heading", lines[index]))
        current = region
        cursor = index + 1
    labels.extend((current, line) for line in lines[cursor:])
    return labels


def segment_sections(doc_text: str, rules: Optional[SegmentationRules] = None) -> CaseSections:
    """
    Segment a case document into background, analysis and conclusion.

    Analysis and conclusion lines are sentence-split line by line. The
    conclusion heading line opens ``conclusion_sentences`` so that judgement
    extraction can locate the text following it.

    Args:
        doc_text (str): Document text (French lines already removed).
        rules (Optional[SegmentationRules]): Heading rules.

    Returns:
        CaseSections: The segmented case.
    """
    rules = rules or SegmentationRules()
    background: List[str] = []
    analysis: List[str] = []
    conclusion: List[str] = []

    for label, line in partition_lines(doc_text, rules):
        if label == "background":
            background.append(line)
        elif label == "analysis":
            analysis.extend(split_sentences(line, rules.abbreviations))
        elif label == "conclusion":
            conclusion.extend(split_sentences(line, rules.abbreviations))
        elif label == "conclusion_heading":
            conclusion.append(line.strip())

    return CaseSections(
        background="".join(background).strip(),
        analysis_sentences=analysis,
        conclusion_sentences=conclusion
    )

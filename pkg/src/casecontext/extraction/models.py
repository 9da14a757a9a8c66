"""
Data models for extracted legal elements and relation triplets.
"""
import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Pattern, Sequence, Tuple

from casecontext.errors import ExtractionError

DEFAULT_PLACEHOLDER_TOKENS: Tuple[str, ...] = ("FRAGMENT_SUPPRESSED",)
DEFAULT_JUDGEMENT_HEADINGS: Tuple[str, ...] = (r"judg(?:e)?ment", r"order")
DEFAULT_ATTRIBUTION_PATTERNS: Tuple[str, ...] = (r"^(?:editor|solicitors?|counsel)\b",)

TRIPLET_ORIGINS = ("builtin", "imported")
TRIPLET_FIELDS = ("facts", "issues")


@dataclass(frozen=True)
class PlaceholderConfig:
    """
    Literal placeholder tokens that mark a sentence as a legal issue.
    """
    placeholder_tokens: Tuple[str, ...] = DEFAULT_PLACEHOLDER_TOKENS
    match_mode: str = "substring"

    def __post_init__(self):
        object.__setattr__(self, "placeholder_tokens", tuple(self.placeholder_tokens))
        if not self.placeholder_tokens:
            raise ExtractionError("placeholder_tokens must not be empty")
        if any(not token for token in self.placeholder_tokens):
            raise ExtractionError("placeholder tokens must be non-empty strings")
        if self.match_mode != "substring":
            raise ExtractionError(f"unsupported match_mode '{self.match_mode}'")


def _compile(patterns: Sequence[str]) -> Tuple[Pattern[str], ...]:
    try:
        return tuple(re.compile(p, re.IGNORECASE) for p in patterns)
    except re.error as exc:
        raise ExtractionError(f"invalid pattern: {exc}") from exc


@dataclass(frozen=True)
class JudgementRules:
    """
    Heading patterns that open the judgement and attribution patterns whose
    sentences are trimmed from its end.

    Heading patterns must match a whole normalized heading; attribution
    patterns are searched from the start of a sentence.
    """
    heading_patterns: Tuple[str, ...] = DEFAULT_JUDGEMENT_HEADINGS
    attribution_patterns: Tuple[str, ...] = DEFAULT_ATTRIBUTION_PATTERNS
    _headings: Tuple[Pattern[str], ...] = field(init=False, repr=False, compare=False)
    _attributions: Tuple[Pattern[str], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_headings", _compile(self.heading_patterns))
        object.__setattr__(self, "_attributions", _compile(self.attribution_patterns))

    def is_heading(self, key: str) -> bool:
        return bool(key) and any(p.fullmatch(key) for p in self._headings)

    def is_attribution(self, sentence: str) -> bool:
        return any(p.search(sentence) for p in self._attributions)


@dataclass(frozen=True)
class LegalElements:
    """
    Facts, issues and judgement of one case, plus the generated reasoning.
    """
    case_id: str
    facts: str
    issues: List[str]
    judgement: str
    reasoning: Optional[str] = None
    flags: List[str] = field(default_factory=list)

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'LegalElements':
        """
        Create LegalElements from a persisted record.

        Args:
            data (Dict[str, Any]): Record with case_id, facts, issues, judgement,
                reasoning and flags.

        Returns:
            LegalElements: A LegalElements instance.
        """
        return cls(
            case_id=data['case_id'],
            facts=data.get('facts', ''),
            issues=list(data.get('issues', [])),
            judgement=data.get('judgement', ''),
            reasoning=data.get('reasoning'),
            flags=list(data.get('flags', []))
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "facts": self.facts,
            "issues": list(self.issues),
            "judgement": self.judgement,
            "reasoning": self.reasoning,
            "flags": list(self.flags),
        }

    def with_reasoning(self, reasoning: str, flags: Sequence[str] = ()) -> 'LegalElements':
        merged = list(self.flags) + [f for f in flags if f not in self.flags]
        return replace(self, reasoning=reasoning, flags=merged)


@dataclass(frozen=True)
class RelationTriplet:
    """
    A (head, relation, tail) triplet and the index of its source sentence.
    """
    head: str
    relation: str
    tail: str
    source_sentence_index: int = 0

    def key(self) -> Tuple[str, str, str]:
        return (self.head, self.relation, self.tail)

    def render(self) -> str:
        return f"({self.head}, {self.relation}, {self.tail})"

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'RelationTriplet':
        return cls(
            head=data['head'],
            relation=data['relation'],
            tail=data['tail'],
            source_sentence_index=int(data.get('sentence_index', 0))
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "head": self.head,
            "relation": self.relation,
            "tail": self.tail,
            "sentence_index": self.source_sentence_index,
        }


@dataclass(frozen=True)
class TripletSet:
    """
    Ordered relation triplets drawn from a case's facts or issues.

    Duplicated (head, relation, tail) triples collapse to their first occurrence.
    """
    triplets: List[RelationTriplet] = field(default_factory=list)
    origin: str = "builtin"
    source_field: str = "facts"

    def __post_init__(self):
        if self.origin not in TRIPLET_ORIGINS:
            raise ExtractionError(f"unknown triplet origin '{self.origin}'")
        if self.source_field not in TRIPLET_FIELDS:
            raise ExtractionError(f"unknown triplet source field '{self.source_field}'")
        seen = set()
        unique = []
        for triplet in self.triplets:
            if triplet.key() not in seen:
                seen.add(triplet.key())
                unique.append(triplet)
        object.__setattr__(self, "triplets", unique)

    def __len__(self) -> int:
        return len(self.triplets)

    def __iter__(self):
        return iter(self.triplets)

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'TripletSet':
        return cls(
            triplets=[RelationTriplet.from_record(t) for t in data.get('triplets', [])],
            origin=data.get('origin', 'builtin'),
            source_field=data.get('source_field', 'facts')
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "origin": self.origin,
            "source_field": self.source_field,
            "triplets": [t.to_record() for t in self.triplets],
        }


@dataclass(frozen=True)
class CaseTriplets:
    """
    The two triplet sets of one case.
    """
    case_id: str
    r_fact: TripletSet
    r_issue: TripletSet

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'CaseTriplets':
        return cls(
            case_id=data['case_id'],
            r_fact=TripletSet.from_record(data['r_fact']),
            r_issue=TripletSet.from_record(data['r_issue'])
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "r_fact": self.r_fact.to_record(),
            "r_issue": self.r_issue.to_record(),
        }

"""
Line-level removal of French text from case documents.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, Optional

from casecontext.errors import CorpusError
from casecontext.utils.helpers import load_resource_lines, word_tokens


@lru_cache(maxsize=1)
def default_french_words() -> FrozenSet[str]:
    """
    The shipped 50-word list of French function words.
    """
    return frozenset(load_resource_lines("french_function_words.txt"))


@dataclass(frozen=True)
class LanguageFilterConfig:
    """
    Settings for the French line filter.

    A line is dropped when the share of its words found in ``french_words``
    strictly exceeds ``threshold``.
    """
    french_words: FrozenSet[str] = field(default_factory=default_french_words)
    threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise CorpusError(f"language threshold must lie in [0, 1], got {self.threshold}")
        if not self.french_words:
            raise CorpusError("the French function-word list is empty")


def french_ratio(line: str, french_words: FrozenSet[str]) -> float:
    """
    Share of a line's words that are French function words (0.0 for no words).
    """
    words = word_tokens(line)
    if not words:
        return 0.0
    return sum(1 for w in words if w in french_words) / len(words)


def strip_non_english(text: str, config: Optional[LanguageFilterConfig] = None) -> str:
    """
    Remove French lines from a document.

    Every kept line, line ending included, is returned byte-identical.

    Args:
        text (str): Raw document text.
        config (Optional[LanguageFilterConfig]): Word list and threshold.

    Returns:
        str: The text without lines whose French ratio exceeds the threshold.
    """
    config = config or LanguageFilterConfig()
    kept = [
        line for line in text.splitlines(keepends=True)
        if french_ratio(line, config.french_words) <= config.threshold
    ]
    return "".join(kept)

"""
Extraction of legal facts, issues and judgement from segmented cases.
"""
import logging
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

from tqdm import tqdm

from casecontext.api.models import ChatRequest, DecodeParams
from casecontext.corpus.models import CaseDocument, CaseSections
from casecontext.corpus.segment import heading_key
from casecontext.encoding.templates import render_fact_prompt
from casecontext.extraction.models import JudgementRules, LegalElements, PlaceholderConfig

if TYPE_CHECKING:
    from casecontext.api.gateway import Gateway

logger = logging.getLogger(__name__)


def extract_issues(sections: CaseSections, ph: Optional[PlaceholderConfig] = None) -> List[str]:
    """
    Select the analysis sentences that contain a placeholder token.

    Args:
        sections (CaseSections): Segmented case.
        ph (Optional[PlaceholderConfig]): Placeholder tokens.

    Returns:
        List[str]: Matching sentences in document order.
    """
    ph = ph or PlaceholderConfig()
    return [
        sentence for sentence in sections.analysis_sentences
        if any(token in sentence for token in ph.placeholder_tokens)
    ]


def extract_judgement(sections: CaseSections, rules: Optional[JudgementRules] = None) -> str:
    """
    Join the conclusion sentences that follow the first judgement heading.

    Further heading sentences are dropped, and so is the run of attribution
    sentences after the last dispositive sentence. Attribution-like
    sentences earlier in the judgement are kept.
    Returns an empty string when no judgement heading is present.

    Args:
        sections (CaseSections): Segmented case.
        rules (Optional[JudgementRules]): Heading and attribution patterns.

    Returns:
        str: The judgement text.
    """
    rules = rules or JudgementRules()
    sentences = sections.conclusion_sentences
    start = next(
        (i for i, sentence in enumerate(sentences) if rules.is_heading(heading_key(sentence))),
        None
    )
    if start is None:
        return ""
    kept = [sentence for sentence in sentences[start + 1:] if not rules.is_heading(heading_key(sentence))]
    while kept and rules.is_attribution(kept[-1]):
        kept.pop()
    return " ".join(kept)


def fact_request(background: str, decode: Optional[DecodeParams] = None) -> ChatRequest:
    """
    Build the fact-summarization request for a background section.
    """
    return ChatRequest(
        system_prompt="",
        user_prompt=render_fact_prompt(background),
        decode_params=decode or DecodeParams()
    )


def extract_facts(sections: CaseSections, gateway: 'Gateway', decode: Optional[DecodeParams] = None) -> str:
    """
    Summarize the background section through the chat gateway.

    Args:
        sections (CaseSections): Segmented case.
        gateway (Gateway): Chat gateway; responses are cached by request hash.
        decode (Optional[DecodeParams]): Decoding parameters.

    Returns:
        str: The fact summary, or an empty string for an empty background.
    """
    if not sections.background.strip():
        return ""
    return gateway.chat_complete(fact_request(sections.background, decode))


def extract_elements(
    cases: Sequence[CaseDocument],
    gateway: 'Gateway',
    ph: Optional[PlaceholderConfig] = None,
    rules: Optional[JudgementRules] = None,
    decode: Optional[DecodeParams] = None
) -> List[LegalElements]:
    """
    Extract facts, issues and judgement for every case.

    Fact summaries are requested concurrently through ``gateway.chat_many``.

    Args:
        cases (Sequence[CaseDocument]): Cases in output order.
        gateway (Gateway): Chat gateway.
        ph (Optional[PlaceholderConfig]): Placeholder tokens.
        rules (Optional[JudgementRules]): Judgement rules.
        decode (Optional[DecodeParams]): Decoding parameters.

    Returns:
        List[LegalElements]: One record per case, reasoning unset.
    """
    pending: Dict[int, ChatRequest] = {
        i: fact_request(case.sections.background, decode)
        for i, case in enumerate(cases)
        if case.sections.background.strip()
    }
    order = sorted(pending)
    summaries = dict(zip(order, gateway.chat_many([pending[i] for i in order], desc="facts")))

    elements = []
    for i, case in enumerate(tqdm(cases, desc="elements", disable=None)):
        judgement = extract_judgement(case.sections, rules)
        flags = []
        if not judgement:
            flags.append("no_judgement")
            logger.warning("No judgement heading found in case '%s'", case.case_id)
        if i not in pending:
            flags.append("empty_background")
        elements.append(LegalElements(
            case_id=case.case_id,
            facts=summaries.get(i, ""),
            issues=extract_issues(case.sections, ph),
            judgement=judgement,
            flags=flags
        ))
    return elements

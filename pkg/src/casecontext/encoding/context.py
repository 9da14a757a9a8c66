"""
Reasoning generation and contextualised case rendering.
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple

from casecontext.api.models import ChatRequest, DecodeParams
from casecontext.encoding.templates import REASONING_SLOTS, TRIPLET_SLOTS, encoding_template, reasoning_template
from casecontext.errors import EncodingError
from casecontext.extraction.models import CaseTriplets, LegalElements, TripletSet
from casecontext.extraction.triplets import EMPTY_SENTINEL, render_triplets

if TYPE_CHECKING:
    from casecontext.api.gateway import Gateway

logger = logging.getLogger(__name__)

NO_JUDGEMENT_SENTINEL = "(no judgement extracted)"
DEFAULT_BUDGET = 2048


@dataclass(frozen=True)
class ContextualisedCase:
    """
    A case rendered through an encoding template, ready to embed.
    """
    case_id: str
    template_id: str
    system_text: str
    user_text: str
    truncated: bool
    variant: str = "full"

    @property
    def embedding_text(self) -> str:
        """
        The single string sent to the embedding backend.
        """
        return f"{self.system_text}\n{self.user_text}"

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'ContextualisedCase':
        return cls(
            case_id=data['case_id'],
            template_id=data['template_id'],
            system_text=data['system_text'],
            user_text=data['user_text'],
            truncated=bool(data['truncated']),
            variant=data.get('variant', "full")
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "template_id": self.template_id,
            "system_text": self.system_text,
            "user_text": self.user_text,
            "truncated": self.truncated,
            "variant": self.variant,
        }


def truncate_to_budget(text: str, budget: int) -> Tuple[str, bool]:
    """
    Keep the first ``budget`` whitespace tokens of an over-long text.

    Args:
        text (str): Text to check.
        budget (int): Maximum number of whitespace tokens, at least 1.

    Returns:
        Tuple[str, bool]: The text (tokens joined by single spaces when cut)
            and whether it was truncated.
    """
    if budget < 1:
        raise EncodingError(f"token budget must be >= 1, got {budget}")
    tokens = text.split()
    if len(tokens) <= budget:
        return text, False
    return " ".join(tokens[:budget]), True


def _or_none(value: str) -> str:
    return value if value.strip() else EMPTY_SENTINEL


def slot_values(elements: LegalElements, r_fact: TripletSet, r_issue: TripletSet) -> Dict[str, str]:
    """
    Slot values shared by the reasoning and encoding templates.

    Empty facts, issues and triplet sets read ``(none)``; an empty judgement
    reads ``(no judgement extracted)``.
    """
    slots = {
        "c_fact": _or_none(elements.facts),
        "r_fact": render_triplets(r_fact),
        "c_issue": _or_none(" ".join(elements.issues)),
        "r_issue": render_triplets(r_issue),
        "c_jud": elements.judgement if elements.judgement.strip() else NO_JUDGEMENT_SENTINEL,
    }
    if elements.reasoning is not None:
        slots["c_reason"] = _or_none(elements.reasoning)
    return slots


def reasoning_request(
    elements: LegalElements,
    r_fact: TripletSet,
    r_issue: TripletSet,
    decode: Optional[DecodeParams] = None
) -> ChatRequest:
    """
    Build the reasoning-generation request for one case.
    """
    rendered = reasoning_template().render(**slot_values(elements, r_fact, r_issue))
    return ChatRequest(rendered["system"], rendered["user"], decode or DecodeParams())


def generate_reasoning(
    elements: LegalElements,
    r_fact: TripletSet,
    r_issue: TripletSet,
    gateway: 'Gateway',
    decode: Optional[DecodeParams] = None
) -> str:
    """
    Ask the chat backend how the facts and issues lead to the judgement.

    Args:
        elements (LegalElements): Extracted elements.
        r_fact (TripletSet): Fact triplets.
        r_issue (TripletSet): Issue triplets.
        gateway (Gateway): Chat gateway.
        decode (Optional[DecodeParams]): Decoding parameters.

    Returns:
        str: The generated reasoning.
    """
    return gateway.chat_complete(reasoning_request(elements, r_fact, r_issue, decode))


def generate_reasoning_many(
    elements: Sequence[LegalElements],
    triplets: Dict[str, CaseTriplets],
    gateway: 'Gateway',
    decode: Optional[DecodeParams] = None
) -> List[LegalElements]:
    """
    Generate reasoning for many cases concurrently.

    Cases without a judgement still get reasoning and carry the
    ``reasoning_without_judgement`` flag.

    Returns:
        List[LegalElements]: Elements with ``reasoning`` filled, input order.
    """
    requests = []
    for item in elements:
        case = triplets[item.case_id]
        requests.append(reasoning_request(item, case.r_fact, case.r_issue, decode))
    completions = gateway.chat_many(requests, desc="reasoning")

    reasoned = []
    for item, reasoning in zip(elements, completions):
        flags = []
        if not item.judgement.strip():
            logger.warning("Reasoning for case '%s' generated without a judgement", item.case_id)
            flags.append("reasoning_without_judgement")
        reasoned.append(item.with_reasoning(reasoning, flags))
    return reasoned


def context_variant(include_triplets: bool = True, include_reasoning: bool = True) -> str:
    """
    Name of the context variant: ``full`` or the components left out.
    """
    dropped = [name for name, kept in (("triplets", include_triplets), ("reasoning", include_reasoning)) if not kept]
    return "no_" + "_".join(dropped) if dropped else "full"


def render_context(
    elements: LegalElements,
    r_fact: TripletSet,
    r_issue: TripletSet,
    template_id: str = "default",
    budget: int = DEFAULT_BUDGET,
    include_triplets: bool = True,
    include_reasoning: bool = True
) -> ContextualisedCase:
    """
    Render a case through an encoding template.

    The judgement is never part of the rendered context. The user text is
    tail-truncated to ``budget`` whitespace tokens. Switching off triplets
    or reasoning drops the template lines holding those slots.

    Args:
        elements (LegalElements): Extracted elements; reasoning must be
            present unless ``include_reasoning`` is off.
        r_fact (TripletSet): Fact triplets.
        r_issue (TripletSet): Issue triplets.
        template_id (str): ``default``, ``prompt1`` or ``prompt2``.
        budget (int): Token budget of the user text.
        include_triplets (bool): Keep the fact and issue triplet lines.
        include_reasoning (bool): Keep the reasoning line.

    Returns:
        ContextualisedCase: The rendered case.
    """
    template = encoding_template(template_id)
    dropped = (TRIPLET_SLOTS if not include_triplets else ()) + (REASONING_SLOTS if not include_reasoning else ())
    if dropped:
        template = template.without_slots(*dropped)
    if include_reasoning and elements.reasoning is None:
        raise EncodingError(f"case '{elements.case_id}' has no reasoning; run stage 'reason' first")
    slots = slot_values(elements, r_fact, r_issue)
    del slots["c_jud"]
    rendered = template.render(**slots)
    user_text, truncated = truncate_to_budget(rendered["user"], budget)
    return ContextualisedCase(
        case_id=elements.case_id,
        template_id=template_id,
        system_text=rendered["system"],
        user_text=user_text,
        truncated=truncated,
        variant=context_variant(include_triplets, include_reasoning)
    )

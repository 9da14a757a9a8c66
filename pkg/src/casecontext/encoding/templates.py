"""
Prompt templates shipped as resource files.
"""
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict

from casecontext.errors import EncodingError

TEMPLATE_IDS = ("default", "prompt1", "prompt2")
TRIPLET_SLOTS = ("r_fact", "r_issue")
REASONING_SLOTS = ("c_reason",)

_SLOT_RE = re.compile(r"\{(\w+)\}")


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """
    Read ``encoding/templates/<name>.txt`` without its final newline.
    """
    path = resources.files("casecontext.encoding").joinpath("templates", f"{name}.txt")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise EncodingError(f"unknown template '{name}'") from exc
    return text[:-1] if text.endswith("\n") else text


def render_template(template: str, **slots: str) -> str:
    """
    Fill ``{slot}`` markers in a single pass.

    Slot values are inserted verbatim; braces inside values are never expanded.

    Args:
        template (str): Template text.
        **slots (str): Slot values.

    Returns:
        str: The rendered text.
    """
    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name not in slots:
            raise EncodingError(f"template slot '{name}' has no value")
        return slots[name]

    return _SLOT_RE.sub(substitute, template)


@dataclass(frozen=True)
class PromptTemplate:
    """
    A system prompt and a user prompt template.
    """
    template_id: str
    system: str
    user: str

    def render(self, **slots: str) -> Dict[str, str]:
        return {"system": self.system, "user": render_template(self.user, **slots)}

    def without_slots(self, *names: str) -> 'PromptTemplate':
        """
        The same template with every user line that mentions one of ``names`` removed.
        """
        markers = tuple(f"{{{name}}}" for name in names)
        lines = [line for line in self.user.split("\n") if not any(m in line for m in markers)]
        return PromptTemplate(self.template_id, self.system, "\n".join(lines))


def encoding_template(template_id: str) -> PromptTemplate:
    """
    The case-encoding template for ``default``, ``prompt1`` or ``prompt2``.
    """
    if template_id not in TEMPLATE_IDS:
        raise EncodingError(f"unknown template_id '{template_id}'; expected one of {', '.join(TEMPLATE_IDS)}")
    return PromptTemplate(template_id, load_template("encoding_system"), load_template(template_id))


def reasoning_template() -> PromptTemplate:
    """
    The template that asks for reasoning from facts and issues to the judgement.
    """
    return PromptTemplate("reasoning", load_template("reasoning_system"), load_template("reasoning_user"))


def render_fact_prompt(background: str) -> str:
    """
    Render the fact-summarization prompt for a background section.
    """
    return render_template(load_template("fact"), c_bg=background)

"""
Generator for the bundled clustered corpus used by smoke runs and tests.
"""
import logging
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from casecontext.errors import CorpusError
from casecontext.evaluation.qrels import Qrels, write_qrels

logger = logging.getLogger(__name__)

TOPIC_VOCABULARIES: Dict[str, List[str]] = {
    "immigration": [
        "refugee", "deportation", "visa", "asylum", "removal", "persecution",
        "sponsorship", "citizenship", "border", "detention", "residency", "humanitarian",
    ],
    "taxation": [
        "taxation", "reassessment", "deduction", "revenue", "audit", "income",
        "taxpayer", "remittance", "payroll", "exemption", "dividend", "shareholder",
    ],
    "patents": [
        "patent", "invention", "infringement", "novelty", "obviousness", "royalty",
        "prototype", "inventor", "compound", "formulation", "manufacturer", "pharmaceutical",
    ],
    "employment": [
        "dismissal", "grievance", "wages", "employer", "union", "arbitration",
        "overtime", "pension", "harassment", "seniority", "layoff", "workplace",
    ],
    "environment": [
        "fisheries", "habitat", "pollution", "salmon", "emissions", "wetland",
        "pipeline", "contamination", "wildlife", "watershed", "discharge", "sediment",
    ],
    "indigenous": [
        "treaty", "reserve", "consultation", "indigenous", "hunting", "council",
        "membership", "ancestral", "elders", "territory", "trapline", "governance",
    ],
}

SHARED_WORDS = [
    "decision", "tribunal", "evidence", "minister", "officer", "statute",
    "hearing", "record", "submission", "remedy", "standard", "application",
]

_VERBS = ["filed", "challenged", "disputed", "contested", "described", "reported"]
_PARTIES = ["applicant", "respondent", "claimant", "appellant"]
_OUTCOMES = ["dismissed", "allowed", "granted", "remitted"]
_EDITORS = ["Editor: J. Smith", "Editor: K. Tremblay", "Solicitors of record: Lee and Roy"]
_FRENCH_LINES = [
    "Le demandeur a déposé un appel de la décision.",
    "La cour est saisie de la demande et elle ne sera pas accueillie.",
]


def _pick(rng: np.random.Generator, words: List[str], size: int) -> List[str]:
    return [words[i] for i in rng.choice(len(words), size=size, replace=False)]


def _case_text(rng: np.random.Generator, topic: str, vocabulary: List[str]) -> str:
    words = _pick(rng, vocabulary, 8)
    shared = _pick(rng, SHARED_WORDS, 4)
    party = _PARTIES[int(rng.integers(len(_PARTIES)))]
    verb = _VERBS[int(rng.integers(len(_VERBS)))]
    outcome = _OUTCOMES[int(rng.integers(len(_OUTCOMES)))]

    lines = [
        f"Federal Court matter concerning {topic}",
        "BACKGROUND",
        f"The {party} {verb} the {words[0]} {shared[0]} concerning {words[1]} and {words[2]}.",
        f"The {shared[1]} reviewed the {words[3]} {words[4]} before the {shared[2]}.",
    ]
    if rng.random() < 0.5:
        lines.append(_FRENCH_LINES[int(rng.integers(len(_FRENCH_LINES)))])
    lines += [
        "ANALYSIS",
        f"The {words[5]} question turns on the {shared[3]} applied to the {words[0]}.",
        f"The court in FRAGMENT_SUPPRESSED considered the {words[1]} {words[6]} issue.",
        f"Counsel relied on FRAGMENT_SUPPRESSED regarding {words[2]} and {words[7]}.",
        f"The {words[4]} argument was not persuasive.",
        "JUDGMENT",
        f"The application concerning the {words[3]} {words[5]} is {outcome}.",
        _EDITORS[int(rng.integers(len(_EDITORS)))],
    ]
    return "\n".join(lines) + "\n"


def write_synthetic_corpus(
    out_dir: Union[str, Path],
    n_topics: int = 6,
    per_topic: int = 10,
    queries_per_topic: int = 2,
    seed: int = 13
) -> Qrels:
    """
    Write a clustered corpus of ``n_topics * per_topic`` case files plus ``qrels.tsv``.

    The first ``queries_per_topic`` cases of each topic are queries; each
    query is relevant to every other case of its topic.

    Args:
        out_dir (Union[str, Path]): Target directory (created if missing).
        n_topics (int): Number of topic clusters, at most the bundled six.
        per_topic (int): Cases per topic.
        queries_per_topic (int): Queries per topic.
        seed (int): Generator seed.

    Returns:
        Qrels: The written relevance judgements.
    """
    if not 1 <= n_topics <= len(TOPIC_VOCABULARIES):
        raise CorpusError(f"n_topics must lie in [1, {len(TOPIC_VOCABULARIES)}]")
    if not 1 <= queries_per_topic < per_topic:
        raise CorpusError("queries_per_topic must be at least 1 and below per_topic")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    pairs = []
    topics = list(TOPIC_VOCABULARIES.items())[:n_topics]
    for t, (topic, vocabulary) in enumerate(topics):
        ids = [f"{t * per_topic + i + 1:06d}" for i in range(per_topic)]
        for case_id in ids:
            (out / f"{case_id}.txt").write_text(_case_text(rng, topic, vocabulary), encoding="utf-8", newline="\n")
        for query_id in ids[:queries_per_topic]:
            pairs.extend((query_id, other) for other in ids if other != query_id)

    qrels = Qrels.from_pairs(pairs)
    write_qrels(out / "qrels.tsv", qrels)
    logger.info("Wrote synthetic corpus of %d cases to %s", n_topics * per_topic, out)
    return qrels

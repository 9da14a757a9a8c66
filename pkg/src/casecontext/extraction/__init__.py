"""
Legal element and relation triplet extraction.
"""
from casecontext.extraction.models import (
    CaseTriplets,
    JudgementRules,
    LegalElements,
    PlaceholderConfig,
    RelationTriplet,
    TripletSet,
)

__all__ = [
    "CaseTriplets",
    "JudgementRules",
    "LegalElements",
    "PlaceholderConfig",
    "RelationTriplet",
    "TripletSet",
]

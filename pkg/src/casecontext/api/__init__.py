"""
Chat and embedding backends behind a caching gateway.
"""
from casecontext.api.client import ChatApiClient
from casecontext.api.gateway import Gateway
from casecontext.api.mock import MockBackend
from casecontext.api.models import ChatRequest, DecodeParams, EmbeddingRequest

__all__ = ["ChatApiClient", "ChatRequest", "DecodeParams", "EmbeddingRequest", "Gateway", "MockBackend"]

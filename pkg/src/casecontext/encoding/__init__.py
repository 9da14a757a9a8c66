"""
Reasoning generation, contextualised case rendering and case encoding.
"""
from casecontext.encoding.adapter import Adapter, load_checkpoint, save_checkpoint
from casecontext.encoding.backends import GatewayEmbeddingBackend, LocalEmbeddingBackend
from casecontext.encoding.context import (
    ContextualisedCase,
    generate_reasoning,
    render_context,
    truncate_to_budget,
)
from casecontext.encoding.local_embed import local_embed
from casecontext.encoding.store import CaseEmbedding, EmbeddingStore, encode_case, load_store, save_store

__all__ = [
    "Adapter",
    "CaseEmbedding",
    "ContextualisedCase",
    "EmbeddingStore",
    "GatewayEmbeddingBackend",
    "LocalEmbeddingBackend",
    "encode_case",
    "generate_reasoning",
    "load_checkpoint",
    "load_store",
    "local_embed",
    "render_context",
    "save_checkpoint",
    "save_store",
    "truncate_to_budget",
]

"""
BM25 and dense retrieval, hard-negative mining and retrieval runs.
"""
from casecontext.retrieval.bm25 import (
    Analyzer,
    Bm25Index,
    Bm25Params,
    bm25_run,
    bm25_score,
    bm25_top_k,
    build_bm25,
    mine_hard_negatives,
)
from casecontext.retrieval.models import RankedList, RetrievalRun, read_run, write_run
from casecontext.retrieval.vector_index import produce_run, search, similarity

__all__ = [
    "Analyzer",
    "Bm25Index",
    "Bm25Params",
    "RankedList",
    "RetrievalRun",
    "bm25_run",
    "bm25_score",
    "bm25_top_k",
    "build_bm25",
    "mine_hard_negatives",
    "produce_run",
    "read_run",
    "search",
    "similarity",
    "write_run",
]

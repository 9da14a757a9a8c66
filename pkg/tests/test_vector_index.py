import numpy as np
import pytest

from casecontext.encoding.store import CaseEmbedding, EmbeddingStore
from casecontext.errors import RetrievalError
from casecontext.retrieval.vector_index import produce_run, score_matrix, search, similarity


def _store(rows, ids=None):
    matrix = np.asarray(rows, dtype=np.float64)
    return EmbeddingStore(ids or [f"c{i}" for i in range(len(matrix))], matrix, "test", "default")


class TestSimilarity:

    def test_dot_and_cosine(self):
        assert similarity([1.0, 2.0], [3.0, 4.0], "dot") == 11.0
        np.testing.assert_allclose(similarity([1.0, 0.0], [1.0, 1.0]), 1 / np.sqrt(2))
        assert similarity([2.0, 0.0], [-5.0, 0.0]) == -1.0

    def test_errors(self):
        with pytest.raises(RetrievalError, match="dimension mismatch"):
            similarity([1.0], [1.0, 2.0])
        with pytest.raises(RetrievalError, match="zero vector"):
            similarity([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(RetrievalError, match="unknown similarity"):
            similarity([1.0], [1.0], "l2")

    def test_matrix_agrees_with_pairwise(self):
        rng = np.random.default_rng(42)
        matrix = rng.standard_normal((7, 5))
        query = rng.standard_normal(5)
        for kind in ("dot", "cosine"):
            np.testing.assert_allclose(
                score_matrix(query, matrix, kind), [similarity(query, row, kind) for row in matrix]
            )


class TestSearch:

    def test_query_excluded_and_ties_by_id(self):
        store = _store([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], ["q", "b", "a", "z"])
        ranked = search(store.get("q"), store, k=3)
        assert ranked.case_ids() == ["a", "b", "z"]
        np.testing.assert_allclose([s for _, s in ranked.entries], [1.0, 1.0, 0.0])

    def test_extra_exclusions_and_depth(self):
        store = _store([[1.0, 0.0], [0.9, 0.1], [0.5, 0.5], [0.0, 1.0]])
        assert search(store.get("c0"), store, k=2, exclude={"c1"}).case_ids() == ["c2", "c3"]

    def test_nothing_left(self):
        store = _store([[1.0, 0.0]])
        assert len(search(store.get("c0"), store, k=5)) == 0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(2, 15))
            store = _store(rng.standard_normal((n, 4)))
            k = int(rng.integers(1, n + 1))
            query = store.get("c0")
            scores = {cid: similarity(query.vector, store.vector(cid)) for cid in store.ids if cid != "c0"}
            expected = sorted(scores, key=lambda cid: (-scores[cid], cid))[:k]
            assert search(query, store, k).case_ids() == expected

    def test_bad_depth(self):
        store = _store([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(RetrievalError):
            search(store.get("c0"), store, k=0)

    def test_query_dimension_checked(self):
        store = _store([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(RetrievalError, match="dimension mismatch"):
            search(CaseEmbedding("q", np.ones(3), "test"), store, k=1)

    def test_two_hundred_candidates(self):
        rng = np.random.default_rng(42)
        store = _store(rng.standard_normal((201, 8)))
        query = store.get("c0")
        scores = store.project(None, "cosine").matrix[1:] @ (query.vector / np.linalg.norm(query.vector))
        expected = [store.ids[1 + i] for i in np.argsort(-scores, kind="stable")[:20]]
        assert search(query, store, k=20).case_ids() == expected


    def test_candidate_order_does_not_matter(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            store = _store(rng.standard_normal((12, 5)))
            order = rng.permutation(len(store.ids))
            shuffled = _store(store.matrix[order], [store.ids[i] for i in order])
            query = store.get("c3")
            ranked, reranked = search(query, store, k=6), search(query, shuffled, k=6)
            assert reranked.case_ids() == ranked.case_ids()
            np.testing.assert_allclose([s for _, s in reranked.entries], [s for _, s in ranked.entries])

    def test_dot_ranks_like_cosine_on_normalized_vectors(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            store = _store(rng.standard_normal((30, 6))).project(None, "cosine")
            query = store.get("c0")
            by_dot = search(query, store, k=10, kind="dot")
            by_cosine = search(query, store, k=10, kind="cosine")
            assert by_dot.case_ids() == by_cosine.case_ids()
            np.testing.assert_allclose([s for _, s in by_dot.entries], [s for _, s in by_cosine.entries])


class TestProduceRun:

    def test_one_list_per_query(self):
        store = _store([[1.0, 0.0], [0.8, 0.2], [0.0, 1.0], [0.1, 0.9]])
        run = produce_run(["c0", "c2"], store, k=2, settings={"system": "base"})
        assert run.get("c0").case_ids() == ["c1", "c3"]
        assert run.get("c2").case_ids() == ["c3", "c1"]
        assert run.settings["system"] == "base" and run.settings["k"] == 2

    def test_candidate_restriction(self):
        store = _store([[1.0, 0.0], [0.8, 0.2], [0.0, 1.0]])
        run = produce_run(["c0"], store, k=5, candidates=["c2"])
        assert run.get("c0").case_ids() == ["c2"]

    def test_fingerprint_tracks_settings(self):
        store = _store([[1.0, 0.0], [0.0, 1.0]])
        first = produce_run(["c0"], store, k=1)
        assert produce_run(["c0"], store, k=1).config_fingerprint == first.config_fingerprint
        assert produce_run(["c0"], store, k=1, kind="dot").config_fingerprint != first.config_fingerprint
        reduced = EmbeddingStore(store.ids, store.matrix, "test", "default", variant="no_triplets")
        assert produce_run(["c0"], reduced, k=1).config_fingerprint != first.config_fingerprint

    def test_missing_embeddings(self):
        store = _store([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(RetrievalError, match="missing embeddings for c7"):
            produce_run(["c7"], store, k=1)

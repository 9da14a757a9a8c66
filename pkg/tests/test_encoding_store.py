import numpy as np
import pytest

from casecontext.encoding.adapter import Adapter
from casecontext.encoding.backends import GatewayEmbeddingBackend, LocalEmbeddingBackend
from casecontext.encoding.context import ContextualisedCase
from casecontext.encoding.store import EmbeddingStore, encode_case, encode_contexts, load_store, save_store
from casecontext.errors import EncodingError, MissingArtifactError


def _contexts(texts, template_id="default"):
    return [ContextualisedCase(f"c{i}", template_id, "System.", text, False) for i, text in enumerate(texts)]


class TestEncodeContexts:

    def test_base_vectors_in_context_order(self):
        contexts = _contexts(["refugee claim", "patent dispute", "tax audit"])
        store = encode_contexts(contexts, LocalEmbeddingBackend(dim=64))
        assert store.ids == ["c0", "c1", "c2"]
        assert store.dimension == 64 and store.template_id == "default"
        assert store.adapter_version is None and not store.normalized
        np.testing.assert_allclose(store.vector("c1"), encode_case(contexts[1], LocalEmbeddingBackend(dim=64)).vector)

    def test_mixed_templates_rejected(self):
        with pytest.raises(EncodingError, match="mix templates"):
            encode_contexts(_contexts(["a"]) + _contexts(["b"], "prompt1"), LocalEmbeddingBackend(dim=16))

    def test_variant_recorded_and_uniform(self):
        reduced = [ContextualisedCase("a", "default", "System.", "x", False, "no_reasoning")]
        assert encode_contexts(reduced, LocalEmbeddingBackend(dim=16)).variant == "no_reasoning"
        with pytest.raises(EncodingError, match="mix variants"):
            encode_contexts(_contexts(["b"]) + reduced, LocalEmbeddingBackend(dim=16))

    def test_wordless_context_is_reported(self, caplog):
        contexts = [ContextualisedCase("c0", "default", "", " ... ", False)] + _contexts(["", "tax audit"])[1:]
        with caplog.at_level("WARNING", logger="casecontext.encoding.store"):
            store = encode_contexts(contexts, LocalEmbeddingBackend(dim=16))
        assert store.unnormalizable_ids() == ["c0"]
        assert store.metadata()["unnormalizable"] == ["c0"]
        assert "cannot be cosine-normalized: c0" in caplog.text
        with pytest.raises(EncodingError, match="case 'c0' has a zero vector"):
            store.project(None, "cosine")

    def test_gateway_backend_batches(self, mock_gateway):
        backend = GatewayEmbeddingBackend(mock_gateway, batch_size=2)
        store = encode_contexts(_contexts(["one", "two", "three"]), backend)
        assert store.matrix.shape == (3, 64)
        assert backend.dimension == 64
        assert mock_gateway.upstream_calls == 2


class TestProject:

    def test_cosine_rows_are_unit_norm(self):
        rng = np.random.default_rng(42)
        store = EmbeddingStore(["a", "b"], rng.standard_normal((2, 6)), "test", "default")
        projected = store.project(Adapter.initialize(6, 3, seed=0), "cosine")
        assert projected.dimension == 3 and projected.normalized
        assert projected.adapter_version == "init-seed0"
        np.testing.assert_allclose(np.linalg.norm(projected.matrix, axis=1), [1.0, 1.0])

    def test_dot_keeps_scale(self):
        store = EmbeddingStore(["a"], np.array([[3.0, 4.0]]), "test", "default")
        np.testing.assert_array_equal(store.project(None, "dot").matrix, [[3.0, 4.0]])

    def test_zero_vector_names_the_case(self):
        store = EmbeddingStore(["a", "empty"], np.array([[1.0, 0.0], [0.0, 0.0]]), "test", "default")
        with pytest.raises(EncodingError, match="case 'empty'"):
            store.project(None, "cosine")

    def test_unknown_kind(self):
        store = EmbeddingStore(["a"], np.ones((1, 2)), "test", "default")
        with pytest.raises(EncodingError, match="similarity kind"):
            store.project(None, "euclidean")

    def test_lookup_errors(self):
        store = EmbeddingStore(["a"], np.ones((1, 2)), "test", "default")
        with pytest.raises(EncodingError, match="no embedding for case 'b'"):
            store.vector("b")
        with pytest.raises(EncodingError, match="duplicate"):
            EmbeddingStore(["a", "a"], np.ones((2, 2)), "test", "default")


class TestPersistence:

    def test_save_and_load(self, tmp_path):
        store = encode_contexts(_contexts(["x y", "y z"]), LocalEmbeddingBackend(dim=16))
        save_store(tmp_path / "embeddings", "base", store)
        loaded = load_store(tmp_path / "embeddings", "base")
        assert loaded.ids == store.ids and loaded.backend_tag == "local-16-0"
        assert loaded.variant == "full"
        assert loaded.project(None, "cosine").variant == "full"
        np.testing.assert_array_equal(loaded.matrix, store.matrix)

    def test_missing_store_names_the_stage(self, tmp_path):
        with pytest.raises(MissingArtifactError, match="run stage 'encode' first"):
            load_store(tmp_path, "base")

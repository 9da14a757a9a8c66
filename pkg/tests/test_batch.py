import numpy as np
import pytest

from casecontext.encoding.store import EmbeddingStore
from casecontext.errors import BatchConstructionError, TrainingError
from casecontext.evaluation.qrels import Qrels
from casecontext.training.batch import TrainingExample, assemble_batch, effective_easy_negatives


@pytest.fixture
def store():
    ids = ["q1", "q2", "d1", "d2", "e1", "e2", "h1", "h2"]
    return EmbeddingStore(ids, np.eye(8), "test", "default")


class TestTrainingExample:

    def test_rejects_overlaps(self):
        with pytest.raises(BatchConstructionError, match="also a negative"):
            TrainingExample("q1", "d1", ["d1"])
        with pytest.raises(BatchConstructionError, match="overlap"):
            TrainingExample("q1", "d1", ["e1"], ["e1"])
        with pytest.raises(BatchConstructionError, match="own candidates"):
            TrainingExample("q1", "q1")


class TestEffectiveEasyNegatives:

    def test_in_batch_expansion(self):
        examples = [TrainingExample("q1", "d1", ["e1"], ["h1"]), TrainingExample("q2", "d2", ["e2"], ["h2"])]
        assert effective_easy_negatives(examples, 0) == ["e1", "d2", "e2", "h2"]
        assert effective_easy_negatives(examples, 1) == ["e2", "d1", "e1", "h1"]

    def test_never_own_positive_query_or_hard(self):
        examples = [TrainingExample("q1", "d1", [], ["h1"]), TrainingExample("q2", "h1", ["d1", "q1"])]
        assert effective_easy_negatives(examples, 0) == []

    def test_known_relevant_cases_excluded(self):
        examples = [TrainingExample("q1", "d1"), TrainingExample("q2", "d2", ["e2"])]
        qrels = Qrels.from_pairs([("q1", "d1"), ("q1", "d2")])
        assert effective_easy_negatives(examples, 0, qrels) == ["e2"]


class TestAssembleBatch:

    def test_rows_are_shared(self, store):
        examples = [TrainingExample("q1", "d1", ["e1"], ["h1"]), TrainingExample("q2", "d2", ["e1"], ["h2"])]
        batch = assemble_batch(examples, store)
        assert sorted(batch.ids) == sorted(set(batch.ids))
        assert batch.embeddings.shape == (len(batch.ids), 8)
        first = batch.items[0]
        assert [batch.ids[r] for r in first.candidate_rows] == ["d1", "e1", "d2", "h2", "h1"]
        assert first.n_easy == 3 and first.n_hard == 1
        np.testing.assert_array_equal(batch.embeddings[first.query_row], store.vector("q1"))

    def test_unknown_case(self, store):
        with pytest.raises(TrainingError, match="no embedding for case 'zz'"):
            assemble_batch([TrainingExample("q1", "zz")], store)

    def test_empty(self, store):
        with pytest.raises(TrainingError):
            assemble_batch([], store)

import numpy as np
import pytest

from casecontext.encoding.adapter import Adapter
from casecontext.encoding.store import EmbeddingStore
from casecontext.errors import DegenerateLossError
from casecontext.training.batch import TrainingExample, assemble_batch
from casecontext.training.loss import LossConfig, example_losses, loss_and_grad

STEP = 1e-4


def _random_batch(rng):
    ids = [f"c{i}" for i in range(8)]
    store = EmbeddingStore(ids, rng.standard_normal((8, 6)), "test", "default")
    order = rng.permutation(ids)
    examples = [
        TrainingExample(order[0], order[1], [order[2]], [order[3]]),
        TrainingExample(order[4], order[5], [], [order[6], order[7]]),
    ]
    return assemble_batch(examples, store)


def _mean_loss(batch, adapter, cfg):
    return float(np.mean(example_losses(batch, adapter, cfg)))


def _numeric(batch, adapter, cfg, name, index):
    plus = {"weights": adapter.weights.copy(), "bias": adapter.bias.copy()}
    minus = {"weights": adapter.weights.copy(), "bias": adapter.bias.copy()}
    h = STEP * max(1.0, abs(float(plus[name][index])))
    plus[name][index] += h
    minus[name][index] -= h
    return (
        _mean_loss(batch, Adapter(plus["weights"], plus["bias"]), cfg)
        - _mean_loss(batch, Adapter(minus["weights"], minus["bias"]), cfg)
    ) / (2 * h)


@pytest.mark.parametrize("kind", ["dot", "cosine"])
def test_gradient_matches_finite_differences(kind):
    """
    Analytic gradients agree with central differences on 20 random batches.
    """
    rng = np.random.default_rng(42)
    cfg = LossConfig(temperature=0.5, similarity_kind=kind)
    for _ in range(20):
        batch = _random_batch(rng)
        adapter = Adapter(0.5 * rng.standard_normal((6, 4)), 0.1 * rng.standard_normal(4))
        loss, grad = loss_and_grad(batch, adapter, cfg)
        np.testing.assert_allclose(loss, _mean_loss(batch, adapter, cfg))

        for name, analytic in (("weights", grad.weights), ("bias", grad.bias)):
            for flat in rng.choice(analytic.size, size=min(8, analytic.size), replace=False):
                index = np.unravel_index(flat, analytic.shape)
                numeric = _numeric(batch, adapter, cfg, name, index)
                scale = max(abs(numeric), abs(analytic[index]), 1e-3)
                assert abs(numeric - analytic[index]) / scale < 1e-4


def test_lone_example_without_negatives_is_rejected():
    store = EmbeddingStore(["q", "p"], np.eye(2), "test", "default")
    batch = assemble_batch([TrainingExample("q", "p", [], [])], store)
    adapter = Adapter(np.eye(2), np.zeros(2))
    with pytest.raises(DegenerateLossError, match="'q' has no negatives"):
        loss_and_grad(batch, adapter, LossConfig(temperature=0.5))

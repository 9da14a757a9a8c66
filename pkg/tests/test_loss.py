import math

import numpy as np
import pytest

from casecontext.errors import DegenerateLossError, TrainingError
from casecontext.training.loss import LossConfig, info_nce_loss


class TestInfoNceLoss:

    def test_worked_value(self):
        np.testing.assert_allclose(info_nce_loss(1.0, [0.0], [0.5], 1.0), 0.680276, atol=1e-6)

    @pytest.mark.parametrize("n_easy, n_hard", [(1, 0), (0, 1), (2, 3), (7, 1)])
    def test_equal_similarities(self, n_easy, n_hard):
        loss = info_nce_loss(0.3, [0.3] * n_easy, [0.3] * n_hard, 0.05)
        np.testing.assert_allclose(loss, math.log(1 + n_easy + n_hard))

    def test_decreases_with_positive_similarity(self):
        losses = [info_nce_loss(s, [0.2, 0.1], [0.4], 0.05) for s in np.linspace(-1, 1, 11)]
        assert all(a > b for a, b in zip(losses, losses[1:]))

    def test_stable_at_small_temperature(self):
        assert np.isfinite(info_nce_loss(1.0, [-1.0], [0.99], 1e-4))

    def test_no_negatives(self):
        with pytest.raises(DegenerateLossError):
            info_nce_loss(1.0, [], [], 0.05)

    def test_temperature_must_be_positive(self):
        with pytest.raises(TrainingError):
            info_nce_loss(1.0, [0.0], [], 0.0)
        with pytest.raises(TrainingError):
            LossConfig(temperature=-0.1)
        with pytest.raises(TrainingError):
            LossConfig(similarity_kind="l2")

    def test_negative_lists_are_symmetric(self):
        base = info_nce_loss(0.7, [0.1, 0.5], [0.3], 0.1)
        np.testing.assert_allclose(info_nce_loss(0.7, [0.5, 0.1], [0.3], 0.1), base)
        np.testing.assert_allclose(info_nce_loss(0.7, [0.1], [0.3, 0.5], 0.1), base)
        np.testing.assert_allclose(info_nce_loss(0.7, [], [0.1, 0.5, 0.3], 0.1), base)

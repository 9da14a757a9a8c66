"""
Contrastive adapter training.
"""
from casecontext.training.batch import Batch, TrainingExample, assemble_batch
from casecontext.training.loss import LossConfig, info_nce_loss, loss_and_grad
from casecontext.training.trainer import TrainConfig, TrainState, evaluate_loss, train

__all__ = [
    "Batch",
    "LossConfig",
    "TrainConfig",
    "TrainState",
    "TrainingExample",
    "assemble_batch",
    "evaluate_loss",
    "info_nce_loss",
    "loss_and_grad",
    "train",
]

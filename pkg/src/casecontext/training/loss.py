"""
Contrastive loss over positive, easy and hard negatives, with analytic gradients.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from casecontext.encoding.adapter import Adapter
from casecontext.errors import DegenerateLossError, NonFiniteLossError, TrainingError
from casecontext.training.batch import Batch


@dataclass(frozen=True)
class LossConfig:
    """
    Temperature and similarity of the contrastive loss.
    """
    temperature: float = 0.05
    similarity_kind: str = "cosine"

    def __post_init__(self):
        if not self.temperature > 0:
            raise TrainingError(f"temperature must be > 0, got {self.temperature}")
        if self.similarity_kind not in ("dot", "cosine"):
            raise TrainingError(f"unknown similarity kind '{self.similarity_kind}'")


def _logsumexp(values: np.ndarray) -> float:
    peak = float(np.max(values))
    return peak + float(np.log(np.sum(np.exp(values - peak))))


def info_nce_loss(sim_pos: float, sims_easy: Sequence[float], sims_hard: Sequence[float], tau: float) -> float:
    """
    Negative log-probability of the positive among positive and negatives.

    Args:
        sim_pos (float): Similarity of query and positive.
        sims_easy (Sequence[float]): Similarities to easy negatives.
        sims_hard (Sequence[float]): Similarities to hard negatives.
        tau (float): Temperature, strictly positive.

    Returns:
        float: The loss.
    """
    if not tau > 0:
        raise TrainingError(f"temperature must be > 0, got {tau}")
    if len(sims_easy) == 0 and len(sims_hard) == 0:
        raise DegenerateLossError("contrastive loss needs at least one negative")
    logits = np.array([sim_pos, *sims_easy, *sims_hard], dtype=np.float64) / tau
    return _logsumexp(logits) - logits[0]


@dataclass(frozen=True)
class AdapterGradient:
    weights: np.ndarray
    bias: np.ndarray


def _forward(batch: Batch, adapter: Adapter, cfg: LossConfig):
    z = adapter.apply(batch.embeddings)
    if cfg.similarity_kind == "cosine":
        norms = np.linalg.norm(z, axis=1)
        if np.any(norms == 0):
            raise TrainingError("an adapted embedding collapsed to zero under cosine similarity")
        return z, z / norms[:, None], norms
    return z, z, None


def example_losses(batch: Batch, adapter: Adapter, cfg: LossConfig) -> List[float]:
    """
    Loss of every example in a batch.
    """
    _, u, _ = _forward(batch, adapter, cfg)
    losses = []
    for item in batch.items:
        sims = u[item.candidate_rows] @ u[item.query_row]
        losses.append(info_nce_loss(sims[0], sims[1:1 + item.n_easy], sims[1 + item.n_easy:], cfg.temperature))
    return losses


def loss_and_grad(batch: Batch, adapter: Adapter, cfg: LossConfig) -> Tuple[float, AdapterGradient]:
    """
    Mean loss of a batch and its gradient with respect to the adapter.

    The same adapter maps queries and candidates, so gradients flow through
    both sides. Under cosine similarity the normalization Jacobian is included.

    Args:
        batch (Batch): Assembled batch.
        adapter (Adapter): Current adapter.
        cfg (LossConfig): Temperature and similarity.

    Returns:
        Tuple[float, AdapterGradient]: Mean loss and gradient.
    """
    z, u, norms = _forward(batch, adapter, cfg)
    grad_z = np.zeros_like(z)
    total = 0.0
    for item in batch.items:
        rows = item.candidate_rows
        if len(rows) < 2:
            raise DegenerateLossError(f"query '{item.query_id}' has no negatives in this batch")
        uq = u[item.query_row]
        uc = u[rows]
        sims = uc @ uq
        logits = sims / cfg.temperature
        loss = _logsumexp(logits) - logits[0]
        if not np.isfinite(loss):
            raise NonFiniteLossError(item.query_id, float(loss))
        total += loss

        probs = np.exp(logits - np.max(logits))
        probs /= probs.sum()
        coeff = probs.copy()
        coeff[0] -= 1.0
        coeff /= cfg.temperature

        if cfg.similarity_kind == "dot":
            grad_z[item.query_row] += coeff @ uc
            np.add.at(grad_z, rows, coeff[:, None] * uq[None, :])
        else:
            nq = norms[item.query_row]
            nc = norms[rows]
            grad_z[item.query_row] += (coeff @ (uc - sims[:, None] * uq[None, :])) / nq
            np.add.at(grad_z, rows, (coeff / nc)[:, None] * (uq[None, :] - sims[:, None] * uc))

    scale = 1.0 / len(batch.items)
    grad_z *= scale
    gradient = AdapterGradient(weights=batch.embeddings.T @ grad_z, bias=grad_z.sum(axis=0))
    return total * scale, gradient

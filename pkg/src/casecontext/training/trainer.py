"""
Adapter training loop with an adaptive-moment optimizer.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from casecontext.encoding.adapter import Adapter, save_checkpoint
from casecontext.encoding.store import EmbeddingStore
from casecontext.errors import NonFiniteLossError, TrainingError
from casecontext.evaluation.qrels import Qrels
from casecontext.training.batch import TrainingExample, assemble_batch
from casecontext.training.loss import AdapterGradient, LossConfig, example_losses, loss_and_grad

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """
    Settings of one training run.
    """
    steps: int = 200
    batch_size: int = 2
    lr: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    temperature: float = 0.05
    similarity_kind: str = "cosine"
    seed: int = 13
    d_out: int = 256
    init_noise: float = 1e-3
    easy_negatives: int = 1
    checkpoint_every: int = 0
    log_every: int = 50

    @property
    def loss(self) -> LossConfig:
        return LossConfig(self.temperature, self.similarity_kind)


@dataclass
class TrainState:
    """
    Mutable state owned by the training loop.
    """
    adapter: Adapter
    step: int
    rng_seed: int
    moments: Dict[str, np.ndarray]
    loss_history: List[float] = field(default_factory=list)


def _candidate_pool(store: EmbeddingStore, query_id: str, relevant: frozenset, hard: Sequence[str]) -> List[str]:
    blocked = set(relevant) | set(hard) | {query_id}
    return [case_id for case_id in sorted(store.ids) if case_id not in blocked]


def training_queries(store: EmbeddingStore, qrels: Qrels) -> List[str]:
    """
    Queries with an embedding and at least one embedded relevant case.
    """
    return [
        q for q in qrels.queries()
        if q in store and any(c in store and c != q for c in qrels.get(q))
    ]


def _hard_for(query_id: str, negatives: Dict[str, List[str]], relevant: frozenset, store: EmbeddingStore) -> List[str]:
    return [c for c in negatives.get(query_id, []) if c in store and c not in relevant and c != query_id]


def sample_example(
    rng: np.random.Generator,
    query_id: str,
    store: EmbeddingStore,
    qrels: Qrels,
    negatives: Dict[str, List[str]],
    easy_count: int = 1
) -> TrainingExample:
    """
    Draw a random positive and random easy negatives for a query; hard
    negatives are the mined ones.
    """
    relevant = qrels.get(query_id)
    positives = sorted(c for c in relevant if c in store and c != query_id)
    hard = _hard_for(query_id, negatives, relevant, store)
    pool = _candidate_pool(store, query_id, relevant, hard)
    positive = positives[int(rng.integers(len(positives)))]
    chosen = rng.choice(len(pool), size=min(easy_count, len(pool)), replace=False) if pool else []
    return TrainingExample(query_id, positive, [pool[i] for i in chosen], hard)


def fixed_examples(
    store: EmbeddingStore,
    qrels: Qrels,
    negatives: Dict[str, List[str]],
    queries: Optional[Sequence[str]] = None
) -> List[TrainingExample]:
    """
    The deterministic example set: first positive, first easy negative and
    the mined hard negatives of every query.
    """
    examples = []
    for query_id in queries if queries is not None else training_queries(store, qrels):
        relevant = qrels.get(query_id)
        positives = sorted(c for c in relevant if c in store and c != query_id)
        hard = _hard_for(query_id, negatives, relevant, store)
        pool = _candidate_pool(store, query_id, relevant, hard)
        examples.append(TrainingExample(query_id, positives[0], pool[:1], hard))
    return examples


def evaluate_loss(
    store: EmbeddingStore,
    qrels: Qrels,
    negatives: Dict[str, List[str]],
    adapter: Adapter,
    cfg: LossConfig
) -> float:
    """
    Mean loss of the fixed example set, each example scored on its own.
    """
    examples = fixed_examples(store, qrels, negatives)
    if not examples:
        raise TrainingError("no query has an embedded relevant case")
    losses = [example_losses(assemble_batch([e], store, qrels), adapter, cfg)[0] for e in examples]
    return float(np.mean(losses))


def _adam_step(state: TrainState, grad: AdapterGradient, cfg: TrainConfig) -> Adapter:
    t = state.step + 1
    params = {"weights": state.adapter.weights, "bias": state.adapter.bias}
    grads = {"weights": grad.weights, "bias": grad.bias}
    updated = {}
    for name, param in params.items():
        g = grads[name] + cfg.weight_decay * param
        m = state.moments[f"m_{name}"] = cfg.beta1 * state.moments[f"m_{name}"] + (1 - cfg.beta1) * g
        v = state.moments[f"v_{name}"] = cfg.beta2 * state.moments[f"v_{name}"] + (1 - cfg.beta2) * g * g
        m_hat = m / (1 - cfg.beta1 ** t)
        v_hat = v / (1 - cfg.beta2 ** t)
        updated[name] = param - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps)
    return Adapter(updated["weights"], updated["bias"], version=f"seed{cfg.seed}-step{t}")


def _checkpoint(directory: Path, name: str, state: TrainState, cfg: TrainConfig, fingerprint: str) -> None:
    save_checkpoint(directory / name, state.adapter, {"step": state.step, "seed": cfg.seed, "fingerprint": fingerprint})


def train(
    store: EmbeddingStore,
    qrels: Qrels,
    negatives: Dict[str, List[str]],
    cfg: TrainConfig,
    checkpoint_dir: Optional[Union[str, Path]] = None,
    fingerprint: str = ""
) -> Tuple[Adapter, TrainState]:
    """
    Train an adapter with the contrastive loss.

    Each step samples ``batch_size`` distinct queries, one random positive
    and ``easy_negatives`` random easy negatives per query, adds the mined
    hard negatives, and expands easy negatives in-batch. A fixed seed gives a
    bit-identical adapter.

    Args:
        store (EmbeddingStore): Base embeddings.
        qrels (Qrels): Training relevance.
        negatives (Dict[str, List[str]]): Mined hard negatives per query.
        cfg (TrainConfig): Training settings.
        checkpoint_dir (Optional[Union[str, Path]]): Where ``step-<n>.ckpt``
            files go every ``checkpoint_every`` steps.
        fingerprint (str): Config fingerprint written into checkpoints.

    Returns:
        Tuple[Adapter, TrainState]: The final adapter and training state.
    """
    if cfg.steps < 0 or cfg.batch_size < 1:
        raise TrainingError(f"invalid steps={cfg.steps} or batch_size={cfg.batch_size}")
    loss_cfg = cfg.loss
    queries = training_queries(store, qrels)
    if not queries:
        raise TrainingError("no query has an embedded relevant case")

    adapter = Adapter.initialize(store.dimension, cfg.d_out, cfg.seed, cfg.init_noise)
    state = TrainState(
        adapter=adapter,
        step=0,
        rng_seed=cfg.seed,
        moments={
            "m_weights": np.zeros_like(adapter.weights), "v_weights": np.zeros_like(adapter.weights),
            "m_bias": np.zeros_like(adapter.bias), "v_bias": np.zeros_like(adapter.bias),
        }
    )
    directory = Path(checkpoint_dir) if checkpoint_dir else None
    rng = np.random.default_rng(cfg.seed)
    size = min(cfg.batch_size, len(queries))
    logger.info("Training adapter %dx%d for %d steps on %d queries", store.dimension, cfg.d_out, cfg.steps, len(queries))

    for _ in range(cfg.steps):
        picked = rng.choice(len(queries), size=size, replace=False)
        examples = [sample_example(rng, queries[i], store, qrels, negatives, cfg.easy_negatives) for i in picked]
        batch = assemble_batch(examples, store, qrels)
        try:
            loss, grad = loss_and_grad(batch, state.adapter, loss_cfg)
        except NonFiniteLossError:
            if directory is not None:
                _checkpoint(directory, "diverged.ckpt", state, cfg, fingerprint)
            raise
        state.adapter = _adam_step(state, grad, cfg)
        state.step += 1
        state.loss_history.append(loss)
        if cfg.log_every and state.step % cfg.log_every == 0:
            logger.info("step %d loss %.6f", state.step, loss)
        if directory is not None and cfg.checkpoint_every and state.step % cfg.checkpoint_every == 0:
            _checkpoint(directory, f"step-{state.step}.ckpt", state, cfg, fingerprint)

    state.adapter = replace(state.adapter, version=f"seed{cfg.seed}-step{state.step}-{state.adapter.digest()[:8]}")
    return state.adapter, state

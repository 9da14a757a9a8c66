"""
Trainable affine adapter over frozen base embeddings, and its checkpoint format.
"""
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from casecontext.errors import EncodingError

CHECKPOINT_MAGIC = b"CASECONTEXT-ADAPTER 1\n"


@dataclass(frozen=True)
class Adapter:
    """
    Affine map ``x @ weights + bias`` from ``d_in`` to ``d_out`` dimensions.
    """
    weights: np.ndarray
    bias: np.ndarray
    version: str = "init"

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise EncodingError(
                f"adapter shapes do not agree: weights {self.weights.shape}, bias {self.bias.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise EncodingError(f"adapter '{self.version}' has non-finite entries")

    @property
    def d_in(self) -> int:
        return self.weights.shape[0]

    @property
    def d_out(self) -> int:
        return self.weights.shape[1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """
        Map a vector or a row matrix of base embeddings.
        """
        if x.shape[-1] != self.d_in:
            raise EncodingError(f"adapter expects dimension {self.d_in}, got {x.shape[-1]}")
        return x @ self.weights + self.bias

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.weights).tobytes())
        h.update(np.ascontiguousarray(self.bias).tobytes())
        return h.hexdigest()

    @classmethod
    def identity(cls, dim: int) -> 'Adapter':
        return cls(np.eye(dim), np.zeros(dim), version="identity")

    @classmethod
    def initialize(cls, d_in: int, d_out: int, seed: int, noise: float = 1e-3) -> 'Adapter':
        """
        Truncated identity plus seeded Gaussian noise; zero bias.

        Args:
            d_in (int): Base embedding dimension.
            d_out (int): Output dimension, at most ``d_in``.
            seed (int): Noise seed.
            noise (float): Noise standard deviation.

        Returns:
            Adapter: The initial adapter.
        """
        if not 1 <= d_out <= d_in:
            raise EncodingError(f"adapter output dimension must lie in [1, {d_in}], got {d_out}")
        rng = np.random.default_rng(seed)
        weights = np.eye(d_in, d_out) + noise * rng.standard_normal((d_in, d_out))
        return cls(weights, np.zeros(d_out), version=f"init-seed{seed}")


def save_checkpoint(path: Union[str, Path], adapter: Adapter, header: Dict[str, Any]) -> None:
    """
    Write an adapter checkpoint: magic line, JSON header line, weights, bias.

    Args:
        path (Union[str, Path]): Target file.
        adapter (Adapter): Adapter to store.
        header (Dict[str, Any]): Extra header fields (step, seed, fingerprint).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {**header, "version": adapter.version, "d_in": adapter.d_in, "d_out": adapter.d_out}
    with open(path, "wb") as handle:
        handle.write(CHECKPOINT_MAGIC)
        handle.write(json.dumps(meta, sort_keys=True).encode("utf-8") + b"\n")
        np.save(handle, np.ascontiguousarray(adapter.weights, dtype=np.float64), allow_pickle=False)
        np.save(handle, np.ascontiguousarray(adapter.bias, dtype=np.float64), allow_pickle=False)


def load_checkpoint(path: Union[str, Path]) -> Tuple[Adapter, Dict[str, Any]]:
    """
    Read a checkpoint written by ``save_checkpoint``.

    Returns:
        Tuple[Adapter, Dict[str, Any]]: The adapter and its header.
    """
    with open(path, "rb") as handle:
        if handle.readline() != CHECKPOINT_MAGIC:
            raise EncodingError(f"{path} is not an adapter checkpoint")
        header = json.loads(handle.readline().decode("utf-8"))
        weights = np.load(handle, allow_pickle=False)
        bias = np.load(handle, allow_pickle=False)
    return Adapter(weights, bias, version=header["version"]), header

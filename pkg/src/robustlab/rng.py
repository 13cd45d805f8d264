"""Deterministic, label-keyed random streams.

Every random draw in the lab comes from a stream addressed by a 64-bit
master seed and a string label. The same (seed, label) pair yields the
same stream in any process, under any thread count, in any call order;
the "counter" of a draw is its position in the stream. Per-edge and
per-triple randomness is therefore keyed by (seed, label, canonical
index), which makes monotone couplings across p values exact.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "stream", "default_seed"]

_ENV_SEED = "ROBUSTLAB_SEED"


def _label_entropy(label: str) -> tuple[int, ...]:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=16).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def stream(seed: int, label: str) -> np.random.Generator:
    """Generator for the stream named `label` under `seed`."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=_label_entropy(label))
    return np.random.Generator(np.random.PCG64(ss))


def default_seed() -> int:
    """Seed from the ROBUSTLAB_SEED environment variable, else 0."""
    raw = os.environ.get(_ENV_SEED)
    return int(raw) if raw else 0


@dataclass(frozen=True)
class RngStream:
    """Addressable stream; draw #k is the k-th variate of the generator."""

    seed: int
    label: str

    def generator(self) -> np.random.Generator:
        return stream(self.seed, self.label)

    def uniforms(self, count: int) -> np.ndarray:
        return self.generator().random(count)

    def draw(self, counter: int) -> float:
        """The single uniform at position `counter` (0-based)."""
        return float(self.generator().random(counter + 1)[-1])

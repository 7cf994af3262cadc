"""Named, independent random streams.

Every stochastic subsystem (placement, mobility, traffic, policy, shadowing)
pulls from its own generator derived from (seed, stream name) via SHA-256,
so the same (seed, stream) pair is bit-identical across runs and platforms
and adding a new subsystem never perturbs the draws of an existing one.
"""

from __future__ import annotations

import hashlib

import numpy as np

PLACEMENT = "placement"
MOBILITY = "mobility"
TRAFFIC = "traffic"
POLICY = "policy"
SHADOWING = "shadowing"


def stream_seed(seed: int, stream: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stream}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


def stream(seed: int, name: str) -> np.random.Generator:
    """Generator for one named stream of a run seed."""
    return np.random.Generator(np.random.PCG64(stream_seed(seed, name)))


class RngStreams:
    """Lazy per-stream generator container for one run."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[str, np.random.Generator] = {}

    def get(self, name: str) -> np.random.Generator:
        if name not in self._streams:
            self._streams[name] = stream(self.seed, name)
        return self._streams[name]

"""Adapter running a trained checkpoint as a simulation policy."""

from __future__ import annotations

import numpy as np

from ..kpm import KpmReport, assemble_state
from ..reward import NormalizerSet
from ..sim import WorldView
from .checkpoint import Checkpoint, infer_action
from .ppo import GREEDY


class CheckpointPolicy:
    """Online-inference policy: KPM report -> normalized state -> action.

    Refuses construction when the live normalizers do not hash-match the
    ones the checkpoint trained under.
    """

    def __init__(
        self,
        checkpoint: Checkpoint,
        normalizers: NormalizerSet,
        mode: str = GREEDY,
        rng: np.random.Generator | None = None,
    ):
        checkpoint.verify_normalizers(normalizers)
        self.checkpoint = checkpoint
        self.normalizers = normalizers
        self.mode = mode
        self.rng = rng
        self.name = f"{checkpoint.algo}:{checkpoint.weights_name}"

    def act(self, report: KpmReport, view: WorldView) -> int:
        state = assemble_state(report, self.normalizers, self.checkpoint.quantile_kind)
        return infer_action(self.checkpoint, state, mode=self.mode, rng=self.rng)

"""Offline DRL trainers on a hand-rolled, gradient-checked numpy substrate."""

from .common import TrainConfig, TrainingDiverged
from .mlp import Adam, Conv1d, Mlp, backprop_check

__all__ = ["TrainConfig", "TrainingDiverged", "Adam", "Conv1d", "Mlp", "backprop_check"]

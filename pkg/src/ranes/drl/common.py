"""Shared training configuration and control-flow helpers."""

from __future__ import annotations

from dataclasses import dataclass, field


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; message carries step index and batch stats."""


@dataclass
class TrainConfig:
    """Knobs shared by both trainers.

    max_timesteps counts environment steps for the on-policy trainer and
    gradient updates for the offline one. Full-scale depth is
    [512, 512, 256]; the defaults are desk-scale so CPU training finishes
    in minutes while keeping the architecture shape.
    """

    max_timesteps: int = 1_200_000
    episode_length: int = 100
    eval_every: int = 2_000
    eval_episodes: int = 10
    early_stop_patience: int = 4
    min_timesteps_before_stop: int = 10_000
    discount: float = 0.99
    learning_rate: float = 3e-4
    batch_size: int = 256

    # Q-learning side
    cql_alpha: float = 1.0
    rem_heads: int = 4
    target_sync_every: int = 500

    # policy-gradient side
    clip_epsilon: float = 0.2
    entropy_coef: float = 0.002
    gae_lambda: float = 0.95
    value_coef: float = 0.5
    ppo_epochs: int = 10
    rollout_steps: int = 1024
    entropy_floor: float = 1e-3

    trunk: list[int] = field(default_factory=lambda: [128, 128, 64])
    conv_filters: int = 8  # 0 disables the width-3 convolutional front layer
    seed: int = 0

    def __post_init__(self):
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1")
        for name in ("max_timesteps", "episode_length", "eval_every", "batch_size",
                     "rem_heads", "target_sync_every", "rollout_steps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.discount <= 1:
            raise ValueError("discount must be in (0, 1]")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def should_stop(eval_returns: list[float], patience: int, min_steps: int, steps: int) -> bool:
    """Early stop once the best evaluation is `patience` evaluations old."""
    if steps < min_steps or len(eval_returns) <= patience:
        return False
    best = max(range(len(eval_returns)), key=lambda i: eval_returns[i])
    return len(eval_returns) - 1 - best >= patience

"""Offline Q-learning: ensemble heads with random convex mixing and a
conservative penalty keeping out-of-corpus action values low.

Each batch draws fresh Dirichlet-uniform mixture coefficients shared by
the online and target networks; the loss is the squared TD error of the
mixed Q plus cql_alpha * mean(logsumexp_a Q(s, .) - Q(s, a_data)).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from ..campaign import Transition
from .common import TrainConfig, TrainingDiverged, should_stop
from .mlp import Adam, Conv1d, Dense, Mlp, RELU


class QNetwork:
    """Optional conv front end, ReLU trunk, and K linear Q-heads."""

    def __init__(self, state_dim: int, n_actions: int, trunk: list[int],
                 n_heads: int, conv_filters: int, rng: np.random.Generator):
        if n_heads < 1:
            raise ValueError("need at least one head")
        self.state_dim = state_dim
        self.n_actions = n_actions
        self.n_heads = n_heads
        self.conv = Conv1d(3, conv_filters, rng) if conv_filters > 0 else None
        trunk_in = self.conv.out_dim(state_dim) if self.conv else state_dim
        self.trunk = Mlp([trunk_in, *trunk], rng, output_activation=RELU)
        self.heads = Dense(trunk[-1], n_heads * n_actions, "linear", rng)

    def parameters(self) -> list[np.ndarray]:
        params = self.conv.parameters() if self.conv else []
        return params + self.trunk.parameters() + self.heads.parameters()

    def forward(self, states: np.ndarray) -> np.ndarray:
        return self.forward_cache(states)[0]

    def forward_cache(self, states: np.ndarray):
        x = np.asarray(states, dtype=float)
        conv_cache = None
        if self.conv:
            x, conv_cache = self.conv.forward(x)
        feat, trunk_cache = self.trunk.forward_cache(x)
        flat, head_cache = self.heads.forward(feat)
        q = flat.reshape(len(x), self.n_heads, self.n_actions)
        return q, (conv_cache, trunk_cache, head_cache)

    def backward(self, caches, grad_q: np.ndarray) -> list[np.ndarray]:
        conv_cache, trunk_cache, head_cache = caches
        batch = grad_q.shape[0]
        head_grads, grad_feat = self.heads.backward(
            head_cache, grad_q.reshape(batch, -1)
        )
        trunk_grads, grad_x = self.trunk.backward(trunk_cache, grad_feat)
        conv_grads = []
        if self.conv:
            conv_grads, _ = self.conv.backward(conv_cache, grad_x)
        return conv_grads + trunk_grads + head_grads

    def q_mean(self, states: np.ndarray) -> np.ndarray:
        """Mean-of-heads Q values, the inference-time estimate."""
        return self.forward(np.atleast_2d(states)).mean(axis=1)

    def greedy(self, state: np.ndarray) -> int:
        return int(np.argmax(self.q_mean(state)[0]))

    def clone(self) -> "QNetwork":
        return copy.deepcopy(self)

    def copy_weights_from(self, other: "QNetwork") -> None:
        for mine, theirs in zip(self.parameters(), other.parameters()):
            mine[...] = theirs


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray


def transitions_to_batch(transitions: list[Transition]) -> Batch:
    return Batch(
        states=np.stack([t.state for t in transitions]),
        actions=np.array([t.action for t in transitions], dtype=int),
        rewards=np.array([t.reward for t in transitions]),
        next_states=np.stack([t.next_state for t in transitions]),
        dones=np.array([t.done for t in transitions], dtype=float),
    )


def draw_mixture(rng: np.random.Generator, n_heads: int) -> np.ndarray:
    """Dirichlet(1, ..., 1) convex mixture over heads."""
    return rng.dirichlet(np.ones(n_heads))


def dqn_loss(
    net: QNetwork,
    target: QNetwork,
    batch: Batch,
    alpha: np.ndarray,
    cfg: TrainConfig,
):
    """Loss value and parameter gradients for one batch under mixture alpha."""
    n = len(batch.actions)
    q_all, caches = net.forward_cache(batch.states)
    q_mix = np.einsum("bka,k->ba", q_all, alpha)
    q_sa = q_mix[np.arange(n), batch.actions]

    q_next = np.einsum("bka,k->ba", target.forward(batch.next_states), alpha)
    targets = batch.rewards + cfg.discount * (1.0 - batch.dones) * q_next.max(axis=1)
    td = q_sa - targets
    mse = float(np.mean(td**2))

    shifted = q_mix - q_mix.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1)) + q_mix.max(axis=1)
    cql = float(np.mean(logsumexp - q_sa))
    loss = mse + cfg.cql_alpha * cql
    stats = {"mse": mse, "cql": cql, "q_sa_mean": float(q_sa.mean())}
    if not np.isfinite(loss):
        return loss, [], stats

    onehot = np.zeros_like(q_mix)
    onehot[np.arange(n), batch.actions] = 1.0
    softmax = np.exp(shifted)
    softmax /= softmax.sum(axis=1, keepdims=True)
    grad_qmix = (2.0 * td[:, None] * onehot + cfg.cql_alpha * (softmax - onehot)) / n
    grad_q = grad_qmix[:, None, :] * alpha[None, :, None]
    grads = net.backward(caches, grad_q)
    return loss, grads, stats


def dqn_train_offline(
    transitions: list[Transition],
    cfg: TrainConfig,
    eval_fn=None,
) -> tuple[QNetwork, dict]:
    """Train on a fixed corpus; returns the network and a training history.

    eval_fn(net) -> float enables periodic evaluation with early stopping
    after cfg.early_stop_patience evaluations without improvement (once
    past cfg.min_timesteps_before_stop updates). Without it the trainer
    runs the full update budget.
    """
    if not transitions:
        raise ValueError("cannot train on an empty corpus")
    batch_all = transitions_to_batch(transitions)
    state_dim = batch_all.states.shape[1]
    n_actions = int(max(batch_all.actions.max() + 1, 2))

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    net = QNetwork(state_dim, n_actions, cfg.trunk, cfg.rem_heads, cfg.conv_filters, rng)
    target = net.clone()
    adam = Adam(net.parameters(), cfg.learning_rate)

    history = {"loss": [], "eval_returns": [], "eval_steps": []}
    n = len(transitions)
    for step in range(1, cfg.max_timesteps + 1):
        idx = rng.integers(0, n, size=min(cfg.batch_size, n))
        batch = Batch(
            batch_all.states[idx], batch_all.actions[idx], batch_all.rewards[idx],
            batch_all.next_states[idx], batch_all.dones[idx],
        )
        alpha = draw_mixture(rng, cfg.rem_heads)
        loss, grads, stats = dqn_loss(net, target, batch, alpha, cfg)
        if not np.isfinite(loss):
            raise TrainingDiverged(
                f"non-finite loss at update {step}: {stats} "
                f"(reward stats: mean={batch.rewards.mean():.4g}, max={batch.rewards.max():.4g})"
            )
        adam.step(grads)
        history["loss"].append(loss)
        if step % cfg.target_sync_every == 0:
            target.copy_weights_from(net)
        if eval_fn is not None and step % cfg.eval_every == 0:
            history["eval_returns"].append(float(eval_fn(net)))
            history["eval_steps"].append(step)
            if should_stop(history["eval_returns"], cfg.early_stop_patience,
                           cfg.min_timesteps_before_stop, step):
                break
    return net, history

"""Clipped-surrogate policy optimization against the simulator environment.

Actor and critic are separate dense networks; advantages come from
generalized advantage estimation over on-policy rollouts. Updates are
several epochs of shuffled minibatches per rollout with an entropy bonus;
training warns (but still returns the policy) on entropy collapse.
"""

from __future__ import annotations

import warnings

import numpy as np

from .common import TrainConfig, TrainingDiverged, should_stop
from .mlp import Adam, Mlp

GREEDY = "greedy"
SAMPLE = "sample"


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class PpoPolicy:
    """Categorical actor over action indices plus a scalar critic."""

    def __init__(self, state_dim: int, n_actions: int, hidden: list[int],
                 rng: np.random.Generator):
        self.state_dim = state_dim
        self.n_actions = n_actions
        self.actor = Mlp([state_dim, *hidden, n_actions], rng)
        self.critic = Mlp([state_dim, *hidden, 1], rng)

    def logits(self, states: np.ndarray) -> np.ndarray:
        return self.actor.forward(np.atleast_2d(np.asarray(states, dtype=float)))

    def probs(self, states: np.ndarray) -> np.ndarray:
        p = np.exp(log_softmax(self.logits(states)))
        return p / p.sum(axis=1, keepdims=True)

    def value(self, states: np.ndarray) -> np.ndarray:
        return self.critic.forward(np.atleast_2d(np.asarray(states, dtype=float)))[:, 0]

    def act(self, state: np.ndarray, mode: str = SAMPLE,
            rng: np.random.Generator | None = None) -> tuple[int, float]:
        """Action index and its log-probability under the current policy."""
        logp = log_softmax(self.logits(state))[0]
        if mode == GREEDY:
            action = int(np.argmax(logp))
        elif mode == SAMPLE:
            if rng is None:
                raise ValueError("sampling requires an rng")
            action = int(rng.choice(self.n_actions, p=np.exp(logp)))
        else:
            raise ValueError(f"unknown mode {mode!r}")
        return action, float(logp[action])


def gae_advantages(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    last_value: float,
    discount: float,
    lam: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimates and value targets for one rollout."""
    n = len(rewards)
    adv = np.zeros(n)
    running = 0.0
    for t in reversed(range(n)):
        next_value = last_value if t == n - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + discount * next_value * nonterminal - values[t]
        running = delta + discount * lam * nonterminal * running
        adv[t] = running
    return adv, adv + values


def ppo_loss_grads(
    policy: PpoPolicy,
    states: np.ndarray,
    actions: np.ndarray,
    old_logp: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    cfg: TrainConfig,
):
    """Clipped-surrogate + value + entropy loss with manual gradients.

    Samples whose ratio sits outside the clip interval on the favourable
    side contribute zero policy gradient.
    """
    n = len(actions)
    logits, actor_caches = policy.actor.forward_cache(states)
    logp_all = log_softmax(logits)
    probs = np.exp(logp_all)
    logp = logp_all[np.arange(n), actions]
    ratio = np.exp(logp - old_logp)

    lo, hi = 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon
    surr1 = ratio * advantages
    surr2 = np.clip(ratio, lo, hi) * advantages
    policy_loss = -float(np.mean(np.minimum(surr1, surr2)))

    entropy = -np.sum(probs * logp_all, axis=1)
    entropy_mean = float(entropy.mean())

    values, critic_caches = policy.critic.forward_cache(states)
    values = values[:, 0]
    value_loss = float(np.mean((values - returns) ** 2))

    total = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy_mean

    # policy gradient: only samples where the unclipped branch is active
    active = (surr1 <= surr2) | ((ratio >= lo) & (ratio <= hi))
    dlogp = -(advantages * ratio * active) / n
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), actions] = 1.0
    grad_logits = dlogp[:, None] * (onehot - probs)
    # entropy term: d(-c * mean H)/dlogits
    grad_logits += cfg.entropy_coef / n * probs * (logp_all + entropy[:, None])
    actor_grads, _ = policy.actor.backward(actor_caches, grad_logits)

    grad_values = cfg.value_coef * 2.0 * (values - returns) / n
    critic_grads, _ = policy.critic.backward(critic_caches, grad_values[:, None])

    metrics = {
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": entropy_mean,
        "total": total,
    }
    return total, actor_grads, critic_grads, metrics


class RolloutBuffer:
    def __init__(self):
        self.states: list[np.ndarray] = []
        self.actions: list[int] = []
        self.rewards: list[float] = []
        self.dones: list[float] = []
        self.logp: list[float] = []
        self.values: list[float] = []

    def __len__(self):
        return len(self.actions)


def evaluate_policy(policy: PpoPolicy, env, episodes: int, mode: str = GREEDY,
                    rng: np.random.Generator | None = None) -> float:
    """Mean undiscounted episode return over fixed evaluation episodes."""
    total = 0.0
    for ep in range(episodes):
        state = env.reset(eval_episode=ep)
        done = False
        while not done:
            action, _ = policy.act(state, mode=mode, rng=rng)
            state, reward, done = env.step(action)
            total += reward
    return total / episodes


def ppo_train(env, cfg: TrainConfig, hidden: list[int] | None = None) -> tuple[PpoPolicy, dict]:
    """Train against an environment honoring reset()/step(); returns policy + history."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    hidden = hidden if hidden is not None else [64, 64]
    policy = PpoPolicy(env.state_dim, env.n_actions, hidden, rng)
    adam_actor = Adam(policy.actor.parameters(), cfg.learning_rate)
    adam_critic = Adam(policy.critic.parameters(), cfg.learning_rate)

    history = {"eval_returns": [], "eval_steps": [], "entropy": []}
    steps_done = 0
    next_eval = cfg.eval_every
    state = env.reset()

    while steps_done < cfg.max_timesteps:
        buf = RolloutBuffer()
        while len(buf) < cfg.rollout_steps and steps_done < cfg.max_timesteps:
            action, logp = policy.act(state, mode=SAMPLE, rng=rng)
            value = float(policy.value(state)[0])
            next_state, reward, done = env.step(action)
            buf.states.append(state)
            buf.actions.append(action)
            buf.rewards.append(reward)
            buf.dones.append(float(done))
            buf.logp.append(logp)
            buf.values.append(value)
            steps_done += 1
            state = env.reset() if done else next_state

        states = np.stack(buf.states)
        actions = np.array(buf.actions, dtype=int)
        rewards = np.array(buf.rewards)
        dones = np.array(buf.dones)
        old_logp = np.array(buf.logp)
        values = np.array(buf.values)
        last_value = 0.0 if buf.dones[-1] else float(policy.value(state)[0])
        adv, returns = gae_advantages(rewards, values, dones, last_value,
                                      cfg.discount, cfg.gae_lambda)
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)

        n = len(buf)
        entropy_last = None
        for _epoch in range(cfg.ppo_epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                total, actor_grads, critic_grads, metrics = ppo_loss_grads(
                    policy, states[idx], actions[idx], old_logp[idx],
                    adv[idx], returns[idx], cfg,
                )
                if not np.isfinite(total):
                    raise TrainingDiverged(
                        f"non-finite loss at env step {steps_done}: {metrics}"
                    )
                adam_actor.step(actor_grads)
                adam_critic.step(critic_grads)
                entropy_last = metrics["entropy"]
        history["entropy"].append(entropy_last)
        if entropy_last is not None and entropy_last < cfg.entropy_floor:
            warnings.warn(
                f"policy entropy collapsed to {entropy_last:.2e} at step {steps_done}; "
                "returning the checkpoint anyway",
                stacklevel=2,
            )

        if steps_done >= next_eval and hasattr(env, "reset"):
            mean_return = evaluate_policy(policy, env, cfg.eval_episodes)
            history["eval_returns"].append(mean_return)
            history["eval_steps"].append(steps_done)
            next_eval += cfg.eval_every
            state = env.reset()
            if should_stop(history["eval_returns"], cfg.early_stop_patience,
                           cfg.min_timesteps_before_stop, steps_done):
                break
    return policy, history

"""Versioned JSON checkpoints tying trained weights to their normalizers.

Floats survive the JSON round trip bit-exactly, so save -> load -> forward
is bit-identical. A checkpoint refuses inference when paired with a
normalizer artifact whose content hash differs from the one it trained
under.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .common import TrainConfig
from .dqn import QNetwork
from .ppo import GREEDY, PpoPolicy

CHECKPOINT_SCHEMA = 1
DQN = "dqn"
PPO = "ppo"


class NormalizerMismatch(RuntimeError):
    """Checkpoint was trained under different normalizers; inference refused."""


@dataclass
class Checkpoint:
    algo: str
    weights_name: str
    quantile_kind: str
    normalizer_hash: str
    arch: dict
    train_config: dict
    model: object  # QNetwork | PpoPolicy

    @property
    def state_dim(self) -> int:
        return self.arch["state_dim"]

    def verify_normalizers(self, normalizers) -> None:
        live = normalizers.content_hash()
        if live != self.normalizer_hash:
            raise NormalizerMismatch(
                f"checkpoint trained under normalizers {self.normalizer_hash[:12]}..., "
                f"got {live[:12]}..."
            )


def _params_payload(model) -> list:
    return [p.tolist() for p in model.parameters()]


def _restore_params(model, payload: list) -> None:
    params = model.parameters()
    if len(params) != len(payload):
        raise ValueError("checkpoint parameter count does not match architecture")
    for param, stored in zip(params, payload):
        arr = np.asarray(stored, dtype=float)
        if arr.shape != param.shape:
            raise ValueError(f"parameter shape {arr.shape} != expected {param.shape}")
        param[...] = arr


def save_checkpoint(
    path: str,
    model,
    weights_name: str,
    quantile_kind: str,
    normalizer_hash: str,
    cfg: TrainConfig,
) -> None:
    if isinstance(model, QNetwork):
        algo = DQN
        arch = {
            "state_dim": model.state_dim,
            "n_actions": model.n_actions,
            "trunk": model.trunk.sizes[1:],
            "n_heads": model.n_heads,
            "conv_filters": model.conv.filters if model.conv else 0,
        }
    elif isinstance(model, PpoPolicy):
        algo = PPO
        arch = {
            "state_dim": model.state_dim,
            "n_actions": model.n_actions,
            "hidden": model.actor.sizes[1:-1],
        }
    else:
        raise TypeError(f"cannot checkpoint {type(model).__name__}")

    payload = {
        "schema_version": CHECKPOINT_SCHEMA,
        "algo": algo,
        "weights_name": weights_name,
        "quantile_kind": quantile_kind,
        "normalizer_hash": normalizer_hash,
        "arch": arch,
        "train_config": dataclasses.asdict(cfg),
        "params": (
            _params_payload(model)
            if algo == DQN
            else {"actor": _params_payload(model.actor), "critic": _params_payload(model.critic)}
        ),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))


def load_checkpoint(path: str) -> Checkpoint:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema_version") != CHECKPOINT_SCHEMA:
        raise ValueError(f"unsupported checkpoint schema {payload.get('schema_version')}")
    arch = payload["arch"]
    rng = np.random.Generator(np.random.PCG64(0))
    if payload["algo"] == DQN:
        model = QNetwork(arch["state_dim"], arch["n_actions"], list(arch["trunk"]),
                         arch["n_heads"], arch["conv_filters"], rng)
        _restore_params(model, payload["params"])
    elif payload["algo"] == PPO:
        model = PpoPolicy(arch["state_dim"], arch["n_actions"], list(arch["hidden"]), rng)
        _restore_params(model.actor, payload["params"]["actor"])
        _restore_params(model.critic, payload["params"]["critic"])
    else:
        raise ValueError(f"unknown checkpoint algo {payload['algo']!r}")
    return Checkpoint(
        algo=payload["algo"],
        weights_name=payload["weights_name"],
        quantile_kind=payload["quantile_kind"],
        normalizer_hash=payload["normalizer_hash"],
        arch=arch,
        train_config=payload["train_config"],
        model=model,
    )


def infer_action(
    checkpoint: Checkpoint,
    state: np.ndarray,
    mode: str = GREEDY,
    rng: np.random.Generator | None = None,
    normalizers=None,
) -> int:
    """Action index for one normalized state vector.

    The ensemble Q model always acts greedily on the mean of its heads;
    the policy-gradient model follows the requested mode. Passing the live
    normalizers enforces the hash binding.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (checkpoint.state_dim,):
        raise ValueError(f"state length {state.shape} != {checkpoint.state_dim}")
    if normalizers is not None:
        checkpoint.verify_normalizers(normalizers)
    model = checkpoint.model
    if checkpoint.algo == DQN:
        return model.greedy(state)
    action, _ = model.act(state, mode=mode, rng=rng)
    return action

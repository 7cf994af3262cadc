"""Simulator-backed training environment with episode-per-run semantics.

Each episode is one full simulated run: reset builds a fresh world from
the next training seed (or a fixed evaluation seed), runs the first
control interval under the all-active initial state, and returns its
normalized state vector. Each step applies the agent's action, advances
one control interval and rewards the resulting report, so a run of T
reports gives T - 1 decision steps.
"""

from __future__ import annotations

import numpy as np

from ..actions import n_actions
from ..config import ScenarioConfig
from ..features import n_features
from ..kpm import assemble_state
from ..reward import NormalizerSet, RewardWeights, compute_reward
from ..sim import Simulation
from ..world import build_scenario


class SimulatorEnv:
    def __init__(
        self,
        scenario: ScenarioConfig,
        weights: RewardWeights,
        normalizers: NormalizerSet,
        train_seed_base: int,
        eval_seed_base: int,
    ):
        normalizers.require_fitted()
        self.scenario = scenario
        self.weights = weights
        self.normalizers = normalizers
        self.train_seed_base = train_seed_base
        self.eval_seed_base = eval_seed_base
        self.state_dim = n_features(scenario.n_gnb)
        self.n_actions = n_actions(scenario.n_gnb)
        self.episodes_started = 0
        self.sim: Simulation | None = None

    def seed_for(self, eval_episode: int | None) -> int:
        if eval_episode is not None:
            return self.eval_seed_base + eval_episode
        return self.train_seed_base + self.episodes_started

    def reset(self, eval_episode: int | None = None) -> np.ndarray:
        seed = self.seed_for(eval_episode)
        if eval_episode is None:
            self.episodes_started += 1
        world = build_scenario(self.scenario.replace(seed=seed))
        self.sim = Simulation(world)
        report = self.sim.run_interval()
        return assemble_state(report, self.normalizers, self.weights.quantile_kind)

    def step(self, action_index: int) -> tuple[np.ndarray, float, bool]:
        if self.sim is None:
            raise RuntimeError("call reset() before step()")
        self.sim.apply_action(int(action_index))
        report = self.sim.run_interval()
        state = assemble_state(report, self.normalizers, self.weights.quantile_kind)
        reward = compute_reward(report, self.weights, self.normalizers).total
        return state, reward, self.sim.done

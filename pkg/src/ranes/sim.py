"""Deterministic slot-level simulation loop and the control cadence.

Within a slot the event order is fixed: mobility, traffic arrival,
scheduling/transmission, KPM accumulation, then handover bookkeeping.
At every control-interval boundary the interval's KPM report is emitted,
the policy is queried, and its action is applied before the next slot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from . import radio, rng as rngmod
from .actions import index_to_mask, mask_to_index
from .control import DETACHED, Transition
from .kpm import KpmReport, build_report
from .traffic import QUEUE_PERSISTS, step_mobility
from .world import World


class PolicyError(RuntimeError):
    """Policy raised at a control step; carries the step index and cause."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"policy failed at control step {step}: {cause!r}")
        self.step = step
        self.cause = cause


@dataclass
class WorldView:
    """Read-only boundary snapshot handed to policies.

    Heuristic policies may use true positions and speeds (mirroring their
    simulator-side implementation); learned policies should only use the
    KPM report.
    """

    ue_pos: np.ndarray
    ue_speed: np.ndarray
    cells: np.ndarray
    active: np.ndarray
    rx_power_dbm: np.ndarray
    noise_mw: float


class Policy(Protocol):
    def act(self, report: KpmReport, view: WorldView) -> int: ...


@dataclass
class RunSummary:
    """Per-interval totals and control events of one run."""

    seed: int
    policy_name: str
    n_intervals: int
    rho_total: list[float] = field(default_factory=list)
    gamma_total: list[float] = field(default_factory=list)
    rlf_total: list[float] = field(default_factory=list)
    delta_total: list[float] = field(default_factory=list)
    bs_on: list[int] = field(default_factory=list)
    actions: list[int] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    transitions: list[Transition] = field(default_factory=list)

    def transitions_after(self, t: float) -> list[Transition]:
        return [tr for tr in self.transitions if tr.t > t]

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "policy": self.policy_name,
            "n_intervals": self.n_intervals,
            "rho_total": self.rho_total,
            "gamma_total": self.gamma_total,
            "rlf_total": self.rlf_total,
            "delta_total": self.delta_total,
            "bs_on": self.bs_on,
            "actions": self.actions,
            "rewards": self.rewards,
            "transitions": [
                [tr.cell_id, tr.t, tr.direction, tr.td_at_transition] for tr in self.transitions
            ],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


class Simulation:
    """Slot-stepped simulation advancing one control interval at a time."""

    def __init__(self, world: World):
        self.world = world
        self.cfg = world.cfg
        self.slot = 0
        self.interval = 0
        self.noise = radio.noise_mw(self.cfg)
        self._mobility_rng = world.rngs.get(rngmod.MOBILITY)
        self._traffic_rng = world.rngs.get(rngmod.TRAFFIC)
        self._queue_persists = np.array([QUEUE_PERSISTS[int(k)] for k in world.ue_class])
        self._shadow_lin = 10.0 ** (-world.shadowing_db / 10.0)
        self._sinr_lin = self._recompute_sinr()

    @property
    def now(self) -> float:
        return self.slot * self.cfg.slot_duration

    @property
    def control_interval_index(self) -> int:
        return self.slot // self.cfg.slots_per_control_interval

    @property
    def done(self) -> bool:
        return self.interval >= self.cfg.n_control_intervals

    def _recompute_sinr(self) -> np.ndarray:
        w = self.world
        self._p_mw = radio.rx_power_mw(w.ue_pos, w.cells, self._shadow_lin, self.cfg)
        return radio.sinr_lin_matrix(self._p_mw, w.status.active, self.noise)

    def _serving_sinr_db(self) -> np.ndarray:
        """Per-UE serving SINR in dB from the cached matrix; -inf when detached."""
        w = self.world
        out = np.full(w.n_ue, -np.inf)
        attached = w.serving != DETACHED
        idx = np.nonzero(attached)[0]
        out[idx] = 10.0 * np.log10(self._sinr_lin[idx, w.serving[idx]])
        return out

    def _step_slot(self) -> None:
        w, cfg = self.world, self.cfg
        dt = cfg.slot_duration

        step_mobility(
            w.ue_pos, w.ue_heading, w.ue_heading_timer, w.ue_speed, dt,
            cfg.inter_site_distance, cfg, self._mobility_rng,
        )
        w.backlog += w.traffic.arrivals(dt, self._traffic_rng)

        self._sinr_lin = self._recompute_sinr()
        serving_sinr_db = self._serving_sinr_db()
        mcs = radio.select_mcs_array(
            np.where(np.isfinite(serving_sinr_db), serving_sinr_db, 0.0), cfg
        )
        # links in failure carry no data this slot
        healthy = serving_sinr_db >= cfg.sinr_rlf_threshold
        served = np.zeros(w.n_ue)
        radio.schedule_all_cells(
            w.serving, w.status.active, w.backlog, mcs, w.rr_offsets,
            w.counters, served, cfg, allowed=healthy,
        )
        w.backlog -= served

        # non-persistent (UDP-style) queues drain when the UE has no serving cell
        w.backlog[(w.serving == DETACHED) & ~self._queue_persists] = 0.0

        for ue, target in w.handover.step(w.serving, self._sinr_lin, w.status.active, dt):
            w.serving[ue] = target
            w.last_serving[ue] = target

        w.status.advance(dt)
        self.slot += 1

    def run_interval(self) -> KpmReport:
        """Advance one full control interval and return its KPM report."""
        if self.done:
            raise RuntimeError("simulation already finished")
        for _ in range(self.cfg.slots_per_control_interval):
            self._step_slot()
        w = self.world
        rlf_flags = radio.detect_rlf(self._serving_sinr_db(), self.cfg.sinr_rlf_threshold)
        report = build_report(
            self.interval, w.counters, w.status, w.serving, w.last_serving,
            rlf_flags, self.cfg.tx_power_per_cell,
        )
        w.counters.reset()
        self.interval += 1
        return report

    def apply_action(self, action_index: int) -> list[Transition]:
        """Apply a control action at the current boundary; re-attach displaced UEs."""
        w = self.world
        mask = index_to_mask(action_index, w.n_cells)
        events = w.status.apply_action(mask, self.now)
        if events:
            self._sinr_lin = self._recompute_sinr()
            displaced = np.nonzero(
                [s == DETACHED or not w.status.active[s] for s in w.serving]
            )[0]
            if w.status.active.any():
                active_idx = np.nonzero(w.status.active)[0]
                for ue in displaced:
                    best = active_idx[np.argmax(self._sinr_lin[ue, active_idx])]
                    w.serving[ue] = int(best)
                    w.last_serving[ue] = int(best)
                    w.handover.reset_ue(ue)
            else:
                for ue in displaced:
                    w.serving[ue] = DETACHED
                    w.handover.reset_ue(ue)
        return events

    def view(self) -> WorldView:
        w = self.world
        return WorldView(
            ue_pos=w.ue_pos.copy(),
            ue_speed=w.ue_speed.copy(),
            cells=w.cells,
            active=w.status.active.copy(),
            rx_power_dbm=10.0 * np.log10(self._p_mw),
            noise_mw=self.noise,
        )


def run(
    world: World,
    policy,
    sink: Callable[[KpmReport, int], None] | None = None,
    reward_fn: Callable[[KpmReport], float] | None = None,
) -> RunSummary:
    """Drive a full run: one report and one policy query per control interval.

    The sink receives every (report, chosen action index) pair. The action
    returned at boundary k takes effect for interval k + 1.
    """
    sim = Simulation(world)
    summary = RunSummary(
        seed=world.cfg.seed,
        policy_name=getattr(policy, "name", type(policy).__name__),
        n_intervals=world.cfg.n_control_intervals,
    )
    for k in range(world.cfg.n_control_intervals):
        report = sim.run_interval()
        try:
            action = int(policy.act(report, sim.view()))
        except Exception as exc:
            raise PolicyError(k, exc) from exc
        if sink is not None:
            sink(report, action)
        summary.rho_total.append(float(report.rho.sum()))
        summary.gamma_total.append(float(report.gamma.sum()))
        summary.rlf_total.append(float(report.rlf_count.sum()))
        summary.delta_total.append(float(report.delta_cost.sum()))
        summary.bs_on.append(report.bs_on)
        summary.actions.append(action)
        if reward_fn is not None:
            summary.rewards.append(float(reward_fn(report)))
        summary.transitions.extend(sim.apply_action(action))
    return summary


def always_on_index(n_cells: int) -> int:
    return mask_to_index(np.ones(n_cells, dtype=bool))

"""Cell on/off control, UE attachment, and dynamic-TTT handover.

Transitions are instantaneous at control boundaries (sleep-mode switching
latency is far below a slot). When a cell shuts down, its UEs re-attach to
the best active cell within the same control interval; if no cell is
active they stay detached and count as radio-link failures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig

ACTIVATE = "activate"
DEACTIVATE = "deactivate"
DETACHED = -1


@dataclass(frozen=True)
class Transition:
    """One cell status change for switching-cost accounting."""

    cell_id: int
    t: float
    direction: str
    # Active-span duration the cost accounting sees at the transition:
    # 0.0 for activations (the span restarts) and the length of the span
    # being ended for deactivations.
    td_at_transition: float


class CellStatusMap:
    """Per-cell activity status plus continuous-active-duration (TD) tracking.

    active_duration resets to zero on every inactive->active transition,
    accrues only while active, and freezes at the last span's length while
    inactive.
    """

    def __init__(self, n_cells: int):
        self.active = np.ones(n_cells, dtype=bool)
        self.last_activation_time = np.zeros(n_cells)
        self.active_duration = np.zeros(n_cells)

    @property
    def n_cells(self) -> int:
        return len(self.active)

    @property
    def bs_on(self) -> int:
        return int(self.active.sum())

    def advance(self, dt: float) -> None:
        self.active_duration[self.active] += dt

    def apply_action(self, mask: np.ndarray, now: float) -> list[Transition]:
        """Transition exactly the cells whose bit differs; idempotent otherwise."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.active.shape:
            raise ValueError(f"action mask length {mask.size} != {self.n_cells} cells")
        events: list[Transition] = []
        for cell in np.nonzero(mask != self.active)[0]:
            cell = int(cell)
            if mask[cell]:
                self.active[cell] = True
                self.last_activation_time[cell] = now
                self.active_duration[cell] = 0.0
                events.append(Transition(cell, now, ACTIVATE, 0.0))
            else:
                events.append(Transition(cell, now, DEACTIVATE, float(self.active_duration[cell])))
                self.active[cell] = False
        return events


def effective_ttt(sinr_advantage_db: float, cfg: ScenarioConfig) -> float:
    """Time-to-trigger shrinking with the target's SINR advantage.

    Linear decrease from the base value, floored so a 10 dB advantage (at
    the default slope) reaches the minimum trigger time.
    """
    ttt = cfg.ttt_base * max(0.0, 1.0 - cfg.ttt_slope_per_db * sinr_advantage_db)
    return max(cfg.ttt_min, ttt)


class HandoverState:
    """Per-UE handover candidate and countdown state."""

    def __init__(self, n_ue: int, cfg: ScenarioConfig):
        self.cfg = cfg
        self.candidate = np.full(n_ue, DETACHED, dtype=int)
        self.ttt_remaining = np.zeros(n_ue)
        self._hysteresis_lin = 10.0 ** (cfg.handover_hysteresis_db / 10.0)

    def reset_ue(self, ue: int) -> None:
        self.candidate[ue] = DETACHED
        self.ttt_remaining[ue] = 0.0

    def step(
        self,
        serving: np.ndarray,
        sinr_matrix_lin: np.ndarray,
        active: np.ndarray,
        dt: float,
    ) -> list[tuple[int, int]]:
        """Advance handover evaluation by one slot; returns fired (ue, target) events.

        Detached UEs attach immediately to the best active cell when one
        exists. Attached UEs start/continue a countdown toward the best
        active neighbour whenever its SINR advantage exceeds the hysteresis;
        a growing advantage shortens the remaining wait, never lengthens it.
        """
        if not active.any():
            return []
        n_ue = len(serving)
        active_idx = np.nonzero(active)[0]
        sub = sinr_matrix_lin[:, active_idx]
        best_pos = np.argmax(sub, axis=1)
        best_cell = active_idx[best_pos]
        best_sinr = sub[np.arange(n_ue), best_pos]

        attached = (serving != DETACHED) & active[np.where(serving == DETACHED, 0, serving)]
        forced = np.nonzero(~attached)[0]
        self.candidate[forced] = DETACHED
        self.ttt_remaining[forced] = 0.0

        serving_safe = np.where(attached, serving, 0)
        serving_sinr = sinr_matrix_lin[np.arange(n_ue), serving_safe]
        cfg = self.cfg
        pending = (
            attached
            & (best_cell != serving)
            & (best_sinr > serving_sinr * self._hysteresis_lin)
        )

        idle = np.nonzero(attached & ~pending)[0]
        self.candidate[idle] = DETACHED
        self.ttt_remaining[idle] = 0.0

        idx = np.nonzero(pending)[0]
        if idx.size:
            advantage_db = 10.0 * np.log10(best_sinr[idx] / serving_sinr[idx])
            limit = np.maximum(
                cfg.ttt_min,
                cfg.ttt_base * np.maximum(0.0, 1.0 - cfg.ttt_slope_per_db * advantage_db),
            )
            fresh = self.candidate[idx] != best_cell[idx]
            self.candidate[idx] = best_cell[idx]
            self.ttt_remaining[idx] = np.where(
                fresh, limit, np.minimum(self.ttt_remaining[idx], limit)
            ) - dt
        fired = idx[self.ttt_remaining[idx] <= 0.0] if idx.size else idx

        events = [(int(u), int(best_cell[u])) for u in forced]
        events += [(int(u), int(best_cell[u])) for u in fired]
        self.candidate[fired] = DETACHED
        self.ttt_remaining[fired] = 0.0
        return events

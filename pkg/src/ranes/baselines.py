"""Non-learned sleeping policies used for dataset generation and comparison.

Always On keeps every cell active. Random redraws a uniform number of
sleeping cells once per second. The static and dynamic heuristics rank
cells in two phases: first by how many UEs they would cover above a SINR
target within a radius, then (for the cells not already kept on) by
proximity of the nearest UE, either in distance or in travel time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import radio
from .actions import mask_to_index
from .config import ScenarioConfig
from .kpm import KpmReport
from .sim import WorldView


@dataclass(frozen=True)
class HeuristicParams:
    n_on_p1: int
    n_on_p2: int
    n_off: int
    sinr_target_db: float = 13.0
    radius: float = 2000.0

    def validate(self, n_cells: int) -> None:
        if self.n_on_p1 < 0 or self.n_on_p2 < 0 or self.n_off < 0:
            raise ValueError("heuristic counts must be non-negative")
        if self.n_on_p1 + self.n_on_p2 + self.n_off != n_cells:
            raise ValueError(
                f"heuristic counts {self.n_on_p1}+{self.n_on_p2}+{self.n_off} "
                f"must sum to {n_cells}"
            )

    @property
    def label(self) -> str:
        return f"{self.n_on_p1},{self.n_on_p2},{self.n_off}"


class AlwaysOnPolicy:
    name = "always-on"

    def act(self, report: KpmReport, view: WorldView) -> int:
        return (1 << report.n_cells) - 1


class AllOffPolicy:
    """Degenerate reference: every cell asleep (coverage collapses)."""

    name = "all-off"

    def act(self, report: KpmReport, view: WorldView) -> int:
        return 0


class RandomPolicy:
    """Deactivate a uniform random subset once per second, held in between."""

    def __init__(self, cfg: ScenarioConfig, rng: np.random.Generator):
        self.rng = rng
        self.decision_every = max(1, round(1.0 / cfg.control_period))
        self._mask: np.ndarray | None = None
        self.name = "random"

    def act(self, report: KpmReport, view: WorldView) -> int:
        n = report.n_cells
        if self._mask is None or report.t % self.decision_every == 0:
            k = int(self.rng.integers(0, n + 1))
            off = self.rng.choice(n, size=k, replace=False)
            mask = np.ones(n, dtype=bool)
            mask[off] = False
            self._mask = mask
        return mask_to_index(self._mask)


def coverage_counts(view: WorldView, params: HeuristicParams) -> np.ndarray:
    """UEs per cell within the radius whose hypothetical SINR meets the target.

    The hypothetical SINR treats the candidate as serving against the
    currently active interferers.
    """
    n_cells = len(view.cells)
    if len(view.ue_pos) == 0:
        return np.zeros(n_cells, dtype=int)
    sinr = radio.sinr_db_matrix(view.rx_power_dbm, view.active, view.noise_mw)
    diff = view.ue_pos[:, None, :] - view.cells[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return ((dist <= params.radius) & (sinr >= params.sinr_target_db)).sum(axis=0)


def nearest_ue_distance(view: WorldView) -> np.ndarray:
    """Per-cell distance to the closest UE; +inf with no UEs."""
    n_cells = len(view.cells)
    if len(view.ue_pos) == 0:
        return np.full(n_cells, np.inf)
    diff = view.ue_pos[:, None, :] - view.cells[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1]).min(axis=0)


def nearest_ue_time(view: WorldView) -> np.ndarray:
    """Per-cell minimum UE travel time (distance over that UE's speed)."""
    n_cells = len(view.cells)
    if len(view.ue_pos) == 0:
        return np.full(n_cells, np.inf)
    diff = view.ue_pos[:, None, :] - view.cells[None, :, :]
    times = np.hypot(diff[..., 0], diff[..., 1]) / view.ue_speed[:, None]
    return times.min(axis=0)


def _two_phase_mask(
    counts: np.ndarray, phase2_score: np.ndarray, params: HeuristicParams
) -> np.ndarray:
    """Keep the phase-1 winners on, then the best phase-2 cells; rest off.

    Phase 1 ranks by descending coverage count, phase 2 by ascending score;
    all ties break by ascending cell id.
    """
    n = len(counts)
    ids = np.arange(n)
    phase1_order = np.lexsort((ids, -counts))
    winners = set(int(c) for c in phase1_order[: params.n_on_p1])

    rest = np.array([c for c in ids if c not in winners], dtype=int)
    phase2_order = rest[np.lexsort((rest, phase2_score[rest]))]
    keep_on = winners | set(int(c) for c in phase2_order[: params.n_on_p2])

    mask = np.zeros(n, dtype=bool)
    mask[sorted(keep_on)] = True
    return mask


class StaticPolicy:
    def __init__(self, params: HeuristicParams):
        self.params = params
        self.name = f"static:{params.label}"

    def act(self, report: KpmReport, view: WorldView) -> int:
        self.params.validate(report.n_cells)
        counts = coverage_counts(view, self.params)
        mask = _two_phase_mask(counts, nearest_ue_distance(view), self.params)
        return mask_to_index(mask)


class DynamicPolicy:
    def __init__(self, params: HeuristicParams):
        self.params = params
        self.name = f"dynamic:{params.label}"

    def act(self, report: KpmReport, view: WorldView) -> int:
        self.params.validate(report.n_cells)
        counts = coverage_counts(view, self.params)
        mask = _two_phase_mask(counts, nearest_ue_time(view), self.params)
        return mask_to_index(mask)


def parse_heuristic_params(spec: str) -> HeuristicParams:
    parts = [int(p) for p in spec.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected n_on_p1,n_on_p2,n_off, got {spec!r}")
    return HeuristicParams(*parts)


def make_policy(spec: str, cfg: ScenarioConfig, policy_rng: np.random.Generator):
    """Build a baseline policy from its textual spec.

    Recognized: "always-on", "all-off", "random", "static:<a,b,c>",
    "dynamic:<a,b,c>".
    """
    if spec == "always-on":
        return AlwaysOnPolicy()
    if spec == "all-off":
        return AllOffPolicy()
    if spec == "random":
        return RandomPolicy(cfg, policy_rng)
    if spec.startswith("static:"):
        return StaticPolicy(parse_heuristic_params(spec.split(":", 1)[1]))
    if spec.startswith("dynamic:"):
        return DynamicPolicy(parse_heuristic_params(spec.split(":", 1)[1]))
    raise ValueError(f"unknown policy spec {spec!r}")

"""Scenario construction: cell topology, UE drop, and per-run radio state.

The N-cell layout is one cell at the origin (co-sited with the anchor)
plus N-1 cells on a ring at the inter-site distance, equally spaced in
angle. UEs drop uniformly in the disc of that radius; the non-uniform
mode first draws xi excluded cells and rejection-samples positions until
the nearest cell is not excluded, which empties the excluded cells' areas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import radio, rng as rngmod
from .config import ScenarioConfig
from .control import DETACHED, CellStatusMap, HandoverState
from .radio import RadioCounters
from .rng import RngStreams
from .traffic import TrafficState, assign_classes


def cell_positions(cfg: ScenarioConfig) -> np.ndarray:
    """One central cell plus an equally spaced ring of n_gnb - 1 cells."""
    pos = np.zeros((cfg.n_gnb, 2))
    n_ring = cfg.n_gnb - 1
    for j in range(n_ring):
        angle = 2.0 * np.pi * j / n_ring
        pos[j + 1] = (
            cfg.inter_site_distance * np.cos(angle),
            cfg.inter_site_distance * np.sin(angle),
        )
    return pos


def draw_exclusions(cfg: ScenarioConfig, placement_rng: np.random.Generator) -> np.ndarray:
    """Excluded cell ids for the non-uniform drop; empty for uniform."""
    xi = cfg.placement_excluded_count()
    if xi == 0:
        return np.empty(0, dtype=int)
    return np.sort(placement_rng.choice(cfg.n_gnb, size=xi, replace=False))


def _draw_disc(rng: np.random.Generator, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random())
    theta = rng.uniform(0.0, 2.0 * np.pi)
    return np.array([r * np.cos(theta), r * np.sin(theta)])


def draw_ue_positions(
    cfg: ScenarioConfig,
    cells: np.ndarray,
    excluded: np.ndarray,
    placement_rng: np.random.Generator,
) -> np.ndarray:
    """UE drop inside the disc, rejecting positions nearest to excluded cells."""
    excluded_set = set(int(c) for c in excluded)
    out = np.empty((cfg.n_ue, 2))
    for u in range(cfg.n_ue):
        while True:
            p = _draw_disc(placement_rng, cfg.inter_site_distance)
            if not excluded_set:
                break
            nearest = int(np.argmin(np.hypot(*(cells - p).T)))
            if nearest not in excluded_set:
                break
        out[u] = p
    return out


@dataclass
class World:
    """All state of one run: static geometry plus mutable simulation state."""

    cfg: ScenarioConfig
    cells: np.ndarray                  # (n_cells, 2)
    excluded: np.ndarray               # placement exclusion set (cell ids)
    rngs: RngStreams

    ue_pos: np.ndarray                 # (n_ue, 2)
    ue_speed: np.ndarray
    ue_heading: np.ndarray
    ue_heading_timer: np.ndarray
    ue_class: np.ndarray
    shadowing_db: np.ndarray           # (n_ue, n_cells), frozen per run

    status: CellStatusMap
    handover: HandoverState
    serving: np.ndarray                # (n_ue,), DETACHED when no active cell
    last_serving: np.ndarray

    backlog: np.ndarray                # (n_ue,) bytes, inf for full-buffer
    traffic: TrafficState

    counters: RadioCounters = None
    rr_offsets: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def n_cells(self) -> int:
        return self.cfg.n_gnb

    @property
    def n_ue(self) -> int:
        return self.cfg.n_ue


def build_scenario(cfg: ScenarioConfig) -> World:
    """Construct the world; all cells start active and every UE attached."""
    cfg.validate()
    streams = RngStreams(cfg.seed)

    cells = cell_positions(cfg)
    placement = streams.get(rngmod.PLACEMENT)
    excluded = draw_exclusions(cfg, placement)
    ue_pos = draw_ue_positions(cfg, cells, excluded, placement)

    mobility = streams.get(rngmod.MOBILITY)
    ue_speed = mobility.uniform(cfg.ue_speed_min, cfg.ue_speed_max, size=cfg.n_ue)
    ue_heading = mobility.uniform(0.0, 2.0 * np.pi, size=cfg.n_ue)
    ue_heading_timer = mobility.exponential(cfg.heading_epoch_mean, size=cfg.n_ue)

    shadowing = streams.get(rngmod.SHADOWING).normal(
        0.0, cfg.shadowing_sigma_db, size=(cfg.n_ue, cfg.n_gnb)
    )

    ue_class = assign_classes(cfg.n_ue)
    traffic = TrafficState(ue_class, cfg, streams.get(rngmod.TRAFFIC))

    world = World(
        cfg=cfg,
        cells=cells,
        excluded=excluded,
        rngs=streams,
        ue_pos=ue_pos,
        ue_speed=ue_speed,
        ue_heading=ue_heading,
        ue_heading_timer=ue_heading_timer,
        ue_class=ue_class,
        shadowing_db=shadowing,
        status=CellStatusMap(cfg.n_gnb),
        handover=HandoverState(cfg.n_ue, cfg),
        serving=np.full(cfg.n_ue, DETACHED, dtype=int),
        last_serving=np.zeros(cfg.n_ue, dtype=int),
        backlog=np.zeros(cfg.n_ue),
        traffic=traffic,
        counters=RadioCounters(cfg.n_gnb),
        rr_offsets=np.zeros(cfg.n_gnb, dtype=int),
    )

    # initial attachment: every UE joins its best cell (all active at t = 0)
    if cfg.n_ue > 0:
        p_mw = radio.rx_power_mw(world.ue_pos, world.cells,
                                 10.0 ** (-shadowing / 10.0), cfg)
        sinr = radio.sinr_lin_matrix(p_mw, world.status.active, radio.noise_mw(cfg))
        world.serving = np.argmax(sinr, axis=1).astype(int)
        world.last_serving = world.serving.copy()
    return world

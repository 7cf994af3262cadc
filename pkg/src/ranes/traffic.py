"""UE motion and downlink traffic generation.

Four traffic classes: full-buffer (infinite-backlog sentinel), UDP bursty
at ~20 Mbps average, and two TCP bursty classes at ~750 kbps / ~150 kbps.
Bursty classes alternate exponential on/off phases with equal means, with
the on-rate set to twice the class average so the long-run mean matches.
UEs walk a 2-D random walk inside the drop disc, redrawing their heading
at exponential epochs and reflecting at the boundary.
"""

from __future__ import annotations

import numpy as np

from .config import ScenarioConfig

FULL_BUFFER = 0
UDP_BURSTY = 1
TCP_BURSTY_HI = 2
TCP_BURSTY_LO = 3

CLASS_NAMES = ("full-buffer", "udp-bursty", "tcp-bursty-750k", "tcp-bursty-150k")

# TCP-style classes keep queued backlog while unserved; UDP drops it when the
# UE has no active serving cell.
QUEUE_PERSISTS = (True, False, True, True)

INFINITE_BACKLOG = np.inf


def assign_classes(n_ue: int) -> np.ndarray:
    """Deterministic class assignment by UE id.

    Closest integer split to 25/25/25/25; the remainder goes to the bursty
    classes so 63 UEs divide 15/16/16/16.
    """
    base, rem = divmod(n_ue, 4)
    counts = [base, base, base, base]
    for j in range(rem):
        counts[1 + j % 3] += 1
    out = np.empty(n_ue, dtype=np.int8)
    start = 0
    for klass, count in enumerate(counts):
        out[start : start + count] = klass
        start += count
    return out


def class_mean_rate(klass: int, cfg: ScenarioConfig) -> float:
    return (
        cfg.full_buffer_rate,
        cfg.udp_bursty_rate,
        cfg.tcp_bursty_rate_hi,
        cfg.tcp_bursty_rate_lo,
    )[klass]


def burst_on_rate(klass: int, cfg: ScenarioConfig) -> float:
    """On-phase bit rate making the long-run mean equal the class average."""
    duty = cfg.burst_mean_on / (cfg.burst_mean_on + cfg.burst_mean_off)
    return class_mean_rate(klass, cfg) / duty


class TrafficState:
    """Vectorized burst-process state for the whole UE population."""

    def __init__(self, ue_class: np.ndarray, cfg: ScenarioConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.ue_class = ue_class
        n = len(ue_class)
        self.bursty = ue_class != FULL_BUFFER
        self.on = np.zeros(n, dtype=bool)
        self.remaining = np.zeros(n)
        self.rate_on = np.array([burst_on_rate(int(k), cfg) for k in ue_class])
        for u in np.nonzero(self.bursty)[0]:
            self.on[u] = rng.random() < cfg.burst_mean_on / (cfg.burst_mean_on + cfg.burst_mean_off)
            mean = cfg.burst_mean_on if self.on[u] else cfg.burst_mean_off
            self.remaining[u] = rng.exponential(mean)

    def arrivals(self, dt: float, rng: np.random.Generator) -> np.ndarray:
        """Per-UE arriving bytes for one slot; advances the on/off phases.

        Full-buffer UEs report the infinite-backlog sentinel. Phase toggles
        are applied at slot boundaries (slots are far shorter than phases).
        """
        n = len(self.ue_class)
        out = np.zeros(n)
        out[~self.bursty] = INFINITE_BACKLOG
        on_now = self.bursty & self.on
        out[on_now] = self.rate_on[on_now] * dt / 8.0
        idx = np.nonzero(self.bursty)[0]
        self.remaining[idx] -= dt
        expired = idx[self.remaining[idx] <= 0]
        for u in expired:
            while self.remaining[u] <= 0:
                self.on[u] = not self.on[u]
                mean = self.cfg.burst_mean_on if self.on[u] else self.cfg.burst_mean_off
                self.remaining[u] += rng.exponential(mean)
        return out


def step_mobility(
    pos: np.ndarray,
    heading: np.ndarray,
    heading_timer: np.ndarray,
    speed: np.ndarray,
    dt: float,
    region_radius: float,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
) -> None:
    """Advance the random walk by dt in place.

    Headings are redrawn uniformly when their exponential epoch expires;
    UEs reflect specularly at the disc boundary.
    """
    if dt <= 0:
        return
    heading_timer -= dt
    expired = np.nonzero(heading_timer <= 0)[0]
    for u in expired:
        heading[u] = rng.uniform(0.0, 2.0 * np.pi)
        heading_timer[u] = rng.exponential(cfg.heading_epoch_mean)

    pos[:, 0] += speed * dt * np.cos(heading)
    pos[:, 1] += speed * dt * np.sin(heading)

    r = np.hypot(pos[:, 0], pos[:, 1])
    outside = np.nonzero(r > region_radius)[0]
    for u in outside:
        nx, ny = pos[u, 0] / r[u], pos[u, 1] / r[u]
        vx, vy = np.cos(heading[u]), np.sin(heading[u])
        dot = vx * nx + vy * ny
        heading[u] = np.arctan2(vy - 2.0 * dot * ny, vx - 2.0 * dot * nx)
        # fold the radial overshoot back inside
        scale = (2.0 * region_radius - r[u]) / r[u]
        pos[u] *= scale

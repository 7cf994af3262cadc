"""Per-interval KPM reports and the DRL state vector.

Twelve per-cell features plus the global active-cell count give 12*N+1
raw features (85 for the 7-cell scenario). The state layout is cell-major,
feature-minor, with the active-cell count last; throughput, energy, RLF
count and activation cost are quantile-normalized while everything else
is min-max scaled into [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import CellStatusMap, DETACHED
from .features import (
    GLOBAL_FEATURE,
    PER_CELL_FEATURES,
    REWARD_COMPONENTS,
    feature_names,
    n_features,
)
from .radio import RadioCounters
from .reward import NormalizerSet

__all__ = [
    "KpmReport",
    "PER_CELL_FEATURES",
    "GLOBAL_FEATURE",
    "REWARD_COMPONENTS",
    "feature_names",
    "n_features",
    "energy_of_cell",
    "activation_cost",
    "build_report",
    "assemble_state",
]


def energy_of_cell(ec: float, p_tx: float) -> float:
    """Energy proxy of one cell over an interval: transmitted PDUs times tx power."""
    if ec < 0:
        raise ValueError("PDU count must be >= 0")
    if p_tx <= 0:
        raise ValueError("tx power must be > 0")
    return ec * p_tx


def activation_cost(td_ms: float) -> float:
    """Exponentially decaying switching cost 0.9**(0.01 * TD).

    TD is the cell's continuous active duration in milliseconds, so a
    freshly (re)activated cell costs 1.0 and a long-active cell almost 0.
    """
    if td_ms < 0:
        raise ValueError("active duration must be >= 0")
    return 0.9 ** (0.01 * td_ms)


@dataclass
class KpmReport:
    """Raw (unnormalized) KPMs of one control interval."""

    t: int
    rho: np.ndarray                 # PDCP bytes per cell
    gamma: np.ndarray               # PDU count * tx power
    thr_energy_ratio: np.ndarray
    rlf_count: np.ndarray
    rlf_pct: np.ndarray
    prb_count: np.ndarray
    prb_pct: np.ndarray
    pdu_64qam: np.ndarray
    phy_bytes: np.ndarray
    delta_cost: np.ndarray
    active: np.ndarray
    attached_ues: np.ndarray
    bs_on: int

    @property
    def n_cells(self) -> int:
        return len(self.rho)

    def to_values(self) -> np.ndarray:
        """Raw feature vector in the canonical layout (cell-major, bs_on last)."""
        per_cell = np.stack([getattr(self, f) for f in PER_CELL_FEATURES], axis=1)
        return np.concatenate([per_cell.reshape(-1), [float(self.bs_on)]])

    @classmethod
    def from_values(cls, t: int, values: np.ndarray, n_cells: int) -> "KpmReport":
        values = np.asarray(values, dtype=float)
        if values.size != n_features(n_cells):
            raise ValueError(
                f"expected {n_features(n_cells)} values for {n_cells} cells, got {values.size}"
            )
        per_cell = values[:-1].reshape(n_cells, len(PER_CELL_FEATURES))
        fields = {f: per_cell[:, j].copy() for j, f in enumerate(PER_CELL_FEATURES)}
        return cls(t=t, bs_on=int(round(values[-1])), **fields)


def build_report(
    t: int,
    counters: RadioCounters,
    status: CellStatusMap,
    serving: np.ndarray,
    last_serving: np.ndarray,
    rlf_flags: np.ndarray,
    tx_power: float,
) -> KpmReport:
    """Assemble the report at an interval boundary.

    RLF UEs are attributed to their serving cell, or to their last serving
    cell while detached, so the per-cell counts add up to the global count.
    """
    n_cells = status.n_cells
    rho = counters.pdcp_bytes.copy()
    gamma = counters.mac_pdu_count * tx_power
    ratio = np.divide(rho, gamma, out=np.zeros(n_cells), where=gamma > 0)

    owner = np.where(serving == DETACHED, last_serving, serving)
    ue_count = np.bincount(owner, minlength=n_cells).astype(float)
    rlf_count = np.bincount(owner, weights=rlf_flags, minlength=n_cells)
    rlf_pct = np.divide(rlf_count, ue_count, out=np.zeros(n_cells), where=ue_count > 0)

    delta = 0.9 ** (0.01 * status.active_duration * 1e3)
    prb_count = counters.prb_scheduled.copy()
    prb_pct = np.divide(prb_count, counters.prb_total,
                        out=np.zeros(n_cells), where=counters.prb_total > 0)

    attached = serving[serving != DETACHED]
    return KpmReport(
        t=t,
        rho=rho,
        gamma=gamma,
        thr_energy_ratio=ratio,
        rlf_count=rlf_count,
        rlf_pct=rlf_pct,
        prb_count=prb_count,
        prb_pct=prb_pct,
        pdu_64qam=counters.mac_pdu_64qam_count.copy(),
        phy_bytes=counters.phy_bytes.copy(),
        delta_cost=delta,
        active=status.active.astype(float),
        attached_ues=np.bincount(attached, minlength=n_cells).astype(float),
        bs_on=status.bs_on,
    )


def assemble_state(
    report: KpmReport, normalizers: NormalizerSet, quantile_kind: str
) -> np.ndarray:
    """Normalized state vector in [0, 1] with the canonical layout.

    Reward components go through the fitted quantile transformers with the
    agent's output kind; every other feature is min-max scaled and clamped.
    """
    normalizers.require_fitted()
    out = np.empty(n_features(report.n_cells))
    pos = 0
    for _cell in range(report.n_cells):
        for f in PER_CELL_FEATURES:
            value = getattr(report, f)[_cell]
            if f in REWARD_COMPONENTS:
                out[pos] = normalizers.quantile(REWARD_COMPONENTS[f]).transform_one(
                    float(value), quantile_kind
                )
            else:
                out[pos] = normalizers.minmax_one(f, float(value))
            pos += 1
    out[pos] = normalizers.minmax_one(GLOBAL_FEATURE, float(report.bs_on))
    if not np.all(np.isfinite(out)):
        raise ValueError("state vector contains non-finite entries")
    return out

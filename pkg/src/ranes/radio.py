"""Abstracted urban-microcell link model.

Log-distance pathloss anchored to free space at 1 m, per-(UE, cell)
lognormal shadowing frozen for a run, full-power interference from every
active cell, a three-class MCS table and a per-slot round-robin PRB
scheduler. SINR of a UE with no active serving cell is the -inf sentinel.

Links below the failure threshold carry no data, and a cell emits one
aggregate MAC PDU per slot in which it transmits anything, so the energy
counter (PDUs x tx power) tracks how often each RF front end is actually
on the air and shrinks when cells sleep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig

SPEED_OF_LIGHT = 299792458.0
SYMBOLS_PER_SLOT = 14
SUBCARRIERS_PER_PRB = 12

# MCS classes: (name, bits per symbol)
MCS_TABLE = (("QPSK", 2), ("16QAM", 4), ("64QAM", 6))
MCS_64QAM = 2


class ServingInactiveError(RuntimeError):
    """SINR requested for a serving cell that is not active."""


@dataclass(frozen=True)
class LinkState:
    """One (UE, cell) link snapshot; sinr_db is -inf when the UE is detached."""

    ue_id: int
    cell_id: int
    distance: float
    pathloss_db: float
    shadowing_db: float
    sinr_db: float


def reference_pathloss_db(cfg: ScenarioConfig) -> float:
    """Free-space pathloss at the reference distance for the carrier frequency."""
    return 20.0 * math.log10(
        4.0 * math.pi * cfg.pathloss_ref_distance * cfg.carrier_freq / SPEED_OF_LIGHT
    )


def pathloss_db(distance_m: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    """Log-distance pathloss; distances are floored at the reference distance."""
    d = np.maximum(np.asarray(distance_m, dtype=float), cfg.pathloss_ref_distance)
    return reference_pathloss_db(cfg) + 10.0 * cfg.pathloss_exponent * np.log10(
        d / cfg.pathloss_ref_distance
    )


def noise_mw(cfg: ScenarioConfig) -> float:
    """Thermal noise power over the carrier bandwidth, in mW."""
    noise_dbm = -174.0 + 10.0 * math.log10(cfg.bandwidth) + cfg.noise_figure_db
    return 10.0 ** (noise_dbm / 10.0)


def rx_power_mw(
    ue_pos: np.ndarray, cell_pos: np.ndarray, shadowing_lin: np.ndarray, cfg: ScenarioConfig
) -> np.ndarray:
    """(n_ue, n_cells) received power in mW, computed in the linear domain."""
    diff = ue_pos[:, None, :] - cell_pos[None, :, :]
    dist = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), cfg.pathloss_ref_distance)
    tx_mw = cfg.tx_power_per_cell * 1e3
    ref_gain = 10.0 ** (-reference_pathloss_db(cfg) / 10.0)
    return (
        tx_mw * ref_gain
        * (dist / cfg.pathloss_ref_distance) ** (-cfg.pathloss_exponent)
        * shadowing_lin
    )


def rx_power_dbm(
    ue_pos: np.ndarray, cell_pos: np.ndarray, shadowing_db: np.ndarray, cfg: ScenarioConfig
) -> np.ndarray:
    """(n_ue, n_cells) received power from every cell at every UE position."""
    shadowing_lin = 10.0 ** (-shadowing_db / 10.0)
    return 10.0 * np.log10(rx_power_mw(ue_pos, cell_pos, shadowing_lin, cfg))


def sinr_lin_matrix(p_mw: np.ndarray, active: np.ndarray, noise: float) -> np.ndarray:
    """Hypothetical linear SINR of each (UE, candidate cell) pair.

    The candidate is taken as serving; interference is every *other*
    currently active cell at full power plus thermal noise. Valid for both
    active and inactive candidates, which is what the handover logic and
    the coverage-counting heuristics need.
    """
    total_active = p_mw[:, active].sum(axis=1)
    interference = total_active[:, None] - p_mw * active[None, :]
    return p_mw / (interference + noise)


def sinr_db_matrix(rxp_dbm: np.ndarray, active: np.ndarray, noise: float) -> np.ndarray:
    """Hypothetical SINR in dB; see sinr_lin_matrix."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(sinr_lin_matrix(10.0 ** (rxp_dbm / 10.0), active, noise))


def compute_sinr(
    ue_index: int,
    serving: int,
    rxp_dbm: np.ndarray,
    active: np.ndarray,
    noise: float,
) -> float:
    """Serving-link SINR in dB for one UE; contract error if serving is off."""
    if not active[serving]:
        raise ServingInactiveError(f"cell {serving} is inactive")
    return float(sinr_db_matrix(rxp_dbm[ue_index : ue_index + 1], active, noise)[0, serving])


def serving_sinr_db(
    rxp_dbm: np.ndarray, serving: np.ndarray, active: np.ndarray, noise: float
) -> np.ndarray:
    """Per-UE serving SINR; -inf sentinel for detached UEs."""
    matrix = sinr_db_matrix(rxp_dbm, active, noise)
    out = np.full(len(serving), -np.inf)
    attached = serving >= 0
    out[attached] = matrix[np.nonzero(attached)[0], serving[attached]]
    return out


def select_mcs(sinr_db: float, cfg: ScenarioConfig) -> int:
    """MCS class index for a finite SINR; monotone non-decreasing in SINR."""
    if not math.isfinite(sinr_db):
        raise ValueError("select_mcs requires a finite SINR")
    if sinr_db < cfg.mcs_threshold_16qam_db:
        return 0
    if sinr_db < cfg.mcs_threshold_64qam_db:
        return 1
    return 2


def select_mcs_array(sinr_db: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    """Vectorized select_mcs for finite SINR arrays."""
    return np.digitize(sinr_db, (cfg.mcs_threshold_16qam_db, cfg.mcs_threshold_64qam_db))


def bits_per_prb(mcs: int) -> int:
    return SUBCARRIERS_PER_PRB * SYMBOLS_PER_SLOT * MCS_TABLE[mcs][1]


_BITS_PER_PRB = np.array([bits_per_prb(m) for m in range(len(MCS_TABLE))])


def detect_rlf(sinr_db: np.ndarray, threshold_db: float) -> np.ndarray:
    """Boolean RLF flags: serving SINR strictly below threshold (or -inf sentinel)."""
    return np.asarray(sinr_db) < threshold_db


def serving_link_states(
    ue_pos: np.ndarray,
    cell_pos: np.ndarray,
    shadowing_db: np.ndarray,
    serving: np.ndarray,
    active: np.ndarray,
    cfg: ScenarioConfig,
) -> list[LinkState]:
    """Per-UE serving-link snapshots (diagnostics and link-level assertions)."""
    noise = noise_mw(cfg)
    rxp = rx_power_dbm(ue_pos, cell_pos, shadowing_db, cfg)
    sinr = serving_sinr_db(rxp, serving, active, noise)
    out = []
    for ue, cell in enumerate(serving):
        cell = int(cell)
        ref = max(cell, 0)
        d = float(np.hypot(*(ue_pos[ue] - cell_pos[ref])))
        out.append(
            LinkState(
                ue_id=ue,
                cell_id=cell,
                distance=d,
                pathloss_db=float(pathloss_db(np.array([d]), cfg)[0]),
                shadowing_db=float(shadowing_db[ue, ref]),
                sinr_db=float(sinr[ue]),
            )
        )
    return out


@dataclass
class CellRadioCounters:
    """Per-cell accumulators for one control interval."""

    prb_total: int = 0
    prb_scheduled: int = 0
    mac_pdu_count: int = 0
    mac_pdu_64qam_count: int = 0
    pdcp_bytes: float = 0.0
    phy_bytes: float = 0.0

    def reset(self) -> None:
        self.prb_total = 0
        self.prb_scheduled = 0
        self.mac_pdu_count = 0
        self.mac_pdu_64qam_count = 0
        self.pdcp_bytes = 0.0
        self.phy_bytes = 0.0


class RadioCounters:
    """Struct-of-arrays interval accumulators for the whole cell set."""

    FIELDS = ("prb_total", "prb_scheduled", "mac_pdu_count",
              "mac_pdu_64qam_count", "pdcp_bytes", "phy_bytes")

    def __init__(self, n_cells: int):
        self.n_cells = n_cells
        for name in self.FIELDS:
            setattr(self, name, np.zeros(n_cells))

    def reset(self) -> None:
        for name in self.FIELDS:
            getattr(self, name).fill(0.0)

    def cell(self, cell_id: int) -> CellRadioCounters:
        return CellRadioCounters(*(float(getattr(self, f)[cell_id]) for f in self.FIELDS))


def schedule_all_cells(
    serving: np.ndarray,
    active: np.ndarray,
    backlog_bytes: np.ndarray,
    ue_mcs: np.ndarray,
    rr_offsets: np.ndarray,
    counters: RadioCounters,
    served_out: np.ndarray,
    cfg: ScenarioConfig,
    allowed: np.ndarray | None = None,
) -> None:
    """One slot of round-robin scheduling across every active cell at once.

    `allowed` masks out UEs whose link cannot carry data this slot (radio
    link failure). Semantically identical to running
    CellScheduler.schedule_with_mcs per active cell on the same eligible
    sets (an equivalence test holds the two paths together); batched
    because this is the innermost loop of the simulator.
    """
    counters.prb_total[active] += cfg.n_prb
    attached = serving >= 0
    eligible = attached & (backlog_bytes > 0)
    if allowed is not None:
        eligible &= allowed
    eligible[attached] &= active[serving[attached]]
    ids = np.nonzero(eligible)[0]
    if ids.size == 0:
        return
    cells = serving[ids]
    order = np.argsort(cells, kind="stable")
    ids, cells = ids[order], cells[order]

    k = np.bincount(cells, minlength=counters.n_cells)
    nonzero = k > 0
    starts = np.concatenate([[0], np.cumsum(k)])[:-1]
    rank = np.arange(ids.size) - starts[cells]

    k_safe = np.where(nonzero, k, 1)
    base = np.where(nonzero, cfg.n_prb // k_safe, 0)
    rem = np.where(nonzero, cfg.n_prb % k_safe, 0)
    extra = ((rank - rr_offsets[cells]) % k[cells]) < rem[cells]
    alloc = base[cells] + extra
    rr_offsets[nonzero] = (rr_offsets[nonzero] + rem[nonzero]) % k[nonzero]

    bpp = _BITS_PER_PRB[ue_mcs[ids]]
    served = np.minimum(backlog_bytes[ids], alloc * bpp / 8.0)
    got = served > 0
    used_prb = np.minimum(alloc, np.ceil(served * 8.0 / bpp))

    n = counters.n_cells
    counters.prb_scheduled += np.bincount(cells, weights=used_prb * got, minlength=n)
    # one aggregate PDU per (cell, slot) that transmits; 64-QAM when any of
    # the slot's content was 64-QAM-modulated
    counters.mac_pdu_count += np.bincount(cells, weights=got, minlength=n) > 0
    counters.mac_pdu_64qam_count += (
        np.bincount(cells, weights=got & (ue_mcs[ids] == MCS_64QAM), minlength=n) > 0
    )
    pdcp = np.bincount(cells, weights=served, minlength=n)
    counters.pdcp_bytes += pdcp
    counters.phy_bytes += pdcp * (1.0 + cfg.phy_overhead_fraction)
    served_out[ids] += served


@dataclass
class CellScheduler:
    """Round-robin PRB scheduler state for one cell."""

    rr_offset: int = 0

    def schedule_slot(
        self,
        ue_ids: np.ndarray,
        backlog_bytes: np.ndarray,
        ue_sinr_db: np.ndarray,
        counters: CellRadioCounters,
        served_out: np.ndarray,
        cfg: ScenarioConfig,
    ) -> None:
        """Allocate one slot's PRBs round-robin over UEs with backlog.

        Served bytes per UE are written into served_out (indexed by UE id) and
        the cell counters are advanced. The remainder PRBs rotate across slots
        so equal-backlog UEs stay within one PRB quantum of each other.
        """
        mcs = select_mcs_array(np.asarray(ue_sinr_db), cfg)
        self.schedule_with_mcs(np.asarray(ue_ids), backlog_bytes, mcs, counters,
                               served_out, cfg)

    def schedule_with_mcs(
        self,
        ue_ids: np.ndarray,
        backlog_bytes: np.ndarray,
        ue_mcs: np.ndarray,
        counters: CellRadioCounters,
        served_out: np.ndarray,
        cfg: ScenarioConfig,
    ) -> None:
        counters.prb_total += cfg.n_prb
        ids = ue_ids[backlog_bytes[ue_ids] > 0]
        k = len(ids)
        if k == 0:
            return
        base, rem = divmod(cfg.n_prb, k)
        alloc = np.full(k, base)
        if rem:
            alloc[(self.rr_offset + np.arange(rem)) % k] += 1
            self.rr_offset = (self.rr_offset + rem) % k

        mcs = ue_mcs[ids]
        bpp = _BITS_PER_PRB[mcs]
        served = np.minimum(backlog_bytes[ids], alloc * bpp / 8.0)
        got_data = served > 0
        used_prb = np.minimum(alloc, np.ceil(served * 8.0 / bpp).astype(int))
        counters.prb_scheduled += int(used_prb[got_data].sum())
        # one aggregate PDU per transmitting slot; it "uses 64-QAM" when any
        # of its content was 64-QAM-modulated
        if got_data.any():
            counters.mac_pdu_count += 1
            if (got_data & (mcs == MCS_64QAM)).any():
                counters.mac_pdu_64qam_count += 1
        total_served = float(served.sum())
        counters.pdcp_bytes += total_served
        counters.phy_bytes += total_served * (1.0 + cfg.phy_overhead_fraction)
        served_out[ids] += served

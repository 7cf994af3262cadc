"""Canonical KPM feature layout shared by report assembly and normalization.

Cell-major, feature-minor, with the global active-cell count last:
12 per-cell features * N cells + 1 (85 entries for N=7).
"""

from __future__ import annotations

PER_CELL_FEATURES = (
    "rho",
    "gamma",
    "thr_energy_ratio",
    "rlf_count",
    "rlf_pct",
    "prb_count",
    "prb_pct",
    "pdu_64qam",
    "phy_bytes",
    "delta_cost",
    "active",
    "attached_ues",
)
GLOBAL_FEATURE = "bs_on"

# per-cell feature -> quantile-transformer component shared by reward and state
REWARD_COMPONENTS = {
    "rho": "rho",
    "gamma": "gamma",
    "rlf_count": "rlf",
    "delta_cost": "delta",
}
COMPONENT_NAMES = ("rho", "gamma", "rlf", "delta")


def n_features(n_cells: int) -> int:
    return len(PER_CELL_FEATURES) * n_cells + 1


def feature_names(n_cells: int) -> list[str]:
    names = [f"c{c}_{f}" for c in range(n_cells) for f in PER_CELL_FEATURES]
    names.append(GLOBAL_FEATURE)
    return names

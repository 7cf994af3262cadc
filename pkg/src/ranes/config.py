"""Scenario parameterization.

A single flat dataclass holds topology, radio, traffic, mobility, handover
and timing knobs. Every field can be set in a YAML config file and
overridden by a CLI flag of the same name (underscores become dashes).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import yaml

UNIFORM = "uniform"
NON_UNIFORM_PREFIX = "non-uniform"  # "non-uniform-1" .. "non-uniform-3"


class ConfigError(ValueError):
    """Invalid scenario configuration; message names the offending field."""


@dataclass
class ScenarioConfig:
    # topology
    n_gnb: int = 7
    inter_site_distance: float = 1700.0      # m, ring radius and UE drop-disc radius
    n_ue_per_gnb: int = 9
    placement: str = UNIFORM                 # "uniform" | "non-uniform-<xi>"

    # radio
    carrier_freq: float = 850e6              # Hz
    bandwidth: float = 20e6                  # Hz
    tx_power_per_cell: float = 40.0          # W
    pathloss_exponent: float = 3.0
    pathloss_ref_distance: float = 1.0       # m
    shadowing_sigma_db: float = 4.0
    noise_figure_db: float = 0.0
    sinr_rlf_threshold: float = -5.0         # dB, strict "below" comparison
    n_prb: int = 106                         # 20 MHz at 15 kHz subcarrier spacing
    mcs_threshold_16qam_db: float = 5.0
    mcs_threshold_64qam_db: float = 15.0
    phy_overhead_fraction: float = 0.10      # phy bytes = pdcp bytes * (1 + this)

    # timing
    sim_duration: float = 10.0               # s
    control_period: float = 0.1              # s
    slot_duration: float = 0.001             # s

    # mobility
    ue_speed_min: float = 2.0                # m/s
    ue_speed_max: float = 4.0
    heading_epoch_mean: float = 2.0          # s, exponential heading-change epochs

    # traffic (class averages; on-rate is 2x the average at 50% duty cycle)
    full_buffer_rate: float = 20e6           # bits/s nominal app rate
    udp_bursty_rate: float = 20e6
    tcp_bursty_rate_hi: float = 750e3
    tcp_bursty_rate_lo: float = 150e3
    burst_mean_on: float = 0.5               # s
    burst_mean_off: float = 0.5

    # handover (dynamic time-to-trigger)
    ttt_base: float = 0.256                  # s
    ttt_min: float = 0.016
    handover_hysteresis_db: float = 3.0
    ttt_slope_per_db: float = 0.09375        # 10 dB advantage reaches ttt_min

    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n_gnb < 1:
            raise ConfigError(f"n_gnb must be >= 1, got {self.n_gnb}")
        if self.n_ue_per_gnb < 0:
            raise ConfigError(f"n_ue_per_gnb must be >= 0, got {self.n_ue_per_gnb}")
        if self.slot_duration <= 0:
            raise ConfigError(f"slot_duration must be > 0, got {self.slot_duration}")
        if not _is_integer_multiple(self.control_period, self.slot_duration):
            raise ConfigError(
                f"control_period {self.control_period} is not an integer multiple "
                f"of slot_duration {self.slot_duration}"
            )
        if self.sim_duration < 0:
            raise ConfigError(f"sim_duration must be >= 0, got {self.sim_duration}")
        if not _is_integer_multiple(self.sim_duration, self.control_period):
            raise ConfigError(
                f"sim_duration {self.sim_duration} is not an integer multiple "
                f"of control_period {self.control_period}"
            )
        if self.inter_site_distance <= 0:
            raise ConfigError("inter_site_distance must be > 0")
        if self.tx_power_per_cell <= 0:
            raise ConfigError("tx_power_per_cell must be > 0")
        if not (0 < self.ttt_min <= self.ttt_base):
            raise ConfigError("ttt_min must satisfy 0 < ttt_min <= ttt_base")
        if self.ue_speed_min > self.ue_speed_max or self.ue_speed_min < 0:
            raise ConfigError("ue_speed_range must satisfy 0 <= min <= max")
        self.placement_excluded_count()  # validates the placement string

    def placement_excluded_count(self) -> int:
        """Number of cells excluded from UE positioning (0 for uniform)."""
        if self.placement == UNIFORM:
            return 0
        if self.placement.startswith(NON_UNIFORM_PREFIX + "-"):
            try:
                xi = int(self.placement.rsplit("-", 1)[1])
            except ValueError:
                raise ConfigError(f"placement: cannot parse {self.placement!r}") from None
            if not 1 <= xi < self.n_gnb:
                raise ConfigError(f"placement: exclusion count {xi} out of range")
            return xi
        raise ConfigError(f"placement: unknown mode {self.placement!r}")

    @property
    def n_ue(self) -> int:
        return self.n_gnb * self.n_ue_per_gnb

    @property
    def slots_per_control_interval(self) -> int:
        return round(self.control_period / self.slot_duration)

    @property
    def n_control_intervals(self) -> int:
        return round(self.sim_duration / self.control_period)

    def replace(self, **kwargs) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path: str) -> "ScenarioConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"scenario file {path} must hold a mapping")
        return cls.from_dict(data)


def _is_integer_multiple(value: float, base: float, tol: float = 1e-9) -> bool:
    if base <= 0:
        return False
    ratio = value / base
    return abs(ratio - round(ratio)) < tol


def scenario_fields() -> list[dataclasses.Field]:
    return list(dataclasses.fields(ScenarioConfig))

"""Reward weights, quantile / min-max normalizers, and reward computation.

The reward of a control interval is a weighted combination of normalized
per-cell KPMs summed over cells:

    total = w1*sum(rho~) - w2*sum(gamma~) - w3*sum(rlf~) - w4*sum(delta~)
            - w2 * bs_on / n_cells

where the tilded components go through quantile transformers fitted on the
training corpus (uniform output, or normal output affinely rescaled into
[0, 1]) and the active-cell count is scaled by the number of cells.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np
from scipy.special import ndtri

from .features import GLOBAL_FEATURE, PER_CELL_FEATURES, REWARD_COMPONENTS

if TYPE_CHECKING:  # pragma: no cover
    from .kpm import KpmReport

UNIFORM_KIND = "uniform"
NORMAL_KIND = "normal"

# normal-kind outputs are clipped at +-3 sigma before rescaling into [0, 1]
_NORMAL_CLIP_SIGMA = 3.0
_CDF_EPS = 1e-9


class NotFittedError(RuntimeError):
    """Transform requested before the normalizers were fitted."""


@dataclass(frozen=True)
class RewardWeights:
    """One weight set: four weights summing to 1 plus the quantile output kind."""

    name: str
    w1: float
    w2: float
    w3: float
    w4: float
    quantile_kind: str

    def __post_init__(self):
        weights = (self.w1, self.w2, self.w3, self.w4)
        if any(w < 0 for w in weights):
            raise ValueError(f"{self.name}: weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError(f"{self.name}: weights must sum to 1, got {sum(weights)}")
        if self.quantile_kind not in (UNIFORM_KIND, NORMAL_KIND):
            raise ValueError(f"{self.name}: unknown quantile kind {self.quantile_kind!r}")


WEIGHT_TABLE = {
    "PPO-1": RewardWeights("PPO-1", 0.51, 0.19, 0.20, 0.10, NORMAL_KIND),
    "DQN": RewardWeights("DQN", 0.40, 0.40, 0.10, 0.10, UNIFORM_KIND),
    "PPO-2": RewardWeights("PPO-2", 0.40, 0.40, 0.10, 0.10, UNIFORM_KIND),
    "PPO-3": RewardWeights("PPO-3", 0.20, 0.40, 0.20, 0.20, UNIFORM_KIND),
    "PPO-4": RewardWeights("PPO-4", 0.40, 0.32, 0.18, 0.10, UNIFORM_KIND),
    "PPO-5": RewardWeights("PPO-5", 0.45, 0.20, 0.25, 0.10, NORMAL_KIND),
}


def get_weights(name: str) -> RewardWeights:
    try:
        return WEIGHT_TABLE[name]
    except KeyError:
        raise KeyError(f"unknown weight set {name!r}; known: {sorted(WEIGHT_TABLE)}") from None


class QuantileTransformer:
    """Monotone map from a fitted empirical distribution onto [0, 1].

    Fitting stores up to n_quantiles reference quantiles at evenly spaced
    probability levels. The uniform kind returns the (tie-averaged)
    empirical CDF value; the normal kind pushes it through the standard
    normal inverse CDF, clips at +-3 sigma and rescales into [0, 1].
    Out-of-range inputs clamp to the interval ends.
    """

    def __init__(self, references: np.ndarray, levels: np.ndarray):
        references = np.asarray(references, dtype=float)
        levels = np.asarray(levels, dtype=float)
        if references.size != levels.size or references.size < 1:
            raise ValueError("references and levels must be equal-length and non-empty")
        if np.any(np.diff(references) < 0) or np.any(np.diff(levels) < 0):
            raise ValueError("references and levels must be non-decreasing")
        self.references = references
        self.levels = levels

    @classmethod
    def fit(cls, values: Iterable[float], n_quantiles: int = 1000) -> "QuantileTransformer":
        values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                            dtype=float)
        if values.size == 0:
            raise ValueError("cannot fit a quantile transformer on no data")
        n_q = max(2, min(n_quantiles, values.size)) if values.size > 1 else 2
        levels = np.linspace(0.0, 1.0, n_q)
        references = np.quantile(values, levels)
        return cls(references, levels)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        """Tie-averaged empirical CDF values in [0, 1]."""
        x = np.asarray(x, dtype=float)
        forward = np.interp(x, self.references, self.levels)
        backward = -np.interp(-x, -self.references[::-1], -self.levels[::-1])
        return np.clip(0.5 * (forward + backward), 0.0, 1.0)

    def transform(self, x: np.ndarray, kind: str) -> np.ndarray:
        u = self.cdf(x)
        if kind == UNIFORM_KIND:
            return u
        if kind == NORMAL_KIND:
            z = ndtri(np.clip(u, _CDF_EPS, 1.0 - _CDF_EPS))
            z = np.clip(z, -_NORMAL_CLIP_SIGMA, _NORMAL_CLIP_SIGMA)
            return (z + _NORMAL_CLIP_SIGMA) / (2.0 * _NORMAL_CLIP_SIGMA)
        raise ValueError(f"unknown quantile kind {kind!r}")

    def transform_one(self, x: float, kind: str) -> float:
        return float(self.transform(np.asarray([x]), kind)[0])

    def to_dict(self) -> dict:
        return {"references": self.references.tolist(), "levels": self.levels.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "QuantileTransformer":
        return cls(np.asarray(data["references"]), np.asarray(data["levels"]))


class NormalizerSet:
    """Fitted quantile transformers per reward component plus min-max bounds.

    Immutable after fitting; persists to a versioned JSON artifact whose
    content hash ties checkpoints to the exact normalization they trained
    under.
    """

    SCHEMA_VERSION = 1

    def __init__(
        self,
        quantiles: dict[str, QuantileTransformer] | None = None,
        minmax: dict[str, tuple[float, float]] | None = None,
    ):
        self.quantiles = quantiles or {}
        self.minmax = minmax or {}

    @property
    def fitted(self) -> bool:
        return bool(self.quantiles) and bool(self.minmax)

    def require_fitted(self) -> None:
        if not self.fitted:
            raise NotFittedError("normalizers not fitted; run fit_normalizers first")

    def quantile(self, component: str) -> QuantileTransformer:
        self.require_fitted()
        return self.quantiles[component]

    def minmax_one(self, feature: str, x: float) -> float:
        self.require_fitted()
        lo, hi = self.minmax[feature]
        if hi <= lo:
            return 0.0
        return min(1.0, max(0.0, (x - lo) / (hi - lo)))

    # -- persistence ---------------------------------------------------------

    def _payload(self) -> dict:
        return {
            "schema_version": self.SCHEMA_VERSION,
            "quantiles": {k: t.to_dict() for k, t in sorted(self.quantiles.items())},
            "minmax": {k: list(v) for k, v in sorted(self.minmax.items())},
        }

    def content_hash(self) -> str:
        blob = json.dumps(self._payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def save(self, path: str) -> str:
        payload = self._payload()
        payload["content_hash"] = self.content_hash()
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        return payload["content_hash"]

    @classmethod
    def load(cls, path: str) -> "NormalizerSet":
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("schema_version") != cls.SCHEMA_VERSION:
            raise ValueError(f"unsupported normalizer schema {payload.get('schema_version')}")
        loaded = cls(
            quantiles={k: QuantileTransformer.from_dict(v) for k, v in payload["quantiles"].items()},
            minmax={k: (float(lo), float(hi)) for k, (lo, hi) in payload["minmax"].items()},
        )
        expected = payload.get("content_hash")
        if expected is not None and loaded.content_hash() != expected:
            raise ValueError(f"normalizer artifact {path} failed its content hash check")
        return loaded


def fit_normalizers(reports: Iterable["KpmReport"], n_quantiles: int = 1000) -> NormalizerSet:
    """Fit quantile transformers (pooled over cells) and per-feature min-max bounds."""
    per_feature: dict[str, list[np.ndarray]] = {f: [] for f in PER_CELL_FEATURES}
    bs_on: list[float] = []
    for report in reports:
        for f in PER_CELL_FEATURES:
            per_feature[f].append(np.asarray(getattr(report, f), dtype=float))
        bs_on.append(float(report.bs_on))
    if not bs_on:
        raise ValueError("cannot fit normalizers on an empty dataset")

    pooled = {f: np.concatenate(chunks) for f, chunks in per_feature.items()}
    pooled[GLOBAL_FEATURE] = np.asarray(bs_on)

    quantiles = {
        REWARD_COMPONENTS[f]: QuantileTransformer.fit(pooled[f], n_quantiles)
        for f in REWARD_COMPONENTS
    }
    minmax = {f: (float(v.min()), float(v.max())) for f, v in pooled.items()}
    return NormalizerSet(quantiles=quantiles, minmax=minmax)


@dataclass(frozen=True)
class RewardBreakdown:
    """Reward terms of one interval; total = throughput - all penalties."""

    throughput_term: float
    energy_term: float
    rlf_term: float
    cost_term: float
    bson_term: float
    total: float


def compute_reward(
    report: "KpmReport", weights: RewardWeights, normalizers: NormalizerSet
) -> RewardBreakdown:
    normalizers.require_fitted()
    kind = weights.quantile_kind
    sums = {
        comp: float(
            normalizers.quantile(comp).transform(np.asarray(getattr(report, f), float), kind).sum()
        )
        for f, comp in REWARD_COMPONENTS.items()
    }
    throughput_term = weights.w1 * sums["rho"]
    energy_term = weights.w2 * sums["gamma"]
    rlf_term = weights.w3 * sums["rlf"]
    cost_term = weights.w4 * sums["delta"]
    bson_term = weights.w2 * report.bs_on / report.n_cells
    total = throughput_term - energy_term - rlf_term - cost_term - bson_term
    if not np.isfinite(total):
        raise ValueError("non-finite reward")
    return RewardBreakdown(throughput_term, energy_term, rlf_term, cost_term, bson_term, total)

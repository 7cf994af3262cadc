"""Online-inference evaluation: per-interval samples, CDFs, trade-off table.

Policies are evaluated over n runs with disjoint-from-training seeds; the
throughput/energy percentages are paired ratios against Always On runs
executed under the identical seeds, so the Always On row is exactly
(100, 100) by construction.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .baselines import AlwaysOnPolicy, make_policy
from .config import ScenarioConfig
from .sim import RunSummary, run
from .world import build_scenario

METRICS = ("rho", "gamma", "rlf", "delta")


class SeedOverlapError(ValueError):
    """Evaluation seeds must be disjoint from the training corpus seeds."""


def eval_seeds(seed_base: int, n_runs: int) -> list[int]:
    return [seed_base + i for i in range(n_runs)]


def check_seed_disjointness(seeds: list[int], training_seeds: set[int] | None) -> None:
    if not training_seeds:
        return
    clash = sorted(set(seeds) & training_seeds)
    if clash:
        raise SeedOverlapError(
            f"evaluation seeds {clash} overlap the training corpus; "
            "pick a different --seed-base"
        )


@dataclass
class PolicyEval:
    """Evaluation aggregate of one policy."""

    name: str
    seeds: list[int]
    samples: dict[str, np.ndarray]          # per-interval totals, n_runs * T values
    mean_throughput_mbps: float = 0.0
    mean_energy: float = 0.0
    mean_rlf: float = 0.0
    mean_delta: float = 0.0
    throughput_pct: float = 0.0
    energy_pct: float = 0.0
    transitions_after_start: int = 0
    rlf_ue_fraction: float = 0.0
    summaries: list[RunSummary] = field(default_factory=list)


def _collect(name: str, factory, scenario: ScenarioConfig, seeds: list[int]) -> PolicyEval:
    samples: dict[str, list[float]] = {m: [] for m in METRICS}
    summaries = []
    transitions_after_start = 0
    rlf_fracs = []
    for seed in seeds:
        cfg = scenario.replace(seed=seed)
        world = build_scenario(cfg)
        policy = factory(cfg, world)
        summary = run(world, policy)
        summaries.append(summary)
        samples["rho"].extend(summary.rho_total)
        samples["gamma"].extend(summary.gamma_total)
        samples["rlf"].extend(summary.rlf_total)
        samples["delta"].extend(summary.delta_total)
        transitions_after_start += len(summary.transitions_after(0.0))
        if cfg.n_ue > 0 and summary.rlf_total:
            rlf_fracs.append(np.mean(summary.rlf_total) / cfg.n_ue)

    arrays = {m: np.asarray(v) for m, v in samples.items()}
    bytes_to_mbps = 8.0 / scenario.control_period / 1e6
    out = PolicyEval(name=name, seeds=list(seeds), samples=arrays, summaries=summaries)
    if arrays["rho"].size:
        out.mean_throughput_mbps = float(arrays["rho"].mean() * bytes_to_mbps)
        out.mean_energy = float(arrays["gamma"].mean())
        out.mean_rlf = float(arrays["rlf"].mean())
        out.mean_delta = float(arrays["delta"].mean())
    out.transitions_after_start = transitions_after_start
    out.rlf_ue_fraction = float(np.mean(rlf_fracs)) if rlf_fracs else 0.0
    return out


def baseline_factory(spec: str):
    def factory(cfg: ScenarioConfig, world):
        return make_policy(spec, cfg, world.rngs.get(rngmod.POLICY))

    return factory


def checkpoint_factory(policy) -> object:
    """Wrap an already constructed (stateless, greedy) checkpoint policy."""

    def factory(cfg: ScenarioConfig, world):
        return policy

    return factory


def evaluate(
    name: str,
    factory,
    scenario: ScenarioConfig,
    seeds: list[int],
    training_seeds: set[int] | None = None,
    reference: PolicyEval | None = None,
) -> PolicyEval:
    """Evaluate one policy and pair it against an Always On reference.

    The reference is computed under the same seeds when not supplied.
    """
    check_seed_disjointness(seeds, training_seeds)
    result = _collect(name, factory, scenario, seeds)
    if reference is None:
        reference = (
            result
            if name == AlwaysOnPolicy.name
            else _collect(AlwaysOnPolicy.name, baseline_factory("always-on"), scenario, seeds)
        )
    result.throughput_pct = _pct(result.samples["rho"].mean() if result.samples["rho"].size else 0.0,
                                 reference.samples["rho"].mean() if reference.samples["rho"].size else 0.0)
    result.energy_pct = _pct(result.samples["gamma"].mean() if result.samples["gamma"].size else 0.0,
                             reference.samples["gamma"].mean() if reference.samples["gamma"].size else 0.0)
    return result


def _pct(value: float, reference: float) -> float:
    if reference <= 0:
        return 0.0 if value <= 0 else float("inf")
    return float(100.0 * value / reference)


def empirical_cdf(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact empirical CDF: sorted values with ordinates (i+1)/n."""
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        raise ValueError("cannot build a CDF from no samples")
    ordinates = np.arange(1, values.size + 1) / values.size
    return values, ordinates


def write_cdf_csv(path: str, samples: np.ndarray) -> None:
    values, ordinates = empirical_cdf(samples)
    lines = ["value,cdf"]
    lines += [f"{repr(float(v))},{repr(float(c))}" for v, c in zip(values, ordinates)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def sanitize_name(name: str) -> str:
    return name.replace(":", "-").replace(",", "-").replace("/", "-")


COMPARE_COLUMNS = (
    "policy,throughput_pct,energy_pct,mean_throughput_mbps,mean_energy,"
    "mean_rlf,mean_delta,n_runs"
)


def write_compare_outputs(results: list[PolicyEval], out_dir: str) -> str:
    """Trade-off table plus one CDF CSV per (policy, metric); returns table path."""
    os.makedirs(out_dir, exist_ok=True)
    lines = [COMPARE_COLUMNS]
    for r in results:
        lines.append(
            f"{r.name},{round(float(r.throughput_pct), 10)!r},"
            f"{round(float(r.energy_pct), 10)!r},"
            f"{float(r.mean_throughput_mbps)!r},{float(r.mean_energy)!r},"
            f"{float(r.mean_rlf)!r},{float(r.mean_delta)!r},{len(r.seeds)}"
        )
        for metric in METRICS:
            if r.samples[metric].size:
                write_cdf_csv(
                    os.path.join(out_dir, f"cdf_{metric}_{sanitize_name(r.name)}.csv"),
                    r.samples[metric],
                )
    table_path = os.path.join(out_dir, "tradeoff.csv")
    with open(table_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return table_path

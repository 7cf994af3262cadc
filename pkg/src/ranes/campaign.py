"""Dataset campaign driver and offline-corpus loading.

A campaign is a grid of (policy, placement) combinations, each repeated
with distinct seeds. Every run writes one CSV of raw (unnormalized) KPM
rows plus a CSV of cell on/off transition events, all covered by SHA-256
hashes in a JSON manifest, so rewards under any weight set remain
reproducible functions of the stored rows.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import rng as rngmod
from .baselines import make_policy
from .config import ScenarioConfig
from .features import feature_names, n_features
from .kpm import KpmReport, assemble_state
from .reward import NormalizerSet, RewardWeights, compute_reward
from .sim import run
from .world import build_scenario

MANIFEST_SCHEMA = 1
RUN_CSV_SCHEMA = 1

DEFAULT_POLICIES = (
    "static:4,2,1", "static:3,2,2", "static:2,2,3",
    "dynamic:4,2,1", "dynamic:3,2,2", "dynamic:2,2,3",
    "random", "always-on",
)


class CorruptionError(RuntimeError):
    """A corpus file failed its manifest hash check."""


@dataclass
class CampaignSpec:
    policies: list[str] = field(default_factory=lambda: list(DEFAULT_POLICIES))
    placements: list[str] = field(default_factory=lambda: ["uniform"])
    runs_per_combo: int = 1
    seed_base: int = 1000
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.runs_per_combo < 1:
            raise ValueError("runs_per_combo must be >= 1")
        if not self.policies or not self.placements:
            raise ValueError("policies and placements must be non-empty")

    @property
    def total_runs(self) -> int:
        return len(self.policies) * len(self.placements) * self.runs_per_combo

    def enumerate_runs(self):
        """(run_id, policy, placement, seed) rows in deterministic order."""
        index = 0
        for policy in self.policies:
            for placement in self.placements:
                for _ in range(self.runs_per_combo):
                    yield f"run_{index:04d}", policy, placement, self.seed_base + index
                    index += 1

    @classmethod
    def from_yaml(cls, path: str) -> "CampaignSpec":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        scenario = ScenarioConfig.from_dict(data.pop("scenario", {}))
        return cls(scenario=scenario, **data)


def run_columns(n_cells: int) -> list[str]:
    return feature_names(n_cells) + [
        "run_id", "seed", "policy", "placement", "t", "action",
        "sum_rho", "sum_gamma", "sum_rlf", "sum_delta",
    ]


def _format(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def execute_run(run_id: str, policy_spec: str, placement: str, seed: int,
                scenario: ScenarioConfig, out_dir: str) -> dict:
    """Simulate one run and write its data and transition CSVs atomically."""
    cfg = scenario.replace(seed=seed, placement=placement)
    world = build_scenario(cfg)
    policy = make_policy(policy_spec, cfg, world.rngs.get(rngmod.POLICY))

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(run_columns(cfg.n_gnb))

    def sink(report: KpmReport, action: int) -> None:
        values = [_format(v) for v in report.to_values()]
        values += [
            run_id, str(seed), policy_spec, placement, str(report.t), str(action),
            _format(float(report.rho.sum())), _format(float(report.gamma.sum())),
            _format(float(report.rlf_count.sum())), _format(float(report.delta_cost.sum())),
        ]
        writer.writerow(values)

    summary = run(world, policy, sink=sink)

    data_file = f"{run_id}.csv"
    _atomic_write(os.path.join(out_dir, data_file), buffer.getvalue())

    tr_buffer = io.StringIO()
    tr_writer = csv.writer(tr_buffer, lineterminator="\n")
    tr_writer.writerow(["cell_id", "t", "direction", "td_at_transition"])
    for tr in summary.transitions:
        tr_writer.writerow([tr.cell_id, _format(tr.t), tr.direction,
                            _format(tr.td_at_transition)])
    tr_file = f"{run_id}_transitions.csv"
    _atomic_write(os.path.join(out_dir, tr_file), tr_buffer.getvalue())

    return {
        "run_id": run_id,
        "seed": seed,
        "policy": policy_spec,
        "placement": placement,
        "rows": len(summary.rho_total),
        "file": data_file,
        "sha256": sha256_file(os.path.join(out_dir, data_file)),
        "transitions_file": tr_file,
        "transitions_sha256": sha256_file(os.path.join(out_dir, tr_file)),
        "status": "ok",
    }


def run_campaign(spec: CampaignSpec, out_dir: str, workers: int = 1) -> dict:
    """Execute every run of the campaign and write the manifest.

    Workers own whole runs, so results are identical for any worker count.
    Failed runs are recorded in the manifest instead of aborting the rest.
    """
    os.makedirs(out_dir, exist_ok=True)
    jobs = list(spec.enumerate_runs())
    results: dict[str, dict] = {}

    def note_failure(run_id, policy, placement, seed, exc):
        results[run_id] = {
            "run_id": run_id, "seed": seed, "policy": policy, "placement": placement,
            "status": "failed", "error": repr(exc),
        }

    if workers <= 1:
        for run_id, policy, placement, seed in jobs:
            try:
                results[run_id] = execute_run(run_id, policy, placement, seed,
                                              spec.scenario, out_dir)
            except Exception as exc:
                note_failure(run_id, policy, placement, seed, exc)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(execute_run, run_id, policy, placement, seed,
                            spec.scenario, out_dir): (run_id, policy, placement, seed)
                for run_id, policy, placement, seed in jobs
            }
            for fut, (run_id, policy, placement, seed) in futures.items():
                try:
                    results[run_id] = fut.result()
                except Exception as exc:
                    note_failure(run_id, policy, placement, seed, exc)

    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "run_csv_schema": RUN_CSV_SCHEMA,
        "spec": {
            "policies": spec.policies,
            "placements": spec.placements,
            "runs_per_combo": spec.runs_per_combo,
            "seed_base": spec.seed_base,
            "scenario": spec.scenario.to_dict(),
        },
        "runs": [results[run_id] for run_id, *_ in jobs],
    }
    _atomic_write(
        os.path.join(out_dir, "manifest.json"),
        json.dumps(manifest, sort_keys=True, indent=1) + "\n",
    )
    return manifest


def load_manifest(path: str) -> dict:
    with open(path) as fh:
        manifest = json.load(fh)
    if manifest.get("schema_version") != MANIFEST_SCHEMA:
        raise ValueError(f"unsupported manifest schema {manifest.get('schema_version')}")
    return manifest


def manifest_seeds(manifest: dict) -> set[int]:
    return {entry["seed"] for entry in manifest["runs"]}


def verify_manifest(manifest: dict, base_dir: str) -> None:
    for entry in manifest["runs"]:
        if entry.get("status") != "ok":
            continue
        for file_key, hash_key in (("file", "sha256"),
                                   ("transitions_file", "transitions_sha256")):
            path = os.path.join(base_dir, entry[file_key])
            if sha256_file(path) != entry[hash_key]:
                raise CorruptionError(f"hash mismatch for {path}")


def iter_run_reports(manifest: dict, base_dir: str):
    """Yield (entry, [KpmReport...]) per successful run, oldest row first."""
    n_cells = manifest["spec"]["scenario"]["n_gnb"]
    width = n_features(n_cells)
    for entry in manifest["runs"]:
        if entry.get("status") != "ok":
            continue
        path = os.path.join(base_dir, entry["file"])
        reports = []
        actions = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            t_col, action_col = header.index("t"), header.index("action")
            for parts in reader:
                values = np.array([float(v) for v in parts[:width]])
                reports.append(KpmReport.from_values(int(parts[t_col]), values, n_cells))
                actions.append(int(parts[action_col]))
        yield entry, reports, actions


def iter_reports(manifest: dict, base_dir: str):
    for _entry, reports, _actions in iter_run_reports(manifest, base_dir):
        yield from reports


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


def load_transitions(
    manifest_path: str,
    weights: RewardWeights,
    normalizers: NormalizerSet,
    shuffle_seed: int | None = None,
) -> list[Transition]:
    """Chained transitions of every run with rewards under the given weights.

    A run of T reports yields T-1 transitions; the action stored at row t
    produced the interval reported at row t+1, whose reward it earns. File
    hashes are verified before anything is parsed.
    """
    base_dir = os.path.dirname(os.path.abspath(manifest_path))
    manifest = load_manifest(manifest_path)
    verify_manifest(manifest, base_dir)

    transitions: list[Transition] = []
    for _entry, reports, actions in iter_run_reports(manifest, base_dir):
        states = [assemble_state(r, normalizers, weights.quantile_kind) for r in reports]
        for t in range(len(reports) - 1):
            transitions.append(
                Transition(
                    state=states[t],
                    action=actions[t],
                    reward=compute_reward(reports[t + 1], weights, normalizers).total,
                    next_state=states[t + 1],
                    done=t + 1 == len(reports) - 1,
                )
            )
    if shuffle_seed is not None:
        order = np.random.Generator(np.random.PCG64(shuffle_seed)).permutation(len(transitions))
        transitions = [transitions[i] for i in order]
    return transitions

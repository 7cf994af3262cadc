"""Cell sleep-mode control lab.

A self-contained 7-cell RAN simulator with dynamic cell activation control,
heuristic sleeping baselines, offline DRL agents (ensemble DQN with a
conservative penalty, PPO), and throughput/energy/coverage trade-off
evaluation tooling.
"""

__version__ = "0.1.0"

SCHEMA_VERSIONS = {
    "run_csv": 1,
    "manifest": 1,
    "normalizers": 1,
    "checkpoint": 1,
}

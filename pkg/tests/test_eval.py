import numpy as np
import pytest

from ranes.config import ScenarioConfig
from ranes.evaluate import (
    SeedOverlapError,
    baseline_factory,
    check_seed_disjointness,
    empirical_cdf,
    eval_seeds,
    evaluate,
    write_cdf_csv,
    write_compare_outputs,
)

TINY = ScenarioConfig(sim_duration=1.0, seed=0)


def test_cdf_of_three_samples():
    values, ordinates = empirical_cdf(np.array([3.0, 1.0, 2.0]))
    assert values.tolist() == [1.0, 2.0, 3.0]
    assert ordinates.tolist() == pytest.approx([1 / 3, 2 / 3, 1.0])


def test_cdf_of_constant_samples_steps_to_one():
    values, ordinates = empirical_cdf(np.full(5, 2.5))
    assert set(values.tolist()) == {2.5}
    assert ordinates[-1] == 1.0
    assert np.all(np.diff(ordinates) >= 0)


def test_cdf_rejects_empty():
    with pytest.raises(ValueError):
        empirical_cdf(np.array([]))


def test_merged_cdf_dominated_pointwise_by_sources():
    rng = np.random.default_rng(0)
    a = rng.normal(0, 1, 300)
    b = rng.normal(2, 1, 500)
    merged = np.concatenate([a, b])

    def cdf_at(samples, xs):
        values, ordinates = empirical_cdf(samples)
        return np.searchsorted(values, xs, side="right") / len(values)

    xs = np.linspace(-4, 6, 101)
    fa, fb, fm = cdf_at(a, xs), cdf_at(b, xs), cdf_at(merged, xs)
    lo = np.minimum(fa, fb)
    hi = np.maximum(fa, fb)
    assert np.all(fm >= lo - 1e-12) and np.all(fm <= hi + 1e-12)


def test_eval_seed_helpers():
    assert eval_seeds(100, 3) == [100, 101, 102]
    check_seed_disjointness([1, 2], {3, 4})
    with pytest.raises(SeedOverlapError):
        check_seed_disjointness([1, 2], {2, 9})


def test_evaluate_rejects_training_seed_overlap():
    with pytest.raises(SeedOverlapError):
        evaluate("always-on", baseline_factory("always-on"), TINY, [5, 6],
                 training_seeds={6})


@pytest.fixture(scope="module")
def always_on_eval():
    seeds = eval_seeds(500, 2)
    return evaluate("always-on", baseline_factory("always-on"), TINY, seeds)


def test_always_on_is_exactly_100_percent(always_on_eval):
    assert always_on_eval.throughput_pct == 100.0
    assert always_on_eval.energy_pct == 100.0
    assert always_on_eval.transitions_after_start == 0


def test_sample_counts_are_runs_times_intervals(always_on_eval):
    # 2 runs x 10 intervals of the tiny scenario
    for metric in ("rho", "gamma", "rlf", "delta"):
        assert always_on_eval.samples[metric].size == 20


def test_all_off_yields_zero_energy_and_full_rlf(always_on_eval):
    seeds = eval_seeds(500, 2)
    result = evaluate("all-off", baseline_factory("all-off"), TINY, seeds,
                      reference=always_on_eval)
    # the initial all-active interval is the only one with traffic
    assert result.samples["gamma"][1:10].sum() == 0.0
    later = np.concatenate([result.samples["rlf"][1:10], result.samples["rlf"][11:]])
    assert np.all(later == 63.0)
    assert result.energy_pct < 100.0 / 10 * 1.5  # only interval 0 consumes
    assert result.throughput_pct < 100.0 / 10 * 1.5


def test_compare_outputs_written(tmp_path, always_on_eval):
    table = write_compare_outputs([always_on_eval], str(tmp_path))
    text = (tmp_path / "tradeoff.csv").read_text().splitlines()
    assert text[0].startswith("policy,throughput_pct,energy_pct")
    assert text[1].startswith("always-on,100.0,100.0")
    assert (tmp_path / "cdf_rho_always-on.csv").exists()
    values_line = (tmp_path / "cdf_rho_always-on.csv").read_text().splitlines()[1]
    float(values_line.split(",")[0])  # parses


@pytest.mark.slow
def test_five_full_runs_give_500_samples_per_metric():
    # 5 runs x 100 control intervals at the default 10 s scenario
    result = evaluate("always-on", baseline_factory("always-on"),
                      ScenarioConfig(), eval_seeds(940_000, 5))
    for metric in ("rho", "gamma", "rlf", "delta"):
        assert result.samples[metric].size == 500


def test_cdf_csv_round_trip(tmp_path):
    path = tmp_path / "cdf.csv"
    write_cdf_csv(str(path), np.array([1.0, 2.0, 2.0, 4.0]))
    lines = path.read_text().splitlines()
    assert lines[0] == "value,cdf"
    assert len(lines) == 5
    assert lines[-1].endswith("1.0")

import pytest

from ranes.config import ConfigError, ScenarioConfig


def test_defaults_are_valid():
    cfg = ScenarioConfig()
    assert cfg.n_gnb == 7
    assert cfg.n_ue == 63
    assert cfg.slots_per_control_interval == 100
    assert cfg.n_control_intervals == 100


def test_control_period_must_be_slot_multiple():
    with pytest.raises(ConfigError, match="control_period"):
        ScenarioConfig(control_period=0.00015)


def test_sim_duration_must_be_control_multiple():
    with pytest.raises(ConfigError, match="sim_duration"):
        ScenarioConfig(sim_duration=0.25)


def test_n_gnb_lower_bound():
    with pytest.raises(ConfigError, match="n_gnb"):
        ScenarioConfig(n_gnb=0)


def test_negative_ue_count_rejected():
    with pytest.raises(ConfigError, match="n_ue_per_gnb"):
        ScenarioConfig(n_ue_per_gnb=-1)


def test_placement_modes():
    assert ScenarioConfig(placement="uniform").placement_excluded_count() == 0
    assert ScenarioConfig(placement="non-uniform-2").placement_excluded_count() == 2
    with pytest.raises(ConfigError, match="placement"):
        ScenarioConfig(placement="clustered")
    with pytest.raises(ConfigError, match="placement"):
        ScenarioConfig(placement="non-uniform-9")


def test_zero_duration_is_valid():
    assert ScenarioConfig(sim_duration=0.0).n_control_intervals == 0


def test_yaml_round_trip(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text("n_gnb: 5\nseed: 17\ninter_site_distance: 900.0\n")
    cfg = ScenarioConfig.from_yaml(str(path))
    assert (cfg.n_gnb, cfg.seed, cfg.inter_site_distance) == (5, 17, 900.0)


def test_unknown_field_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        ScenarioConfig.from_dict({"n_gnbs": 7})


def test_replace_revalidates():
    cfg = ScenarioConfig()
    with pytest.raises(ConfigError):
        cfg.replace(sim_duration=0.05)

import numpy as np
import pytest

from ranes import rng as rngmod
from ranes.config import ConfigError, ScenarioConfig
from ranes.world import build_scenario, cell_positions, draw_exclusions


def test_seven_cells_one_central_six_ring():
    cfg = ScenarioConfig()
    pos = cell_positions(cfg)
    assert pos.shape == (7, 2)
    assert np.allclose(pos[0], [0.0, 0.0])
    radii = np.hypot(pos[1:, 0], pos[1:, 1])
    assert np.all(np.abs(radii - 1700.0) < 1e-6)
    angles = np.sort(np.mod(np.arctan2(pos[1:, 1], pos[1:, 0]), 2 * np.pi))
    assert np.allclose(np.diff(angles), np.pi / 3)


def test_single_cell_degenerate_ring():
    pos = cell_positions(ScenarioConfig(n_gnb=1, n_ue_per_gnb=0))
    assert pos.shape == (1, 2)
    assert np.allclose(pos[0], [0.0, 0.0])


def test_uniform_drop_inside_disc():
    world = build_scenario(ScenarioConfig(seed=3))
    radii = np.hypot(world.ue_pos[:, 0], world.ue_pos[:, 1])
    assert len(radii) == 63
    assert np.all(radii <= 1700.0 + 1e-9)
    assert world.excluded.size == 0


def test_non_uniform_exclusion_replays_from_the_placement_stream():
    cfg = ScenarioConfig(placement="non-uniform-3", seed=99)
    world = build_scenario(cfg)
    assert world.excluded.size == 3

    # independent replay of the first draws of the same named stream
    replay = rngmod.stream(99, rngmod.PLACEMENT)
    expected = np.sort(replay.choice(7, size=3, replace=False))
    assert np.array_equal(world.excluded, expected)


def test_non_uniform_leaves_excluded_cells_empty():
    cfg = ScenarioConfig(placement="non-uniform-2", seed=5)
    world = build_scenario(cfg)
    diff = world.ue_pos[:, None, :] - world.cells[None, :, :]
    nearest = np.argmin(np.hypot(diff[..., 0], diff[..., 1]), axis=1)
    assert not set(nearest.tolist()) & set(world.excluded.tolist())
    assert len(world.ue_pos) == 63


def test_build_is_deterministic():
    a = build_scenario(ScenarioConfig(seed=11))
    b = build_scenario(ScenarioConfig(seed=11))
    assert np.array_equal(a.ue_pos, b.ue_pos)
    assert np.array_equal(a.shadowing_db, b.shadowing_db)
    assert np.array_equal(a.serving, b.serving)


def test_all_cells_start_active_and_ues_attached():
    world = build_scenario(ScenarioConfig(seed=1))
    assert world.status.active.all()
    assert (world.serving >= 0).all()
    assert np.array_equal(world.serving, world.last_serving)


def test_speeds_within_configured_range():
    world = build_scenario(ScenarioConfig(seed=2))
    assert np.all(world.ue_speed >= 2.0)
    assert np.all(world.ue_speed <= 4.0)


def test_invalid_config_is_rejected_at_build():
    cfg = ScenarioConfig()
    cfg.n_gnb = 0  # bypass __post_init__ via direct mutation
    with pytest.raises(ConfigError):
        build_scenario(cfg)


def test_exclusions_empty_for_uniform():
    rng = rngmod.stream(0, rngmod.PLACEMENT)
    assert draw_exclusions(ScenarioConfig(), rng).size == 0

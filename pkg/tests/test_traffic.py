import numpy as np
import pytest

from ranes import rng as rngmod
from ranes.config import ScenarioConfig
from ranes.traffic import (
    FULL_BUFFER,
    INFINITE_BACKLOG,
    TCP_BURSTY_HI,
    TCP_BURSTY_LO,
    UDP_BURSTY,
    TrafficState,
    assign_classes,
    burst_on_rate,
    step_mobility,
)

CFG = ScenarioConfig()


def test_population_split_for_63_ues():
    classes = assign_classes(63)
    counts = np.bincount(classes, minlength=4)
    assert counts.tolist() == [15, 16, 16, 16]


def test_split_is_deterministic_and_exhaustive():
    a, b = assign_classes(63), assign_classes(63)
    assert np.array_equal(a, b)
    assert np.bincount(assign_classes(64), minlength=4).tolist() == [16, 16, 16, 16]
    assert np.bincount(assign_classes(5), minlength=4).tolist() == [1, 2, 1, 1]


def test_full_buffer_backlog_is_infinite():
    state = TrafficState(np.array([FULL_BUFFER], dtype=np.int8), CFG,
                         rngmod.stream(0, rngmod.TRAFFIC))
    arrivals = state.arrivals(0.001, rngmod.stream(0, rngmod.TRAFFIC))
    assert arrivals[0] == INFINITE_BACKLOG


def test_off_phase_generates_exactly_zero_bytes():
    state = TrafficState(np.array([UDP_BURSTY], dtype=np.int8), CFG,
                         rngmod.stream(1, rngmod.TRAFFIC))
    state.on[0] = False
    state.remaining[0] = 10.0
    rng = rngmod.stream(2, rngmod.TRAFFIC)
    for _ in range(100):
        assert state.arrivals(0.001, rng)[0] == 0.0


def test_on_rate_doubles_the_class_average():
    assert burst_on_rate(UDP_BURSTY, CFG) == pytest.approx(40e6)
    assert burst_on_rate(TCP_BURSTY_LO, CFG) == pytest.approx(300e3)


@pytest.mark.parametrize("klass,nominal", [(TCP_BURSTY_LO, 150e3), (TCP_BURSTY_HI, 750e3),
                                           (UDP_BURSTY, 20e6)])
def test_long_run_mean_rate_within_5_percent(klass, nominal):
    # Monte-Carlo oracle for the on/off process over a 1000 s horizon
    n = 32  # parallel independent processes to tighten the estimate
    state = TrafficState(np.full(n, klass, dtype=np.int8), CFG,
                         rngmod.stream(3, rngmod.TRAFFIC))
    rng = rngmod.stream(4, rngmod.TRAFFIC)
    dt, horizon = 0.01, 1000.0
    total = 0.0
    for _ in range(int(horizon / dt)):
        total += float(state.arrivals(dt, rng).sum())
    mean_rate = total * 8.0 / horizon / n
    assert mean_rate == pytest.approx(nominal, rel=0.05)


def test_exponential_sampler_mean_within_2_percent():
    rng = rngmod.stream(5, rngmod.TRAFFIC)
    draws = rng.exponential(0.5, size=100_000)
    assert draws.mean() == pytest.approx(0.5, rel=0.02)


def test_zero_duration_step_is_identity():
    rng = rngmod.stream(6, rngmod.MOBILITY)
    pos = np.array([[10.0, 20.0]])
    heading = np.array([0.3])
    timer = np.array([1.0])
    speed = np.array([3.0])
    step_mobility(pos, heading, timer, speed, 0.0, 1700.0, CFG, rng)
    assert np.array_equal(pos, [[10.0, 20.0]])
    assert heading[0] == 0.3 and timer[0] == 1.0


def test_displacement_is_speed_times_dt():
    rng = rngmod.stream(7, rngmod.MOBILITY)
    pos = np.zeros((1, 2))
    heading = np.array([0.0])
    timer = np.array([100.0])  # no heading redraws
    speed = np.array([2.0])
    step_mobility(pos, heading, timer, speed, 0.001, 1700.0, CFG, rng)
    assert pos[0, 0] == pytest.approx(0.002)
    assert pos[0, 1] == pytest.approx(0.0)


def test_walk_stays_inside_bounds_for_1000_walkers():
    # 1000 independently seeded walkers, 10 s each, must never leave the disc
    rng = rngmod.stream(8, rngmod.MOBILITY)
    n = 1000
    radius = 50.0  # tight disc so reflections actually happen
    angles = rng.uniform(0, 2 * np.pi, n)
    radii = radius * np.sqrt(rng.random(n))
    pos = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
    heading = rng.uniform(0, 2 * np.pi, n)
    timer = rng.exponential(CFG.heading_epoch_mean, n)
    speed = rng.uniform(2, 4, n)
    for _ in range(1000):
        step_mobility(pos, heading, timer, speed, 0.01, radius, CFG, rng)
        assert np.all(np.hypot(pos[:, 0], pos[:, 1]) <= radius + 1e-9)


def test_reflection_reverses_outward_motion():
    rng = rngmod.stream(9, rngmod.MOBILITY)
    pos = np.array([[49.9, 0.0]])
    heading = np.array([0.0])  # heading straight out of the disc
    timer = np.array([100.0])
    speed = np.array([4.0])
    step_mobility(pos, heading, timer, speed, 0.1, 50.0, CFG, rng)
    assert np.hypot(pos[0, 0], pos[0, 1]) <= 50.0
    assert abs(abs(heading[0]) - np.pi) < 1e-9  # now pointing inward

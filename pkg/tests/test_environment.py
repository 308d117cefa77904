import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commutesim.config import EnvironmentConfig, ScenarioConfig
from commutesim.environment import (attribute_satisfaction, attribute_satisfaction_all, availability,
                                    compute_indicators, congested_travel_time, init_world, simulate,
                                    step_period, traffic_volume)
from commutesim.modes import ModeState
from commutesim.population import synthesize_population
from commutesim.types import Attribute, ConfigError, Mode

from conftest import small_config

ENV = EnvironmentConfig()


def _state(changes=None):
    s = ModeState.from_config(ScenarioConfig().modes)
    for (field, mode), value in (changes or {}).items():
        s = s.with_value(field, mode, value)
    return s


def test_free_flow():
    s = _state()
    assert congested_travel_time(Mode.CAR, 10.0, 0.0, 100.0, s, ENV) == pytest.approx(10 / s.base_speed[0] * 60)
    pub = congested_travel_time(Mode.PUBLIC, 10.0, 0.0, 100.0, s, ENV)
    assert pub == pytest.approx(10 / s.base_speed[2] * 60 + s.headway[2] / 2)


def test_bpr_at_capacity():
    s = _state({("base_speed", Mode.CAR): 30.0})
    assert congested_travel_time(Mode.CAR, 10.0, 500.0, 500.0, s, ENV) == pytest.approx(23.0)


def test_headway_wait():
    a = congested_travel_time(Mode.PUBLIC, 7.0, 50.0, 100.0, _state({("headway", Mode.PUBLIC): 10.0}), ENV)
    b = congested_travel_time(Mode.PUBLIC, 7.0, 50.0, 100.0, _state({("headway", Mode.PUBLIC): 20.0}), ENV)
    assert b - a == pytest.approx(5.0)


def test_motorcycle_less_congestion_sensitive():
    s = _state()
    ratio_car = congested_travel_time(Mode.CAR, 10, 100, 100, s, ENV) / congested_travel_time(Mode.CAR, 10, 0, 100, s, ENV)
    ratio_moto = congested_travel_time(Mode.MOTORCYCLE, 10, 100, 100, s, ENV) / congested_travel_time(Mode.MOTORCYCLE, 10, 0, 100, s, ENV)
    assert ratio_moto - 1 == pytest.approx(0.5 * (ratio_car - 1))


def test_zero_capacity_is_config_error():
    with pytest.raises(ConfigError):
        congested_travel_time(Mode.CAR, 10, 10, 0.0, _state(), ENV)


@settings(max_examples=100)
@given(st.floats(0.1, 50), st.floats(0, 1e4), st.floats(0, 1e4), st.floats(1, 1e4))
def test_congestion_monotone(dist, v, dv, cap):
    s = _state()
    for mode in (Mode.CAR, Mode.MOTORCYCLE):
        assert congested_travel_time(mode, dist, v + dv, cap, s, ENV) >= congested_travel_time(mode, dist, v, cap, s, ENV)


def _agent(income=1000.0, distance=8.0):
    from commutesim.population import Agent
    from commutesim.types import SES, Sex
    return Agent(0, Sex.F, 30, SES.MID, distance, income, np.full(7, 0.5), 0.5, 0.5, 0.5, 0.5,
                 Mode.PUBLIC, np.zeros(3))


def test_attribute_endpoints():
    s = _state({("fare_per_trip", Mode.PUBLIC): 0.0})
    x = attribute_satisfaction(_agent(), Mode.PUBLIC, s, ENV.t_max, ENV)
    assert x[Attribute.OPERATING_COST] == 1.0
    assert x[Attribute.ACQUISITION_COST] == 1.0
    assert x[Attribute.TRAVEL_TIME] == 0.0
    assert attribute_satisfaction(_agent(), Mode.CAR, s, ENV.t_min, ENV)[Attribute.TRAVEL_TIME] == 1.0
    s2 = _state({("emissions_gpkm", Mode.CAR): ENV.gpkm_max})
    assert attribute_satisfaction(_agent(), Mode.CAR, s2, 30.0, ENV)[Attribute.EMISSIONS] == 0.0


def test_attribute_scalar_matches_population_version(rng):
    cfg = small_config(n_agents=50)
    pop = synthesize_population(cfg.population, rng)
    s = ModeState.from_config(cfg.modes)
    times = rng.uniform(5, 150, (50, 3))
    allx = attribute_satisfaction_all(pop, s, times, cfg.environment)
    assert np.all((allx >= 0) & (allx <= 1))
    for i in range(0, 50, 7):
        for m in Mode:
            one = attribute_satisfaction(pop[i], m, s, times[i, m], cfg.environment)
            assert np.allclose(one, allx[i, m], atol=1e-12)


def test_availability_public_always(rng):
    cfg = small_config(n_agents=200)
    pop = synthesize_population(cfg.population, rng)
    pop.owns[:] = False
    s = ModeState.from_config(cfg.modes).with_value("price", Mode.CAR, 1e12).with_value("price", Mode.MOTORCYCLE, 1e12)
    av = availability(pop, s)
    assert av[:, Mode.PUBLIC].all() and not av[:, :2].any()


def test_co2_single_agent():
    s = _state({("emissions_gpkm", Mode.CAR): 192.0})
    env = dataclasses.replace(ENV, trips_per_year=500.0)
    snap = compute_indicators(np.array([0]), np.array([10.0]), np.array([20.0]), s, env)
    assert snap.co2_total == pytest.approx(960.0)


def test_co2_zero_bus():
    s = _state({("emissions_gpkm", Mode.PUBLIC): 0.0})
    snap = compute_indicators(np.full(5, 2), np.full(5, 10.0), np.full(5, 30.0), s, ENV)
    assert snap.co2_total == 0.0
    assert np.allclose(snap.shares, [0, 0, 1])


def test_accidents_rise_when_car_user_switches_to_moto():
    s = _state()
    modes = np.array([0, 0, 2, 1])
    d = np.array([5.0, 8.0, 3.0, 12.0])
    t = np.full(4, 20.0)
    a = compute_indicators(modes, d, t, s, ENV).accidents_per_100k
    modes[0] = 1
    assert compute_indicators(modes, d, t, s, ENV).accidents_per_100k > a


def test_horizon_and_partition(small_cfg):
    snaps = simulate(small_cfg, [1, 0])
    assert len(snaps) == small_cfg.simulation.years + 1
    assert [s.period for s in snaps] == list(range(small_cfg.simulation.years + 1))
    assert snaps[0].strategy_counts.sum() == 0
    for s in snaps[1:]:
        assert s.strategy_counts.sum() == small_cfg.population.n_agents
    for s in snaps:
        assert abs(s.shares.sum() - 1) < 1e-9
        row = s.as_row()
        assert all(np.isfinite(v) and v >= 0 for v in row.values())


def test_ten_years_of_thirty_ticks(small_cfg):
    cfg = small_cfg.replace(simulation=dataclasses.replace(small_cfg.simulation, years=10))
    world = init_world(cfg, [0, 0])
    calls = []

    class Spy:
        def __init__(self, inner):
            self.inner = inner

        def standard_normal(self, size=None):
            calls.append(size)
            return self.inner.standard_normal(size)

        def __getattr__(self, name):
            return getattr(self.inner, name)
    world.rng = Spy(world.rng)
    for _ in range(cfg.simulation.years):
        step_period(world)
    tick_draws = [c for c in calls if isinstance(c, tuple)]
    assert len(tick_draws) == 10
    assert sum(c[0] for c in tick_draws) == 300
    assert world.period == 10


def test_all_repeat_keeps_shares(small_cfg):
    pop = dataclasses.replace(small_cfg.population,
                              sat_threshold=dataclasses.replace(small_cfg.population.sat_threshold, mean=0.01, sd=0.0),
                              unc_threshold=dataclasses.replace(small_cfg.population.unc_threshold, mean=0.99, sd=0.0),
                              uncertainty_avoidance=dataclasses.replace(small_cfg.population.uncertainty_avoidance,
                                                                        mean=0.0, sd=0.0))
    env = dataclasses.replace(small_cfg.environment, satisfaction_noise=0.0)
    cfg = small_cfg.replace(population=pop, environment=env)
    snaps = simulate(cfg, [3, 0])
    for s in snaps[1:]:
        assert np.array_equal(s.shares, snaps[0].shares)
        assert s.strategy_counts[0] == cfg.population.n_agents


def test_reproducible(small_cfg):
    a = [s.as_row() for s in simulate(small_cfg, [5, 1])]
    b = [s.as_row() for s in simulate(small_cfg, [5, 1])]
    assert a == b


def test_traffic_volume_pcu():
    s = _state()
    assert traffic_volume(np.array([0, 0, 1, 2]), s) == pytest.approx(2 * s.pcu[0] + s.pcu[1])

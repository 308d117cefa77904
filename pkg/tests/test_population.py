import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commutesim.config import DemographicConfig, TruncNormal
from commutesim.population import (Agent, CSV_COLUMNS, age_band, assign_initial_mode, draw_weights,
                                   mode_table, synthesize_population)
from commutesim.types import Attribute, ConfigError, Mode, N_ATTRIBUTES, SES, Sex


def test_ses_shares_converge(rng):
    pop = synthesize_population(DemographicConfig(n_agents=1000), rng)
    shares = np.bincount(pop.ses, minlength=3) / len(pop)
    assert np.all(np.abs(shares - np.array([0.35, 0.45, 0.20])) <= 0.03)


def test_single_agent_within_bounds(rng):
    cfg = DemographicConfig(n_agents=1)
    pop = synthesize_population(cfg, rng)
    assert len(pop) == 1
    a = pop[0]
    assert 16 <= a.age <= 75
    assert cfg.distance.low <= a.commute_distance <= cfg.distance.high
    assert a.income > 0
    assert np.all((a.weights >= 0) & (a.weights <= 1))
    assert 0 < a.sat_threshold < 1 and 0 < a.unc_threshold < 1
    assert 0 <= a.uncertainty_avoidance <= 1 and 0 <= a.collectivism <= 1


def test_deterministic_for_seed():
    cfg = DemographicConfig(n_agents=200)
    a = synthesize_population(cfg, np.random.default_rng(7)).to_csv()
    b = synthesize_population(cfg, np.random.default_rng(7)).to_csv()
    assert a == b
    c = synthesize_population(cfg, np.random.default_rng(8)).to_csv()
    assert a != c


def test_csv_header(rng):
    text = synthesize_population(DemographicConfig(n_agents=5), rng).to_csv()
    header = text.splitlines()[0].split(",")
    assert header == list(CSV_COLUMNS)
    assert header[:7] == ["id", "sex", "age", "ses", "income", "distance", "mode"]
    assert header[-4:] == ["sat_thr", "unc_thr", "ua", "coll"]
    assert len(text.splitlines()) == 6


@pytest.mark.parametrize("field,value", [
    ("ses_shares", (0.5, 0.3, 0.3)),
    ("sex_shares", (0.6, 0.6)),
    ("n_agents", -5),
    ("n_agents", 0),
])
def test_invalid_config_names_field(rng, field, value):
    cfg = dataclasses.replace(DemographicConfig(), **{field: value})
    with pytest.raises(ConfigError) as exc:
        synthesize_population(cfg, rng)
    assert field in exc.value.path


def test_missing_table_row_is_config_error(rng):
    cfg = DemographicConfig()
    del cfg.init_mode_probs["mid"]["F"]["senior"]
    with pytest.raises(ConfigError, match="mid.F.senior"):
        mode_table(cfg)


def test_weights_sd_zero_equals_means(rng):
    means = np.linspace(0.1, 0.9, N_ATTRIBUTES)
    w = draw_weights(means, 0.0, rng)
    assert np.array_equal(w, means)


def test_weights_mean_outside_unit_interval(rng):
    with pytest.raises(ConfigError):
        draw_weights([1.2] + [0.5] * 6, 0.1, rng)
    with pytest.raises(ConfigError):
        draw_weights([0.5] * 7, -0.1, rng)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=7, max_size=7), st.floats(0, 2), st.integers(0, 2**32 - 1))
def test_weights_always_in_unit_interval(means, sd, seed):
    w = draw_weights(means, sd, np.random.default_rng(seed), size=20)
    assert w.shape == (20, 7)
    assert np.all((w >= 0) & (w <= 1))


def _ranked(mean_vec):
    return list(np.argsort(-np.asarray(mean_vec)))


def test_low_ses_weight_ranking(rng):
    cfg = DemographicConfig()
    w = draw_weights(cfg.weight_means["low"], cfg.weight_sd, rng, size=10_000).mean(axis=0)
    top3 = set(_ranked(w)[:3])
    assert top3 == {Attribute.ACQUISITION_COST, Attribute.TRAVEL_TIME, Attribute.OPERATING_COST}
    assert _ranked(w)[-1] == Attribute.EMISSIONS
    # reconstruction of the contradictory low-income statement: security second lowest
    assert _ranked(w)[-2] == Attribute.PERSONAL_SECURITY


def test_mid_ses_weight_ranking(rng):
    cfg = DemographicConfig()
    w = draw_weights(cfg.weight_means["mid"], cfg.weight_sd, rng, size=10_000).mean(axis=0)
    assert set(_ranked(w)[:3]) == {Attribute.TRAVEL_TIME, Attribute.COMFORT, Attribute.PERSONAL_SECURITY}


def test_emissions_least_important_for_all_groups(rng):
    cfg = DemographicConfig()
    for ses in ("low", "mid", "high"):
        assert int(np.argmin(cfg.weight_means[ses])) == Attribute.EMISSIONS


def _agent(ses, sex, age):
    return Agent(id=0, sex=Sex(sex), age=age, ses=SES(ses), commute_distance=5.0, income=1000.0,
                 weights=np.full(7, 0.5), sat_threshold=0.5, unc_threshold=0.5,
                 uncertainty_avoidance=0.5, collectivism=0.5, current_mode=Mode.PUBLIC,
                 experience=np.zeros(3))


def test_degenerate_row_always_car(rng):
    table = np.zeros((3, 2, 3, 3))
    table[..., 0] = 1.0
    agent = _agent(1, 0, 40)
    assert all(assign_initial_mode(agent, table, rng) == Mode.CAR for _ in range(100))


def _private_rate(ses, sex, age, rng, n=10_000):
    table = mode_table(DemographicConfig())
    agent = _agent(ses, sex, age)
    draws = np.array([assign_initial_mode(agent, table, rng) for _ in range(n)])
    return np.mean(draws != Mode.PUBLIC)


def _binom_gap(p1, p2, n=10_000):
    return 3 * np.sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n)


def test_men_more_likely_private(rng):
    for ses in range(3):
        for age in (20, 40, 65):
            pm, pf = _private_rate(ses, Sex.M, age, rng), _private_rate(ses, Sex.F, age, rng)
            assert pm - pf > _binom_gap(pm, pf)


def test_young_low_income_less_private(rng):
    for sex in (Sex.F, Sex.M):
        young = _private_rate(SES.LOW, sex, 20, rng)
        older = _private_rate(SES.LOW, sex, 45, rng)
        assert older - young > _binom_gap(young, older)


def test_private_probability_non_decreasing_in_income():
    table = mode_table(DemographicConfig())
    private = table[..., 0] + table[..., 1]
    assert np.all(np.diff(private, axis=0) >= 0)


def test_initial_shares_sum_to_one(rng):
    pop = synthesize_population(DemographicConfig(n_agents=2000), rng)
    assert abs(pop.mode_shares().sum() - 1.0) < 1e-9


def test_age_bands():
    assert list(age_band([16, 29, 30, 59, 60, 90])) == [0, 0, 1, 1, 2, 2]


def test_truncnormal_age_respects_bounds(rng):
    cfg = dataclasses.replace(DemographicConfig(n_agents=3000), age=TruncNormal(20.0, 30.0, 16.0, 30.0))
    pop = synthesize_population(cfg, rng)
    assert pop.age.min() >= 16 and pop.age.max() <= 30

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commutesim.config import ScenarioConfig
from commutesim.modes import FIELDS, ModeState
from commutesim.policy import (PolicyIntervention, PolicyKind, apply_policies, combine,
                               parse_set_spec)
from commutesim.types import ConfigError, Mode

BASE = ModeState.from_config(ScenarioConfig().modes)


def test_fare_free():
    s = apply_policies(BASE.with_value("fare_per_trip", Mode.PUBLIC, 2.0), [PolicyIntervention("fare")])
    assert s.fare_per_trip[Mode.PUBLIC] == 0.0


def test_fare_free_gives_full_opcost_satisfaction():
    from commutesim.config import EnvironmentConfig
    from commutesim.environment import monthly_cost
    s = apply_policies(BASE, [PolicyIntervention("fare")])
    assert np.all(monthly_cost(np.array([1.0, 20.0, 35.0]), s, EnvironmentConfig())[:, Mode.PUBLIC] == 0)


def test_frequency_boost():
    s = apply_policies(BASE.with_value("headway", Mode.PUBLIC, 12.0), [PolicyIntervention("frequency")])
    assert s.headway[Mode.PUBLIC] == 6.0


def test_security_clamped():
    s = apply_policies(BASE.with_value("security", Mode.PUBLIC, 0.9), [PolicyIntervention("security")])
    assert s.security[Mode.PUBLIC] == 1.0


@pytest.mark.parametrize("kind,mag", [("fare", -0.1), ("fare", 1.5), ("frequency", 0.0),
                                      ("frequency", 2.0), ("security", -0.5)])
def test_magnitude_range(kind, mag):
    with pytest.raises(ConfigError):
        PolicyIntervention(kind, mag)


def test_empty_set_is_identity():
    assert apply_policies(BASE, []).equals(BASE)


kinds = st.lists(st.sampled_from(list(PolicyKind)), unique=True)


@settings(max_examples=50)
@given(kinds, st.floats(0, 1), st.floats(0.01, 1), st.floats(0, 1))
def test_order_independent_idempotent_private_untouched(chosen, fare, head, sec):
    mags = {PolicyKind.FARE_FREE: fare, PolicyKind.FREQUENCY_BOOST: head, PolicyKind.SECURITY_IMPROVEMENT: sec}
    pol = [PolicyIntervention(k, mags[k]) for k in chosen]
    out = apply_policies(BASE, pol)
    for perm in itertools.permutations(pol):
        assert apply_policies(BASE, list(perm)).equals(out)
    assert apply_policies(BASE, pol + pol).equals(out)
    for f in FIELDS:
        assert np.array_equal(getattr(out, f)[:2], getattr(BASE, f)[:2])
    out.validate()


def test_combine_pair():
    sc = combine([PolicyIntervention(k) for k in PolicyKind], [("fare", "security")])
    assert list(sc) == ["fare+security"]
    assert {p.kind for p in sc["fare+security"]} == {PolicyKind.FARE_FREE, PolicyKind.SECURITY_IMPROVEMENT}


def test_combine_base_and_triple():
    sc = combine([PolicyIntervention(k) for k in PolicyKind], "all")
    assert sc["base"] == []
    assert len(sc) == 8
    triple = apply_policies(BASE, sc["fare+frequency+security"])
    assert triple.fare_per_trip[2] == 0 and triple.headway[2] == BASE.headway[2] / 2
    assert triple.security[2] == pytest.approx(min(1.0, BASE.security[2] + 0.2))


def test_start_year():
    p = PolicyIntervention("security", 0.2, start_year=3)
    assert not p.active(2) and p.active(3)


def test_parse_set_spec():
    assert parse_set_spec("pairs") == "pairs"
    assert parse_set_spec("base,fare,fare+security") == [(), ("fare",), ("fare", "security")]

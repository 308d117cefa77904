import dataclasses

import numpy as np
import pytest

from commutesim.config import ScenarioConfig, load_scenario


def small_config(n_agents=300, years=4, reps=3, **sim) -> ScenarioConfig:
    """Default calibration scaled down for fast tests."""
    cfg = load_scenario("cali-default")
    pop = dataclasses.replace(cfg.population, n_agents=n_agents)
    simc = dataclasses.replace(cfg.simulation, years=years, reps=reps, **sim)
    return cfg.replace(population=pop, simulation=simc)


@pytest.fixture
def small_cfg() -> ScenarioConfig:
    return small_config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# acceptance report: one line per criterion in the terminal summary

_criteria: dict[int, tuple[str, str, str]] = {}




@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
    _criteria[number] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title, detail = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2} {status}  {title}: {detail}")

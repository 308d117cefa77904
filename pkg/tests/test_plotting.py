import xml.etree.ElementTree as ET

import pandas as pd
import pytest

from commutesim.harness import run_batch
from commutesim.plotting import plot_shares, share_chart
from commutesim.types import DataError

from conftest import small_config

NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def aggregate():
    return run_batch(small_config(n_agents=100, years=3, reps=3)).aggregate()


def test_three_series_and_bands(aggregate):
    root = ET.fromstring(share_chart(aggregate))
    lines = [e for e in root.iter(NS + "polyline") if e.get("class") == "series"]
    bands = [e for e in root.iter(NS + "polygon") if e.get("class") == "band"]
    assert len(lines) == 3 and len(bands) == 3
    assert sorted(e.get("data-series") for e in lines) == ["car", "mot", "pub"]
    legend = [t.text for t in root.iter(NS + "text")]
    assert {"mot", "car", "pub"} <= set(legend)
    # y axis ticks span [0, 1]
    assert "0.0" in legend and "1.0" in legend


def test_empty_input_writes_nothing(tmp_path):
    out = tmp_path / "fig.svg"
    with pytest.raises(DataError):
        plot_shares(pd.DataFrame(columns=["scenario", "year", "indicator", "mean", "ci_low", "ci_high"]), out)
    assert not out.exists()


def test_writes_file_from_csv(tmp_path, aggregate):
    csv = tmp_path / "aggregate.csv"
    aggregate.to_csv(csv, index=False)
    out = plot_shares(csv, tmp_path / "fig.svg")
    assert out.read_text().startswith("<svg")


def test_unknown_scenario(aggregate):
    with pytest.raises(DataError):
        share_chart(aggregate, scenario="nope")

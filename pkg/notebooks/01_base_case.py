"""
Base case: drift from public transit to private modes
=====================================================

Runs the shipped calibration without policies, prints the mode shares per year
with 95% confidence intervals and the strategy census, and writes a share chart.
Pass a replication count as the first argument (default 10).
"""

import sys
from pathlib import Path

from commutesim.config import load_scenario
from commutesim.harness import export_results, run_batch
from commutesim.plotting import plot_shares

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 10
out = Path("out/base_case")

# the scenario file spells out every input; loading it validates the schema
cfg = load_scenario("cali-default")
print(f"{cfg.population.n_agents} agents, {cfg.simulation.years} years, {reps} replications")

result = run_batch(cfg, reps)
agg = result.aggregate()

# mode shares with t-based confidence intervals
shares = agg[agg.indicator.str.startswith("share_")]
table = shares.pivot(index="year", columns="indicator", values="mean")
print(table.round(3).to_string())
m, lo, hi = result.terminal("share_pub")
print(f"terminal public share {m:.3f} (95% CI {lo:.3f}-{hi:.3f})")

# the strategy census: most agents keep repeating their choice
census = agg[agg.indicator.isin(["n_repeat", "n_imitate", "n_inquire", "n_deliberate"]) & (agg.period > 0)]
print(census.pivot(index="year", columns="indicator", values="mean").round(0).to_string())

# system indicators follow the modal shift
for ind in ("avg_time_min", "avg_speed_kmh", "co2_kg", "accidents_per_100k"):
    s = agg[agg.indicator == ind]
    print(f"{ind:<20} {s['mean'].iloc[0]:12.2f} -> {s['mean'].iloc[-1]:12.2f}")

paths = export_results(result, out)
plot_shares(paths["aggregate"], out / "shares.svg", title="Base case")
print(f"wrote {out}")

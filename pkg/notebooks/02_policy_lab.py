"""
Policy lab: single, paired and combined public-transit interventions
====================================================================

Every scenario reuses the same seeds, so differences between scenarios are
paired replication by replication. Pass a replication count as the first
argument (default 10).
"""

import sys
from pathlib import Path

from commutesim.config import load_scenario
from commutesim.harness import export_results, paired_gain, run_sweep
from commutesim.plotting import plot_shares

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 10
out = Path("out/policy_lab")
cfg = load_scenario("cali-default")

# base, three singletons, three pairs and the triple
results = run_sweep(cfg, "all", reps=reps)
base = results["base"]

print(f"{'scenario':<26} {'public share':>12} {'gain (pp)':>10} {'p':>10}")
for name, res in results.items():
    m, _, _ = res.terminal("share_pub")
    if name == "base":
        print(f"{name:<26} {m:12.3f}")
        continue
    g = paired_gain(res, base)
    print(f"{name:<26} {m:12.3f} {100 * g['gain']:10.1f} {g['p']:10.2g}")

paths = export_results(results, out)
for name in ("base", "fare+frequency+security"):
    plot_shares(paths["aggregate"], out / f"{name.replace('+', '_')}.svg", scenario=name)
print(f"wrote {out}")

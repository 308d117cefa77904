"""Monte Carlo replication protocol, confidence intervals and result files."""

from __future__ import annotations

import json
import logging
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from . import __version__
from .config import PolicySpec, ScenarioConfig
from .environment import IndicatorSnapshot, simulate
from .policy import combine

log = logging.getLogger(__name__)

TIMESERIES_COLUMNS = (
    "scenario", "rep", "period", "year", "share_car", "share_moto", "share_pub",
    "avg_time_min", "avg_speed_kmh", "co2_kg", "accidents_per_100k",
    "n_repeat", "n_imitate", "n_inquire", "n_deliberate",
)
INDICATORS = TIMESERIES_COLUMNS[4:]
AGGREGATE_COLUMNS = ("scenario", "period", "year", "indicator", "n", "mean", "sd", "ci_low", "ci_high")


class ReplicationError(RuntimeError):
    def __init__(self, rep: int, seed: tuple, cause: BaseException):
        super().__init__(f"replication {rep} (seed {list(seed)}) failed: {cause!r}")
        self.rep, self.seed = rep, seed


def replication_seed(master_seed: int, rep: int) -> tuple[int, int]:
    """Entropy for replication ``rep``; fed to :class:`numpy.random.SeedSequence`."""
    return (int(master_seed), int(rep))


@dataclass
class Replication:
    rep: int
    seed: tuple
    snapshots: list[IndicatorSnapshot]
    runtime: float


def _run_one(cfg: ScenarioConfig, rep: int) -> Replication:
    seed = replication_seed(cfg.simulation.master_seed, rep)
    t = time.perf_counter()
    try:
        snaps = simulate(cfg, list(seed))
    except Exception as exc:  # report which seed broke, then abort the batch
        raise ReplicationError(rep, seed, exc) from exc
    return Replication(rep, seed, snaps, time.perf_counter() - t)


def mean_ci(values, level: float = 0.95) -> tuple[float, float, float]:
    """Sample mean with a t-based two-sided interval on ``len(values) - 1`` df."""
    x = np.asarray(values, dtype=float)
    m = float(x.mean())
    if len(x) < 2:
        return m, float("nan"), float("nan")
    sd = float(x.std(ddof=1))
    half = float(stats.t.ppf(0.5 + level / 2, len(x) - 1)) * sd / np.sqrt(len(x))
    return m, m - half, m + half


@dataclass
class RunResult:
    scenario: str
    config: ScenarioConfig
    replications: list[Replication] = field(default_factory=list)

    @property
    def reps(self) -> int:
        return len(self.replications)

    def timeseries(self) -> pd.DataFrame:
        rows = []
        for r in sorted(self.replications, key=lambda r: r.rep):
            for s in r.snapshots:
                rows.append({"scenario": self.scenario, "rep": r.rep, **s.as_row()})
        return pd.DataFrame(rows, columns=list(TIMESERIES_COLUMNS))

    def values(self, indicator: str, period: int | None = -1) -> np.ndarray:
        """(reps,) values at ``period`` (default terminal) or (reps, periods) when None."""
        ts = self.timeseries().pivot(index="rep", columns="period", values=indicator)
        arr = ts.to_numpy(dtype=float)
        return arr if period is None else arr[:, period]

    def aggregate(self, level: float = 0.95) -> pd.DataFrame:
        ts = self.timeseries()
        rows = []
        for (period, year), grp in ts.groupby(["period", "year"], sort=True):
            for ind in INDICATORS:
                x = grp[ind].to_numpy(dtype=float)
                m, lo, hi = mean_ci(x, level)
                rows.append({"scenario": self.scenario, "period": int(period), "year": int(year),
                             "indicator": ind, "n": len(x), "mean": m,
                             "sd": float(x.std(ddof=1)) if len(x) > 1 else 0.0,
                             "ci_low": lo, "ci_high": hi})
        return pd.DataFrame(rows, columns=list(AGGREGATE_COLUMNS))

    def terminal(self, indicator: str = "share_pub") -> tuple[float, float, float]:
        return mean_ci(self.values(indicator))


def run_batch(cfg: ScenarioConfig, reps: int | None = None, jobs: int = 1,
              order=None, scenario: str | None = None) -> RunResult:
    """Run ``reps`` replications seeded by ``(master_seed, rep)``.

    ``order`` optionally permutes the execution order; results are always
    collected by replication index, so the outcome does not depend on it, nor on
    ``jobs``.
    """
    cfg.validate()
    reps = cfg.simulation.reps if reps is None else int(reps)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    todo = list(range(reps)) if order is None else [int(r) for r in order]
    if sorted(todo) != list(range(reps)):
        raise ValueError("order must be a permutation of range(reps)")
    out: dict[int, Replication] = {}
    if jobs > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {r: pool.submit(_run_one, cfg, r) for r in todo}
            for r in todo:
                out[r] = futures[r].result()
    else:
        for r in todo:
            out[r] = _run_one(cfg, r)
    name = scenario or cfg.simulation.name
    return RunResult(name, cfg, [out[r] for r in range(reps)])


def run_sweep(cfg: ScenarioConfig, subsets="all", kinds=("fare", "frequency", "security"),
              reps: int | None = None, jobs: int = 1) -> dict[str, RunResult]:
    """Run the base configuration under each requested policy combination.

    Every variant reuses the same master seed, so replication ``r`` of each
    scenario starts from the same population and network (common random numbers).
    Policies already in ``cfg`` supply magnitudes and start years for their kinds.
    """
    from .policy import PolicyIntervention, intervention_from_spec
    pool = [intervention_from_spec(p) for p in cfg.policies]
    have = {p.kind for p in pool}
    pool += [p for p in (PolicyIntervention(k) for k in kinds) if p.kind not in have]
    results = {}
    for name, chosen in combine(pool, subsets).items():
        specs = [PolicySpec(p.kind.value, p.magnitude, p.start_year) for p in chosen]
        results[name] = run_batch(cfg.replace(policies=specs), reps, jobs, scenario=name)
    return results


def paired_gain(result: RunResult, base: RunResult, indicator: str = "share_pub",
                alternative: str = "greater") -> dict:
    """Terminal difference ``result - base`` per replication with a paired t-test."""
    a, b = result.values(indicator), base.values(indicator)
    d = a - b
    mean, lo, hi = mean_ci(d)
    if np.allclose(d, d[0]):
        p = 0.0 if (d[0] > 0 if alternative == "greater" else d[0] < 0) else 1.0
    else:
        p = float(stats.ttest_rel(a, b, alternative=alternative).pvalue)
    return {"gain": mean, "ci_low": lo, "ci_high": hi, "p": p}


@dataclass
class CvResult:
    recommended: int
    stabilized: bool
    trace: list[tuple[int, float]]


def _cv(x: np.ndarray) -> float:
    m = float(np.mean(x))
    sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
    if sd == 0.0:
        return 0.0
    return sd / abs(m) if m != 0 else float("inf")


def cv_stabilization(cfg: ScenarioConfig, indicator: str = "share_pub", max_reps: int = 100,
                     tol: float = 0.005, window: int = 5, min_reps: int = 10,
                     jobs: int = 1) -> CvResult:
    """Smallest replication count at which the CV of the terminal indicator has settled.

    The CV over the first ``r`` replications is traced for growing ``r``; the
    recommendation is the smallest ``r >= min_reps`` whose preceding ``window``
    increments each changed the CV by less than ``tol`` (absolute). Returns
    ``max_reps`` with a warning if that never happens.
    """
    if max_reps < min_reps:
        raise ValueError(f"max_reps must be >= {min_reps}")
    if indicator not in INDICATORS:
        raise ValueError(f"unknown indicator {indicator!r}")
    values = run_batch(cfg, max_reps, jobs).values(indicator)
    start = max(2, min_reps - window)
    trace = [(r, _cv(values[:r])) for r in range(start, max_reps + 1)]
    cvs = dict(trace)
    for r in range(min_reps, max_reps + 1):
        steps = [abs(cvs[q] - cvs[q - 1]) if np.isfinite(cvs[q]) and np.isfinite(cvs[q - 1])
                 else (0.0 if cvs[q] == cvs[q - 1] else np.inf)
                 for q in range(r - window + 1, r + 1)]
        if all(s < tol for s in steps):
            return CvResult(r, True, trace)
    warnings.warn(f"coefficient of variation did not stabilise within {max_reps} replications",
                  RuntimeWarning, stacklevel=2)
    return CvResult(max_reps, False, trace)


def _versions() -> dict:
    import scipy
    return {"commutesim": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "pandas": pd.__version__}


def export_results(results, out_dir) -> dict[str, Path]:
    """Write ``timeseries.csv``, ``aggregate.csv`` and ``meta.json`` into ``out_dir``.

    ``results`` is one :class:`RunResult` or a mapping/sequence of them (a sweep);
    scenarios are written in the given order.
    """
    if isinstance(results, RunResult):
        results = [results]
    elif isinstance(results, dict):
        results = list(results.values())
    if not results:
        raise ValueError("nothing to export")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ts = pd.concat([r.timeseries() for r in results], ignore_index=True)
    agg = pd.concat([r.aggregate() for r in results], ignore_index=True)
    paths = {"timeseries": out / "timeseries.csv", "aggregate": out / "aggregate.csv",
             "meta": out / "meta.json"}
    ts.to_csv(paths["timeseries"], index=False, lineterminator="\n")
    agg.to_csv(paths["aggregate"], index=False, lineterminator="\n")
    meta = {
        "versions": _versions(),
        "scenarios": [{
            "scenario": r.scenario,
            "config_hash": r.config.config_hash(),
            "master_seed": r.config.simulation.master_seed,
            "reps": r.reps,
            "seeds": [list(x.seed) for x in r.replications],
            "runtime_s": [round(x.runtime, 3) for x in r.replications],
            "config": r.config.to_dict(),
        } for r in results],
    }
    paths["meta"].write_text(json.dumps(meta, indent=1) + "\n")
    return paths

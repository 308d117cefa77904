"""Bass diffusion curve, multi-start least-squares fitting and trajectory comparison."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import optimize

from ..types import DataError


@dataclass(frozen=True)
class BassParams:
    p: float            # innovation
    q: float            # imitation
    m: float            # market potential
    residual: float = float("nan")   # sum of squared residuals of the fit

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0 and self.m > 0):
            raise ValueError("p, q and m must be positive")

    @property
    def peak_time(self) -> float:
        """Time of the maximum adoption rate; negative when ``q <= p``."""
        return float(np.log(self.q / self.p) / (self.p + self.q))


def bass_curve(params: BassParams, t) -> np.ndarray | float:
    """Cumulative adopters ``m (1 - e^{-(p+q)t}) / (1 + (q/p) e^{-(p+q)t})``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    e = np.exp(-(params.p + params.q) * t)
    n = params.m * (1.0 - e) / (1.0 + (params.q / params.p) * e)
    return float(n) if n.ndim == 0 else n


def bass_rate(params: BassParams, t) -> np.ndarray | float:
    """Adoption rate dN/dt."""
    t = np.asarray(t, dtype=float)
    p, q, m = params.p, params.q, params.m
    e = np.exp(-(p + q) * t)
    r = m * (p + q) ** 2 / p * e / (1.0 + (q / p) * e) ** 2
    return float(r) if r.ndim == 0 else r


@dataclass
class BassFit:
    params: BassParams
    t0: float                     # calendar year mapped to t = 0
    starts: list                  # (start, residual) for every multi-start candidate

    def predict(self, years) -> np.ndarray:
        return bass_curve(self.params, np.asarray(years, float) - self.t0)


def _validate_series(years, counts, strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    years = np.asarray(years, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if years.shape != counts.shape or years.ndim != 1:
        raise DataError("years and counts must be 1-d and of equal length")
    if len(years) < 4:
        raise DataError(f"need at least 4 points, got {len(years)}")
    if not np.all(np.isfinite(counts)) or not np.all(np.isfinite(years)):
        raise DataError("series contains non-finite values")
    if np.any(np.diff(years) <= 0):
        raise DataError("years must be strictly increasing")
    if strict and np.any(np.diff(counts) <= 0):
        raise DataError("cumulative counts must be strictly increasing")
    if counts[0] < 0:
        raise DataError("cumulative counts must be non-negative")
    return years, counts


def bass_fit(years, counts, t0: float | None = None, grid: int = 3, strict: bool = True) -> BassFit:
    """Least-squares Bass fit from a grid of starting points.

    Starts span ``p`` in [1e-3, 0.1], ``q`` in [0.1, 0.9] and ``m`` in
    [max(counts), 10 max(counts)] (log-spaced for p and m). Each start is
    refined with a trust-region least-squares solve in log-parameters; the
    best residual wins, ties going to the earliest start. ``t0`` defaults to
    one period before the first observation so the first count is positive.
    ``strict=False`` accepts noisy series whose cumulative counts dip.
    """
    years, counts = _validate_series(years, counts, strict)
    if t0 is None:
        step = float(np.min(np.diff(years)))
        t0 = years[0] - step if counts[0] > 0 else years[0]
    t = years - t0
    if np.any(t < 0):
        raise DataError("t0 must not be later than the first year")
    scale = counts.max()
    y = counts / scale

    def resid(z):
        p, q, m = np.exp(z)
        e = np.exp(-(p + q) * t)
        return m * (1.0 - e) / (1.0 + (q / p) * e) - y

    ps = np.geomspace(1e-3, 0.1, grid)
    qs = np.linspace(0.1, 0.9, grid)
    ms = np.geomspace(1.0, 10.0, grid)
    best, starts = None, []
    for p0, q0, m0 in itertools.product(ps, qs, ms):
        z0 = np.log([p0, q0, m0])
        try:
            sol = optimize.least_squares(resid, z0, method="trf", xtol=1e-15, ftol=1e-15,
                                         gtol=1e-15, max_nfev=2000)
        except (ValueError, FloatingPointError):
            continue
        ssr = float(np.sum(sol.fun ** 2) * scale ** 2)
        if not np.isfinite(ssr):
            continue
        starts.append(((p0, q0, m0 * scale), ssr))
        if best is None or ssr < best[1]:
            best = (sol.x, ssr)
    if best is None:
        raise DataError("no multi-start candidate converged")
    p, q, m = np.exp(best[0])
    return BassFit(BassParams(float(p), float(q), float(m * scale), best[1]), float(t0), starts)


def compare_trajectories(abm_series, reference_series) -> tuple[float, float]:
    """``(RMSE, MAPE in percent)``; MAPE divides by the reference series."""
    a = np.asarray(abm_series, dtype=float)
    r = np.asarray(reference_series, dtype=float)
    if a.shape != r.shape:
        raise ValueError("series must be aligned and of equal length")
    if a.size == 0:
        raise ValueError("series are empty")
    if np.any(r == 0):
        raise ValueError("reference series contains zeros; MAPE undefined")
    rmse = float(np.sqrt(np.mean((a - r) ** 2)))
    mape = float(np.mean(np.abs((a - r) / r)) * 100.0)
    return rmse, mape


def read_registry(path: str | Path, strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Read ``registry.csv`` with columns ``year,cumulative_count``."""
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read registry {path}: {exc}") from None
    missing = {"year", "cumulative_count"} - set(df.columns)
    if missing:
        raise DataError(f"registry is missing columns: {', '.join(sorted(missing))}")
    years = pd.to_numeric(df["year"], errors="coerce").to_numpy(float)
    counts = pd.to_numeric(df["cumulative_count"], errors="coerce").to_numpy(float)
    if np.isnan(years).any() or np.isnan(counts).any():
        raise DataError("registry contains non-numeric values")
    return _validate_series(years, counts, strict)

"""Synthetic commuter population.

Agents are stored column-wise in :class:`Population` so the simulation loop can
work on whole arrays; ``population[i]`` gives an :class:`Agent` view of one row.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .config import AGE_BANDS, SES_KEYS, SEX_KEYS, DemographicConfig, LogNormal, TruncNormal
from .types import ATTRIBUTE_KEYS, MODE_KEYS, N_ATTRIBUTES, N_MODES, SES, ConfigError, Mode, Sex

CSV_COLUMNS = (["id", "sex", "age", "ses", "income", "distance", "mode"]
               + [f"w_{k}" for k in ATTRIBUTE_KEYS]
               + ["sat_thr", "unc_thr", "ua", "coll"])


@dataclass
class Agent:
    id: int
    sex: Sex
    age: int
    ses: SES
    commute_distance: float
    income: float
    weights: np.ndarray
    sat_threshold: float
    unc_threshold: float
    uncertainty_avoidance: float
    collectivism: float
    current_mode: Mode
    experience: np.ndarray


@dataclass
class Population:
    sex: np.ndarray          # int, Sex
    age: np.ndarray          # int years
    ses: np.ndarray          # int, SES
    income: np.ndarray       # monthly
    distance: np.ndarray     # km
    weights: np.ndarray      # (n, 7)
    sat_threshold: np.ndarray
    unc_threshold: np.ndarray
    uncertainty_avoidance: np.ndarray
    collectivism: np.ndarray
    mode: np.ndarray         # int, Mode
    experience: np.ndarray   # (n, 3)
    owns: np.ndarray         # (n, 3) bool, vehicles at the agent's disposal

    def __len__(self) -> int:
        return len(self.ses)

    def __getitem__(self, i: int) -> Agent:
        return Agent(
            id=int(i), sex=Sex(int(self.sex[i])), age=int(self.age[i]), ses=SES(int(self.ses[i])),
            commute_distance=float(self.distance[i]), income=float(self.income[i]),
            weights=self.weights[i].copy(), sat_threshold=float(self.sat_threshold[i]),
            unc_threshold=float(self.unc_threshold[i]),
            uncertainty_avoidance=float(self.uncertainty_avoidance[i]),
            collectivism=float(self.collectivism[i]), current_mode=Mode(int(self.mode[i])),
            experience=self.experience[i].copy(),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def n(self) -> int:
        return len(self)

    def copy(self) -> "Population":
        return Population(**{k: v.copy() for k, v in vars(self).items()})

    def mode_shares(self) -> np.ndarray:
        return np.bincount(self.mode, minlength=N_MODES) / len(self)

    def to_csv(self, path=None) -> str:
        """Dump the population for audit; returns the CSV text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i in range(len(self)):
            w.writerow([i, SEX_KEYS[self.sex[i]], int(self.age[i]), SES_KEYS[self.ses[i]],
                        f"{self.income[i]:.6f}", f"{self.distance[i]:.6f}", MODE_KEYS[self.mode[i]],
                        *(f"{x:.6f}" for x in self.weights[i]),
                        f"{self.sat_threshold[i]:.6f}", f"{self.unc_threshold[i]:.6f}",
                        f"{self.uncertainty_avoidance[i]:.6f}", f"{self.collectivism[i]:.6f}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def age_band(age) -> np.ndarray:
    """0 = 16-29, 1 = 30-59, 2 = 60+."""
    age = np.asarray(age)
    return np.where(age < 30, 0, np.where(age < 60, 1, 2))


def sample_truncnormal(dist: TruncNormal, size, rng: np.random.Generator) -> np.ndarray:
    if dist.sd == 0:
        return np.full(size, dist.mean, dtype=float)
    a = (dist.low - dist.mean) / dist.sd
    b = (dist.high - dist.mean) / dist.sd
    return stats.truncnorm.rvs(a, b, loc=dist.mean, scale=dist.sd, size=size, random_state=rng)


def sample_lognormal(dist: LogNormal, size, rng: np.random.Generator) -> np.ndarray:
    x = dist.median * np.exp(dist.sigma * rng.standard_normal(size))
    return np.clip(x, dist.low, dist.high)


def draw_weights(means, sds, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Attribute importance weights for one socioeconomic group.

    Normal draws around ``means`` clamped to [0, 1]. Returns a 7-vector, or an
    ``(size, 7)`` array when ``size`` is given.
    """
    means = np.asarray(means, dtype=float)
    sds = np.broadcast_to(np.asarray(sds, dtype=float), means.shape)
    if means.shape != (N_ATTRIBUTES,):
        raise ConfigError("weight_means", f"expected {N_ATTRIBUTES} values, got shape {means.shape}")
    if np.any((means < 0) | (means > 1)):
        raise ConfigError("weight_means", "means must lie in [0, 1]")
    if np.any(sds < 0):
        raise ConfigError("weight_sd", "must be >= 0")
    shape = (N_ATTRIBUTES,) if size is None else (size, N_ATTRIBUTES)
    return np.clip(means + sds * rng.standard_normal(shape), 0.0, 1.0)


def mode_table(cfg: DemographicConfig) -> np.ndarray:
    """Initial-mode table as an array indexed [ses, sex, age band, mode]."""
    table = np.empty((3, 2, 3, N_MODES))
    for s, ses in enumerate(SES_KEYS):
        for x, sex in enumerate(SEX_KEYS):
            for b, band in enumerate(AGE_BANDS):
                try:
                    table[s, x, b] = cfg.init_mode_probs[ses][sex][band]
                except KeyError:
                    raise ConfigError(f"population.init_mode_probs.{ses}.{sex}.{band}",
                                      "missing table row") from None
    return table


def assign_initial_mode(agent: Agent, table: DemographicConfig | np.ndarray,
                        rng: np.random.Generator) -> Mode:
    """Draw one agent's starting mode from P(mode | ses, sex, age band)."""
    if isinstance(table, DemographicConfig):
        table = mode_table(table)
    row = table[int(agent.ses), int(agent.sex), int(age_band(agent.age))]
    return Mode(int(rng.choice(N_MODES, p=row)))


def _assign_modes(ses, sex, age, table, rng) -> np.ndarray:
    probs = table[ses, sex, age_band(age)]
    cum = np.cumsum(probs, axis=1)
    u = rng.random(len(ses))[:, None]
    return np.minimum((u >= cum).sum(axis=1), N_MODES - 1)


def synthesize_population(cfg: DemographicConfig, rng: np.random.Generator,
                          initial_experience: float = 0.8) -> Population:
    """Draw ``cfg.n_agents`` agents. Deterministic for a given generator state."""
    cfg.validate()
    n = cfg.n_agents
    table = mode_table(cfg)

    ses = rng.choice(3, size=n, p=np.asarray(cfg.ses_shares))
    sex = rng.choice(2, size=n, p=np.asarray(cfg.sex_shares))
    age = np.rint(sample_truncnormal(cfg.age, n, rng)).astype(int)
    income = np.empty(n)
    weights = np.empty((n, N_ATTRIBUTES))
    for s, key in enumerate(SES_KEYS):
        idx = np.flatnonzero(ses == s)
        income[idx] = sample_lognormal(cfg.income[key], len(idx), rng)
        weights[idx] = draw_weights(cfg.weight_means[key], cfg.weight_sd, rng, size=len(idx))
    if np.any(weights.sum(axis=1) <= 0):
        raise ConfigError("population.weight_means", "an agent drew all-zero weights")
    distance = sample_lognormal(cfg.distance, n, rng)
    sat = sample_truncnormal(cfg.sat_threshold, n, rng)
    unc = sample_truncnormal(cfg.unc_threshold, n, rng)
    ua = sample_truncnormal(cfg.uncertainty_avoidance, n, rng)
    coll = sample_truncnormal(cfg.collectivism, n, rng)
    mode = _assign_modes(ses, sex, age, table, rng)

    experience = np.zeros((n, N_MODES))
    experience[np.arange(n), mode] = initial_experience
    owns = np.zeros((n, N_MODES), dtype=bool)
    owns[np.arange(n), mode] = True
    owns[:, Mode.PUBLIC] = True
    return Population(sex=sex, age=age, ses=ses, income=income, distance=distance,
                      weights=weights, sat_threshold=sat, unc_threshold=unc,
                      uncertainty_avoidance=ua, collectivism=coll, mode=mode,
                      experience=experience, owns=owns)

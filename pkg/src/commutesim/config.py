"""Scenario configuration: typed sections, defaults, TOML loading and hashing.

Every field has a default, so an empty file is a valid scenario. Unknown keys
are rejected with the dotted path of the offending entry.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .types import ATTRIBUTE_KEYS, MODE_KEYS, ConfigError

AGE_BANDS = ("young", "adult", "senior")
SES_KEYS = ("low", "mid", "high")
SEX_KEYS = ("F", "M")


@dataclass
class TruncNormal:
    """Normal distribution truncated to ``[low, high]``."""

    mean: float
    sd: float
    low: float = 0.0
    high: float = 1.0

    def validate(self, path: str) -> None:
        if not (self.low <= self.mean <= self.high):
            raise ConfigError(path + ".mean", f"{self.mean} outside [{self.low}, {self.high}]")
        if self.sd < 0:
            raise ConfigError(path + ".sd", "must be >= 0")
        if not (abs(self.low) < float("inf") and abs(self.high) < float("inf")):
            raise ConfigError(path, "bounds must be finite")


@dataclass
class LogNormal:
    """Lognormal given by its median and log-scale sigma, clipped to ``[low, high]``."""

    median: float
    sigma: float
    low: float
    high: float

    def validate(self, path: str) -> None:
        if self.median <= 0:
            raise ConfigError(path + ".median", "must be > 0")
        if self.sigma < 0:
            raise ConfigError(path + ".sigma", "must be >= 0")
        if not (0 < self.low < self.high < float("inf")):
            raise ConfigError(path, "need 0 < low < high < inf")


def _default_init_mode_probs() -> dict[str, dict[str, dict[str, list[float]]]]:
    # (car, moto, pub) per ses / sex / age band
    return {
        "low": {
            "F": {"young": [0.068, 0.272, 0.660], "adult": [0.098, 0.391, 0.511], "senior": [0.095, 0.380, 0.525]},
            "M": {"young": [0.087, 0.350, 0.563], "adult": [0.126, 0.504, 0.370], "senior": [0.122, 0.490, 0.388]},
        },
        "mid": {
            "F": {"young": [0.418, 0.104, 0.478], "adult": [0.601, 0.150, 0.249], "senior": [0.585, 0.146, 0.269]},
            "M": {"young": [0.538, 0.134, 0.328], "adult": [0.774, 0.194, 0.032], "senior": [0.753, 0.188, 0.059]},
        },
        "high": {
            "F": {"young": [0.689, 0.052, 0.259], "adult": [0.762, 0.057, 0.181], "senior": [0.756, 0.057, 0.187]},
            "M": {"young": [0.886, 0.067, 0.047], "adult": [0.911, 0.069, 0.020], "senior": [0.911, 0.069, 0.020]},
        },
    }


def _default_weight_means() -> dict[str, list[float]]:
    # ordered accost, opcost, comfort, safety, security, time, emis
    return {
        "low": [0.90, 0.80, 0.50, 0.55, 0.45, 0.85, 0.30],
        "mid": [0.60, 0.65, 0.80, 0.70, 0.78, 0.85, 0.35],
        "high": [0.62, 0.60, 0.90, 0.80, 0.88, 0.92, 0.38],
    }


@dataclass
class DemographicConfig:
    n_agents: int = 10_000
    ses_shares: tuple[float, float, float] = (0.35, 0.45, 0.20)
    sex_shares: tuple[float, float] = (0.52, 0.48)
    age: TruncNormal = field(default_factory=lambda: TruncNormal(38.0, 13.0, 16.0, 75.0))
    income: dict[str, LogNormal] = field(default_factory=lambda: {
        "low": LogNormal(450.0, 0.35, 150.0, 3000.0),
        "mid": LogNormal(1100.0, 0.35, 300.0, 8000.0),
        "high": LogNormal(3200.0, 0.40, 800.0, 40000.0),
    })
    distance: LogNormal = field(default_factory=lambda: LogNormal(8.0, 0.55, 1.0, 35.0))
    init_mode_probs: dict[str, dict[str, dict[str, list[float]]]] = field(
        default_factory=_default_init_mode_probs)
    weight_means: dict[str, list[float]] = field(default_factory=_default_weight_means)
    weight_sd: float = 0.08
    sat_threshold: TruncNormal = field(default_factory=lambda: TruncNormal(0.55, 0.10, 0.01, 0.99))
    unc_threshold: TruncNormal = field(default_factory=lambda: TruncNormal(0.45, 0.10, 0.01, 0.99))
    uncertainty_avoidance: TruncNormal = field(default_factory=lambda: TruncNormal(0.50, 0.10))
    collectivism: TruncNormal = field(default_factory=lambda: TruncNormal(0.24, 0.10))

    def validate(self, path: str = "population") -> None:
        if not isinstance(self.n_agents, int) or self.n_agents < 1:
            raise ConfigError(path + ".n_agents", "must be an integer >= 1")
        _check_probs(self.ses_shares, 3, path + ".ses_shares")
        _check_probs(self.sex_shares, 2, path + ".sex_shares")
        self.age.validate(path + ".age")
        if self.age.low < 16:
            raise ConfigError(path + ".age.low", "agents are at least 16")
        for ses in SES_KEYS:
            if ses not in self.income:
                raise ConfigError(f"{path}.income.{ses}", "missing")
            self.income[ses].validate(f"{path}.income.{ses}")
        self.distance.validate(path + ".distance")
        for ses in SES_KEYS:
            for sex in SEX_KEYS:
                for band in AGE_BANDS:
                    p = f"{path}.init_mode_probs.{ses}.{sex}.{band}"
                    try:
                        row = self.init_mode_probs[ses][sex][band]
                    except KeyError:
                        raise ConfigError(p, "missing table row") from None
                    _check_probs(row, 3, p)
            if ses not in self.weight_means:
                raise ConfigError(f"{path}.weight_means.{ses}", "missing")
            means = self.weight_means[ses]
            if len(means) != len(ATTRIBUTE_KEYS):
                raise ConfigError(f"{path}.weight_means.{ses}", "need 7 values")
            if any(not 0.0 <= m <= 1.0 for m in means):
                raise ConfigError(f"{path}.weight_means.{ses}", "means must lie in [0, 1]")
            if not any(m > 0 for m in means):
                raise ConfigError(f"{path}.weight_means.{ses}", "all-zero weights")
        if self.weight_sd < 0:
            raise ConfigError(path + ".weight_sd", "must be >= 0")
        for name in ("sat_threshold", "unc_threshold"):
            d = getattr(self, name)
            d.validate(f"{path}.{name}")
            if d.low <= 0 or d.high >= 1:
                raise ConfigError(f"{path}.{name}", "thresholds must stay inside (0, 1)")
        for name in ("uncertainty_avoidance", "collectivism"):
            d = getattr(self, name)
            d.validate(f"{path}.{name}")
            if d.low < 0 or d.high > 1:
                raise ConfigError(f"{path}.{name}", "bounds must lie in [0, 1]")


@dataclass
class NetworkConfig:
    m: int = 2
    homophily: float = 1.0
    bonus: float = 3.0

    def validate(self, path: str = "network") -> None:
        if not isinstance(self.m, int) or self.m < 1:
            raise ConfigError(path + ".m", "must be an integer >= 1")
        if not 0.0 <= self.homophily <= 1.0:
            raise ConfigError(path + ".homophily", "must lie in [0, 1]")
        if self.bonus < 0:
            raise ConfigError(path + ".bonus", "must be >= 0")


@dataclass
class ModeParams:
    price: float                    # acquisition price, 0 for public
    cost_per_km: float              # fuel/maintenance or distance fare
    fare_per_trip: float            # flat fare, public only in the defaults
    base_speed: float               # km/h free flow
    headway: float                  # minutes, public only
    comfort: float                  # [0, 1]
    security: float                 # [0, 1]
    safety_risk: float              # accidents per 100M km
    emissions_gpkm: float           # g CO2 per vehicle-km
    congestion_sensitivity: float   # multiplier on the BPR delay term
    pcu: float                      # contribution to the congested volume
    afford_ratio: float = 0.0       # acquisition allowed when price <= ratio * annual income

    def validate(self, path: str) -> None:
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v < 0:
                raise ConfigError(f"{path}.{f.name}", "must be non-negative")
        for name in ("comfort", "security"):
            if getattr(self, name) > 1:
                raise ConfigError(f"{path}.{name}", "scores must lie in [0, 1]")
        if self.base_speed <= 0:
            raise ConfigError(path + ".base_speed", "must be > 0")


def _default_modes() -> dict[str, ModeParams]:
    return {
        "car": ModeParams(price=7650.0, cost_per_km=0.11, fare_per_trip=0.0, base_speed=30.0,
                          headway=0.0, comfort=0.85, security=0.75, safety_risk=0.6,
                          emissions_gpkm=192.0, congestion_sensitivity=1.0, pcu=1.0,
                          afford_ratio=0.5),
        "moto": ModeParams(price=960.0, cost_per_km=0.035, fare_per_trip=0.0, base_speed=35.0,
                           headway=0.0, comfort=0.45, security=0.55, safety_risk=8.0,
                           emissions_gpkm=103.0, congestion_sensitivity=0.5, pcu=0.5,
                           afford_ratio=0.15),
        "pub": ModeParams(price=0.0, cost_per_km=0.0, fare_per_trip=0.55, base_speed=20.0,
                          headway=45.0, comfort=0.20, security=0.16, safety_risk=0.3,
                          emissions_gpkm=80.0, congestion_sensitivity=1.0, pcu=0.0),
    }


@dataclass
class EnvironmentConfig:
    bpr_alpha: float = 0.15
    bpr_beta: float = 4.0
    road_capacity_per_agent: float = 0.55   # capacity C = this * n_agents (PCU)
    trips_per_year: float = 500.0
    t_min: float = 10.0
    t_max: float = 120.0
    opcost_income_share: float = 0.3        # phi
    accost_income_years: float = 1.0        # psi
    risk_max: float = 15.5
    gpkm_max: float = 250.0
    bus_occupancy: float = 40.0
    income_growth: float = 0.04             # per year
    income_volatility: float = 0.0          # sd of the yearly log-income shock
    tick_noise: float = 0.10                # lognormal sd of per-trip time
    satisfaction_noise: float = 0.125       # sd of the period's experienced-satisfaction shock

    def validate(self, path: str = "environment") -> None:
        if self.road_capacity_per_agent <= 0:
            raise ConfigError(path + ".road_capacity_per_agent", "capacity must be > 0")
        if self.bpr_alpha < 0 or self.bpr_beta < 0:
            raise ConfigError(path + ".bpr_alpha", "BPR parameters must be >= 0")
        if not 0 <= self.t_min < self.t_max:
            raise ConfigError(path + ".t_min", "need 0 <= t_min < t_max")
        for name in ("trips_per_year", "opcost_income_share", "accost_income_years",
                     "risk_max", "gpkm_max", "bus_occupancy"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{path}.{name}", "must be > 0")
        if self.income_growth <= -1:
            raise ConfigError(path + ".income_growth", "must be > -1")
        if self.income_volatility < 0:
            raise ConfigError(path + ".income_volatility", "must be >= 0")
        if self.satisfaction_noise < 0:
            raise ConfigError(path + ".satisfaction_noise", "must be >= 0")
        if self.tick_noise < 0:
            raise ConfigError(path + ".tick_noise", "must be >= 0")


@dataclass
class ConsumatConfig:
    experience_smoothing: float = 0.8
    initial_experience: float = 0.8

    def validate(self, path: str = "consumat") -> None:
        for name in ("experience_smoothing", "initial_experience"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{path}.{name}", "must lie in [0, 1]")


@dataclass
class SimulationConfig:
    name: str = "scenario"
    years: int = 10
    ticks_per_period: int = 30
    reps: int = 80
    master_seed: int = 2022
    start_year: int = 2022

    def validate(self, path: str = "simulation") -> None:
        if self.years < 1:
            raise ConfigError(path + ".years", "must be >= 1")
        if self.ticks_per_period < 1:
            raise ConfigError(path + ".ticks_per_period", "must be >= 1")
        if self.reps < 1:
            raise ConfigError(path + ".reps", "must be >= 1")
        if self.master_seed < 0:
            raise ConfigError(path + ".master_seed", "must be >= 0")


@dataclass
class PolicySpec:
    kind: str
    magnitude: float | None = None
    start_year: int = 0


@dataclass
class ScenarioConfig:
    population: DemographicConfig = field(default_factory=DemographicConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    modes: dict[str, ModeParams] = field(default_factory=_default_modes)
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    consumat: ConsumatConfig = field(default_factory=ConsumatConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    policies: list[PolicySpec] = field(default_factory=list)

    def validate(self) -> "ScenarioConfig":
        self.population.validate()
        self.network.validate()
        if self.network.m >= self.population.n_agents:
            raise ConfigError("network.m", "must be smaller than population.n_agents")
        for key in MODE_KEYS:
            if key not in self.modes:
                raise ConfigError(f"modes.{key}", "missing")
            self.modes[key].validate(f"modes.{key}")
        if self.modes["pub"].price != 0:
            raise ConfigError("modes.pub.price", "public transit has no acquisition price")
        self.environment.validate()
        self.consumat.validate()
        self.simulation.validate()
        from .policy import intervention_from_spec
        for i, p in enumerate(self.policies):
            intervention_from_spec(p, f"policies[{i}]")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        for p in d["policies"]:
            if p["magnitude"] is None:
                del p["magnitude"]
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **sections) -> "ScenarioConfig":
        return dataclasses.replace(self, **sections)

    def to_toml(self) -> str:
        import tomli_w
        return tomli_w.dumps(self.to_dict())


def _check_probs(row, n: int, path: str) -> None:
    if len(row) != n:
        raise ConfigError(path, f"need {n} proportions")
    if any(p < 0 for p in row):
        raise ConfigError(path, "proportions must be >= 0")
    if abs(sum(row) - 1.0) > 1e-9:
        raise ConfigError(path, f"proportions sum to {sum(row)!r}, not 1")


# ---------------------------------------------------------------------------
# dict -> dataclass conversion

def _convert(tp, value, path: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(path, f"expected a table, got {type(value).__name__}")
        return _build(tp, value, path)
    if origin is typing.Union or origin is types.UnionType:
        if value is None:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(inner[0], value, path)
    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(path, "expected a table")
        return {k: _convert(args[1], v, f"{path}.{k}") for k, v in value.items()}
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(path, "expected a list")
        return [_convert(args[0], v, f"{path}[{i}]") for i, v in enumerate(value)]
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, "expected a list")
        return tuple(_convert(args[0], v, f"{path}[{i}]") for i, v in enumerate(value))
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    return value


def _build(cls, data: dict, path: str):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            sub = f"{path}.{f.name}" if path else f.name
            value = data[f.name]
            if f.name == "modes" and cls is ScenarioConfig:
                value = _merge_modes(value, sub)
            elif isinstance(value, dict):
                value = _merge_defaults(_field_default(f), value)
            kwargs[f.name] = _convert(hints[f.name], value, sub)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(path or "<root>", str(exc)) from None


def _field_default(f: dataclasses.Field):
    if f.default is not dataclasses.MISSING:
        return f.default
    if f.default_factory is not dataclasses.MISSING:
        return f.default_factory()
    return None


def _plain(v):
    if dataclasses.is_dataclass(v):
        return dataclasses.asdict(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _merge_defaults(default, value: dict) -> dict:
    # a partial table overrides its defaults key by key, recursively
    if dataclasses.is_dataclass(default):
        base = {g.name: getattr(default, g.name) for g in dataclasses.fields(default)}
    elif isinstance(default, dict):
        base = dict(default)
    else:
        return value
    out = {}
    for k, v in base.items():
        if k not in value:
            out[k] = _plain(v)
    for k, v in value.items():
        out[k] = _merge_defaults(base[k], v) if isinstance(v, dict) and k in base else v
    return out


def _merge_modes(value, path: str) -> dict:
    # partial mode tables override defaults field by field
    if not isinstance(value, dict):
        raise ConfigError(path, "expected a table")
    merged = {k: dataclasses.asdict(v) for k, v in _default_modes().items()}
    for key, sub in value.items():
        if key not in merged:
            raise ConfigError(f"{path}.{key}", "unknown mode")
        if not isinstance(sub, dict):
            raise ConfigError(f"{path}.{key}", "expected a table")
        merged[key].update(sub)
    return merged


def config_from_dict(data: dict) -> ScenarioConfig:
    return _build(ScenarioConfig, data, "").validate()


def load_scenario(source: str | Path) -> ScenarioConfig:
    """Load a scenario from a TOML file or a bundled scenario name (``cali-default``)."""
    path = Path(source)
    if not path.exists():
        bundled = Path(__file__).parent / "scenarios" / f"{source}.toml"
        if not bundled.exists():
            raise ConfigError(str(source), "no such scenario file or bundled scenario")
        path = bundled
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"TOML syntax error: {exc}") from None
    return config_from_dict(data)

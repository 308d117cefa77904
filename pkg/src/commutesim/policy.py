"""Public-transit interventions and their combinations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .modes import ModeState
from .types import ConfigError, Mode


class PolicyKind(str, Enum):
    FARE_FREE = "fare_free"
    FREQUENCY_BOOST = "frequency_boost"
    SECURITY_IMPROVEMENT = "security_improvement"

    @property
    def short(self) -> str:
        return {"fare_free": "fare", "frequency_boost": "frequency",
                "security_improvement": "security"}[self.value]

    @classmethod
    def parse(cls, value) -> "PolicyKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"fare": cls.FARE_FREE, "farefree": cls.FARE_FREE, "free": cls.FARE_FREE,
                   "frequency": cls.FREQUENCY_BOOST, "frequencyboost": cls.FREQUENCY_BOOST,
                   "freq": cls.FREQUENCY_BOOST, "security": cls.SECURITY_IMPROVEMENT,
                   "securityimprovement": cls.SECURITY_IMPROVEMENT}
        for kind in cls:
            aliases[kind.value] = kind
        if key not in aliases:
            raise ValueError(f"unknown policy kind {value!r}")
        return aliases[key]


DEFAULT_MAGNITUDE = {
    PolicyKind.FARE_FREE: 0.0,              # fare multiplier
    PolicyKind.FREQUENCY_BOOST: 0.5,        # headway multiplier (doubled frequency)
    PolicyKind.SECURITY_IMPROVEMENT: 0.2,   # additive security-score delta
}


@dataclass(frozen=True)
class PolicyIntervention:
    kind: PolicyKind
    magnitude: float | None = None
    start_year: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind.parse(self.kind))
        if self.magnitude is None:
            object.__setattr__(self, "magnitude", DEFAULT_MAGNITUDE[self.kind])
        _check_magnitude(self.kind, self.magnitude, "magnitude")
        if self.start_year < 0:
            raise ConfigError("start_year", "must be >= 0")

    def active(self, year: int) -> bool:
        return year >= self.start_year


def _check_magnitude(kind: PolicyKind, magnitude: float, path: str) -> None:
    ok = {
        PolicyKind.FARE_FREE: 0.0 <= magnitude <= 1.0,
        PolicyKind.FREQUENCY_BOOST: 0.0 < magnitude <= 1.0,
        PolicyKind.SECURITY_IMPROVEMENT: 0.0 <= magnitude <= 1.0,
    }[kind]
    if not ok:
        raise ConfigError(path, f"magnitude {magnitude} outside the legal range for {kind.value}")


def intervention_from_spec(spec, path: str = "policies") -> PolicyIntervention:
    try:
        kind = PolicyKind.parse(spec.kind)
    except ValueError as exc:
        raise ConfigError(path + ".kind", str(exc)) from None
    try:
        return PolicyIntervention(kind, spec.magnitude, spec.start_year)
    except ConfigError as exc:
        raise ConfigError(f"{path}.{exc.path}", str(exc).split(": ", 1)[1]) from None


def apply_policies(state: ModeState, active) -> ModeState:
    """Return the public-transit profile with every intervention in ``active`` applied.

    Each kind writes a different field, so the result does not depend on order.
    Applying the same kind twice applies it once.
    """
    pub = int(Mode.PUBLIC)
    by_kind = {}
    for p in active:
        by_kind[p.kind] = p
    out = state
    if PolicyKind.FARE_FREE in by_kind:
        k = by_kind[PolicyKind.FARE_FREE].magnitude
        out = out.with_value("fare_per_trip", Mode.PUBLIC, state.fare_per_trip[pub] * k)
        out = out.with_value("cost_per_km", Mode.PUBLIC, state.cost_per_km[pub] * k)
    if PolicyKind.FREQUENCY_BOOST in by_kind:
        k = by_kind[PolicyKind.FREQUENCY_BOOST].magnitude
        out = out.with_value("headway", Mode.PUBLIC, state.headway[pub] * k)
    if PolicyKind.SECURITY_IMPROVEMENT in by_kind:
        d = by_kind[PolicyKind.SECURITY_IMPROVEMENT].magnitude
        out = out.with_value("security", Mode.PUBLIC, float(np.clip(state.security[pub] + d, 0, 1)))
    return out


def scenario_name(interventions) -> str:
    if not interventions:
        return "base"
    return "+".join(p.kind.short for p in sorted(interventions, key=lambda p: list(PolicyKind).index(p.kind)))


def combine(interventions, subsets="all") -> dict[str, list[PolicyIntervention]]:
    """Enumerate policy scenarios sharing one base configuration.

    ``subsets`` is ``"all"`` (base, singletons, pairs, triple), ``"singles"``,
    ``"pairs"``, ``"triple"``, or an explicit list of kind groups such as
    ``[("fare", "security")]``. An empty group is the base case.
    """
    pool = {p.kind: p for p in (i if isinstance(i, PolicyIntervention) else PolicyIntervention(i)
                                for i in interventions)}
    kinds = [k for k in PolicyKind if k in pool]
    if isinstance(subsets, str):
        sizes = {"all": range(0, len(kinds) + 1), "singles": [1], "pairs": [2],
                 "triple": [3], "base": [0]}[subsets]
        groups = [c for r in sizes for c in itertools.combinations(kinds, r)]
    else:
        groups = [tuple(PolicyKind.parse(k) for k in g) for g in subsets]
    out: dict[str, list[PolicyIntervention]] = {}
    for g in groups:
        missing = [k for k in g if k not in pool]
        if missing:
            pool.update({k: PolicyIntervention(k) for k in missing})
        chosen = [pool[k] for k in dict.fromkeys(g)]
        out[scenario_name(chosen)] = chosen
    return out


def parse_set_spec(spec: str) -> list[tuple[str, ...]] | str:
    """``"all"``/``"singles"``/``"pairs"``/``"triple"`` or e.g. ``"base,fare,fare+security"``."""
    spec = spec.strip()
    if spec in ("all", "singles", "pairs", "triple"):
        return spec
    groups = []
    for item in spec.split(","):
        item = item.strip()
        groups.append(() if item in ("", "base", "none") else tuple(x.strip() for x in item.split("+")))
    return groups

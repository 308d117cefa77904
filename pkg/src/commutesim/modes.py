"""Per-mode attribute profile as seen by the environment and the policy engine."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .types import MODE_KEYS, Mode

FIELDS = ("price", "cost_per_km", "fare_per_trip", "base_speed", "headway", "comfort",
          "security", "safety_risk", "emissions_gpkm", "congestion_sensitivity", "pcu",
          "afford_ratio")


@dataclass(frozen=True)
class ModeState:
    """Each field is a length-3 array indexed by :class:`Mode`."""

    price: np.ndarray
    cost_per_km: np.ndarray
    fare_per_trip: np.ndarray
    base_speed: np.ndarray
    headway: np.ndarray
    comfort: np.ndarray
    security: np.ndarray
    safety_risk: np.ndarray
    emissions_gpkm: np.ndarray
    congestion_sensitivity: np.ndarray
    pcu: np.ndarray
    afford_ratio: np.ndarray

    @classmethod
    def from_config(cls, modes: dict) -> "ModeState":
        return cls(**{f: np.array([float(getattr(modes[k], f)) for k in MODE_KEYS])
                      for f in FIELDS})

    def with_value(self, field: str, mode: Mode, value: float) -> "ModeState":
        arr = getattr(self, field).copy()
        arr[int(mode)] = value
        return dataclasses.replace(self, **{field: arr})

    def equals(self, other: "ModeState") -> bool:
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in FIELDS)

    def validate(self) -> None:
        for f in FIELDS:
            if np.any(getattr(self, f) < 0):
                raise ValueError(f"{f} must be non-negative")
        for f in ("comfort", "security"):
            if np.any(getattr(self, f) > 1):
                raise ValueError(f"{f} must lie in [0, 1]")

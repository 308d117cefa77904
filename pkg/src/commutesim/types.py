"""Enumerations shared across the simulator.

Integer values double as array indices, so the order of members is part of
the data layout (weight vectors, share vectors, strategy counts).
"""

from __future__ import annotations

from enum import IntEnum


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class DataError(ValueError):
    """Input data violates a precondition (non-monotone series, bad Likert value...)."""


class SES(IntEnum):
    LOW = 0
    MID = 1
    HIGH = 2

    @classmethod
    def parse(cls, value) -> "SES":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"low": cls.LOW, "mid": cls.MID, "middle": cls.MID, "high": cls.HIGH,
                   "0": cls.LOW, "1": cls.MID, "2": cls.HIGH}
        if key not in aliases:
            raise ValueError(f"unknown socioeconomic group {value!r}")
        return aliases[key]


class Attribute(IntEnum):
    ACQUISITION_COST = 0
    OPERATING_COST = 1
    COMFORT = 2
    ROAD_SAFETY = 3
    PERSONAL_SECURITY = 4
    TRAVEL_TIME = 5
    EMISSIONS = 6


N_ATTRIBUTES = len(Attribute)

# short names used in config files and CSV headers
ATTRIBUTE_KEYS = ("accost", "opcost", "comfort", "safety", "security", "time", "emis")


class Mode(IntEnum):
    CAR = 0
    MOTORCYCLE = 1
    PUBLIC = 2

    @property
    def key(self) -> str:
        return MODE_KEYS[self]

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"car": cls.CAR, "moto": cls.MOTORCYCLE, "mot": cls.MOTORCYCLE,
                   "motorcycle": cls.MOTORCYCLE, "pub": cls.PUBLIC, "public": cls.PUBLIC,
                   "publictransit": cls.PUBLIC, "public_transit": cls.PUBLIC, "bus": cls.PUBLIC}
        if key not in aliases:
            raise ValueError(f"unknown mode {value!r}")
        return aliases[key]


N_MODES = len(Mode)
MODE_KEYS = ("car", "moto", "pub")


class Strategy(IntEnum):
    REPEAT = 0
    IMITATE = 1
    INQUIRE = 2
    DELIBERATE = 3


N_STRATEGIES = len(Strategy)


class Sex(IntEnum):
    F = 0
    M = 1

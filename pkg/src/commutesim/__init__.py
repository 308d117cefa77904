"""Agent-based commuter mode-choice simulator with a CONSUMAT decision engine."""

__version__ = "0.1.0"

from .config import ScenarioConfig, config_from_dict, load_scenario  # noqa: E402
from .environment import simulate  # noqa: E402
from .types import ConfigError, DataError, Mode, SES, Strategy  # noqa: E402

__all__ = ["ScenarioConfig", "config_from_dict", "load_scenario", "simulate",
           "ConfigError", "DataError", "Mode", "SES", "Strategy", "__version__"]

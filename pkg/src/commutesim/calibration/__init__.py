"""Survey statistics, discrete-choice estimation and diffusion fitting."""

from .bass import BassParams, bass_curve, bass_fit, compare_trajectories
from .inference import chi_square_independence, cochran_sample_size, kruskal_wallis, mann_whitney_u
from .mnl import MnlModel, mnl_fit, wald_test
from .survey import normalize_weights, read_survey, stats_report

__all__ = ["BassParams", "bass_curve", "bass_fit", "compare_trajectories",
           "chi_square_independence", "cochran_sample_size", "kruskal_wallis", "mann_whitney_u",
           "MnlModel", "mnl_fit", "wald_test", "normalize_weights", "read_survey", "stats_report"]

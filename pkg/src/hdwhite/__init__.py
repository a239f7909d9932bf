"""High-dimensional white-noise testing with maximum cross correlations."""

from .baselines import lm_test, portmanteau, portmanteau_test, tiao_box_test
from .diagnostics import FittedModel, fit_var, test_residuals
from .errors import (
    DegenerateComponentError,
    InfeasibleMethodError,
    PanelParseError,
    SamplerError,
    WhiteNoiseError,
)
from .maxcorr import TestResult, critical_value, detection_threshold, run_maxcorr_test, tn_statistic
from .moments import AutocovSet, sample_autocorr_set, sample_autocov
from .runner import run_test
from .tsdata import TimeSeriesPanel, center, load_csv

__version__ = "0.1.0"

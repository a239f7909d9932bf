"""Run any of the seven white-noise tests by name."""

from __future__ import annotations

from . import baselines
from .maxcorr import DEFAULT_ALPHA, DEFAULT_B, DEFAULT_K, METHODS, TestResult, run_maxcorr_test
from .tsdata import TimeSeriesPanel

# command-line spellings
ALIASES = {"tb": "tiao_box", "tn": "maxcorr", "tn_star": "maxcorr_tspca"}


def canonical_method(name: str) -> str:
    name = ALIASES.get(name.lower(), name.lower())
    if name not in METHODS:
        raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    return name


def run_test(panel: TimeSeriesPanel, method: str = "maxcorr", K: int = DEFAULT_K,
             alpha: float = DEFAULT_ALPHA, B: int = DEFAULT_B, seed: int = 0, *,
             center: bool = True, **maxcorr_options) -> TestResult:
    """Dispatch to the named test. ``maxcorr_options`` only reach the max-correlation tests."""
    method = canonical_method(method)
    if method in ("maxcorr", "maxcorr_tspca"):
        return run_maxcorr_test(panel, K, alpha, B, seed, method == "maxcorr_tspca",
                                center=center, **maxcorr_options)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if method in baselines.PORTMANTEAU_VARIANTS:
        return baselines.portmanteau_test(panel, method, K, alpha, center=center)
    if method == "lm":
        return baselines.lm_test(panel, K, alpha, center=center)
    return baselines.tiao_box_test(panel, alpha, center=center)

"""Maximum absolute auto/cross-correlation test for vector white noise."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import lrcov, tspca
from .moments import AutocovSet, sample_autocorr_set
from .tsdata import TimeSeriesPanel, center as center_panel

METHODS = ("maxcorr", "maxcorr_tspca", "q1", "q2", "q3", "lm", "tiao_box")
DEFAULT_K = 2
DEFAULT_ALPHA = 0.05
DEFAULT_B = 2000


@dataclass(frozen=True)
class TestResult:
    """Outcome of one white-noise test.

    ``reject`` is always ``statistic > critical_value``. For the Monte-Carlo
    methods ``p_value = #{b : |G_b| >= statistic} / B``, so ``reject`` holds
    exactly when ``p_value < floor(B * alpha) / B``. ``B`` is 0 and
    ``bandwidth`` is NaN for the analytic baselines.
    """

    __test__ = False  # keep pytest from collecting this class

    method: str
    statistic: float
    critical_value: float
    p_value: float
    alpha: float
    K: int
    B: int
    reject: bool
    seed: int
    n: int
    p: int
    bandwidth: float = math.nan
    residual: bool = False

    def to_record(self) -> dict:
        return asdict(self)

    def to_kv(self) -> str:
        return "\n".join(f"{k}={_fmt(v)}" for k, v in self.to_record().items()) + "\n"

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(f.name for f in fields(cls) if f.name != "__test__")

    def to_csv_row(self) -> str:
        return ",".join(_fmt(v) for v in self.to_record().values())


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def tn_statistic(autocov: AutocovSet) -> float:
    """max over lags 1..K and all pairs of sqrt(n) * |rho_ij(k)|."""
    if autocov.K < 1:
        raise ValueError("K must be >= 1")
    return math.sqrt(autocov.n) * float(np.abs(autocov.gamma[1:]).max())


def tn_argmax(autocov: AutocovSet) -> tuple[int, int, int]:
    """(k, i, j) of the largest |rho_ij(k)|, k being 1-based."""
    k, i, j = np.unravel_index(np.argmax(np.abs(autocov.gamma[1:])), autocov.gamma[1:].shape)
    return int(k) + 1, int(i), int(j)


def critical_value(max_abs_draws, alpha: float) -> float:
    """The floor(B * alpha)-th largest draw."""
    draws = np.asarray(max_abs_draws, dtype=float)
    rank = math.floor(len(draws) * alpha)
    if rank < 1:
        raise ValueError(f"alpha={alpha} is too small for B={len(draws)} draws")
    if rank > len(draws):
        raise ValueError("alpha must be < 1")
    return float(np.sort(draws)[::-1][rank - 1])


def run_maxcorr_test(panel: TimeSeriesPanel, K: int = DEFAULT_K, alpha: float = DEFAULT_ALPHA,
                     B: int = DEFAULT_B, seed: int = 0, pretransform: bool = False, *,
                     center: bool = True, bandwidth: float | None = None,
                     k0: int = tspca.DEFAULT_K0, transform: str = "whiten",
                     storage: str = "auto",
                     block_rows: int = lrcov.DEFAULT_BLOCK_ROWS,
                     workers: int = 1) -> TestResult:
    """Max-correlation white-noise test with a Gaussian multiplier critical value.

    Parameters
    ----------
    panel : TimeSeriesPanel
    K : int
        Largest lag entering the statistic.
    alpha : float
        Significance level.
    B : int
        Number of multiplier draws; must be at least ceil(1 / alpha).
    seed : int
        Seed of the multiplier stream.
    pretransform : bool
        Apply a constant linear pre-transform (see :mod:`hdwhite.tspca`) first.
    center : bool
        Subtract row means first. Turn off only for data known to be mean zero.
    bandwidth : float, optional
        Fixed kernel bandwidth; Andrews' plug-in when omitted.
    k0, transform
        Passed to :func:`hdwhite.tspca.fit_transform` when ``pretransform``.
    """
    _check_level(alpha, B)
    x = center_panel(panel) if center else panel
    if pretransform:
        x = tspca.apply(tspca.fit_transform(x, k0, transform), x)
    autocov = sample_autocorr_set(x, K)
    stat = tn_statistic(autocov)
    fp = lrcov.FPanel(x, K, storage=storage, block_rows=block_rows)
    bw = lrcov.andrews_bandwidth(fp) if bandwidth is None else float(bandwidth)
    sampler = lrcov.build_sampler(autocov, fp, bw, seed)
    draws = lrcov.draw_max_abs(sampler, B, workers=workers)
    cv = critical_value(draws, alpha)
    return TestResult(
        method="maxcorr_tspca" if pretransform else "maxcorr",
        statistic=stat, critical_value=cv,
        p_value=float(np.count_nonzero(draws >= stat)) / B,
        alpha=alpha, K=K, B=B, reject=stat > cv, seed=int(seed),
        n=panel.n, p=panel.p, bandwidth=bw,
    )


def _check_level(alpha, B):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if B < math.ceil(1.0 / alpha):
        raise ValueError(f"B={B} draws is below ceil(1/alpha)={math.ceil(1.0 / alpha)}")


def detection_threshold(n: int, p: int, K: int, alpha: float, varrho: float = 1.0) -> float:
    """Correlation magnitude above which the test's power tends to one.

    Returns sqrt(varrho / n) * (sqrt(2 log(p^2 K)) + sqrt(2 log(1 / alpha))),
    where ``varrho`` is the largest variance of the limiting Gaussian
    coordinates (close to 1 for iid data; see
    :func:`hdwhite.lrcov.estimate_varrho`).
    """
    if varrho <= 0:
        raise ValueError("varrho must be positive")
    lam = math.sqrt(2.0 * math.log(p * p * K)) + math.sqrt(2.0 * math.log(1.0 / alpha))
    return math.sqrt(varrho) * lam / math.sqrt(n)

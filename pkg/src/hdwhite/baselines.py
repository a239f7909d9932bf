"""Classical white-noise tests: multivariate portmanteau (Q1, Q2, Q3), LM and Tiao-Box.

All of them are referred to chi-square distributions, replaced by a normal
approximation (stat - df) / sqrt(2 df) once the dimension exceeds 10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InfeasibleMethodError
from .maxcorr import DEFAULT_ALPHA, DEFAULT_K, TestResult
from .moments import AutocovSet, sample_autocorr_set
from .tsdata import TimeSeriesPanel, center as center_panel

NORMAL_ABOVE_P = 10
PORTMANTEAU_VARIANTS = ("q1", "q2", "q3")


def chi2_sf(x, df):
    """Upper tail of chi-square(df) through the regularized incomplete gamma function."""
    return special.gammaincc(df / 2.0, np.maximum(x, 0.0) / 2.0)


def chi2_isf(alpha, df):
    return 2.0 * special.gammainccinv(df / 2.0, alpha)


def normal_sf(z):
    return 0.5 * special.erfc(z / math.sqrt(2.0))


def normal_isf(alpha):
    return -special.ndtri(alpha)


@dataclass(frozen=True)
class ChiSquareRef:
    """Reference distribution for a statistic with ``df`` degrees of freedom."""

    df: int
    use_normal: bool = False

    @classmethod
    def for_dimension(cls, df: int, p: int, normal_above: int | None = NORMAL_ABOVE_P):
        """Use the normal approximation when ``p > normal_above`` (never if None)."""
        return cls(df=df, use_normal=normal_above is not None and p > normal_above)

    def sf(self, stat: float) -> float:
        if self.use_normal:
            return float(normal_sf((stat - self.df) / math.sqrt(2.0 * self.df)))
        return float(chi2_sf(stat, self.df))

    def critical_value(self, alpha: float) -> float:
        if self.use_normal:
            return self.df + float(normal_isf(alpha)) * math.sqrt(2.0 * self.df)
        return float(chi2_isf(alpha, self.df))


def portmanteau_traces(autocov: AutocovSet, standardized: bool = True) -> np.ndarray:
    """Per-lag traces entering the portmanteau statistics, k = 1..K.

    With ``standardized`` (the default) the trace is
    tr{G(k)^T G(0)^{-1} G(k) G(0)^{-1}}, which is invariant to linear
    recombination of the components and chi-square calibrated for
    contemporaneously correlated series. ``standardized=False`` gives the
    plain sum of squared autocorrelations tr{G(k)^T G(k)}; the two agree
    when p = 1 or G(0) = I.
    """
    g = autocov.gamma[1:]
    if not standardized:
        return np.einsum("kij,kij->k", g, g)
    g0_inv = np.linalg.inv(autocov.gamma[0])
    left = g0_inv @ g  # G(0)^{-1} G(k)
    right = g @ g0_inv  # G(k) G(0)^{-1}
    # tr(G^T A G A) = sum_ij (A G)_ij (G A)_ij for symmetric A
    return np.einsum("kij,kij->k", left, right)


def portmanteau(autocov: AutocovSet, variant: str, n: int | None = None,
                standardized: bool = True) -> float:
    """Q1 (Box-Pierce), Q2 (Hosking) or Q3 (Li-McLeod) from the sample autocorrelations."""
    n = autocov.n if n is None else n
    K, p = autocov.K, autocov.p
    if K < 1:
        raise ValueError("K must be >= 1")
    if variant not in PORTMANTEAU_VARIANTS:
        raise ValueError(f"unknown portmanteau variant {variant!r}")
    tr = portmanteau_traces(autocov, standardized)
    if variant == "q2":
        lags = np.arange(1, K + 1)
        return float(n * n * np.sum(tr / (n - lags)))
    q1 = float(n * tr.sum())
    if variant == "q3":
        return q1 + p * p * K * (K + 1) / (2.0 * n)
    return q1


def _result(method, stat, ref, alpha, K, panel):
    cv = ref.critical_value(alpha)
    return TestResult(
        method=method, statistic=stat, critical_value=cv, p_value=ref.sf(stat),
        alpha=alpha, K=K, B=0, reject=stat > cv, seed=0, n=panel.n, p=panel.p,
    )


def portmanteau_test(panel: TimeSeriesPanel, variant: str = "q1", K: int = DEFAULT_K,
                     alpha: float = DEFAULT_ALPHA, *, center: bool = True,
                     normal_above: int | None = NORMAL_ABOVE_P,
                     standardized: bool = True) -> TestResult:
    x = center_panel(panel) if center else panel
    stat = portmanteau(sample_autocorr_set(x, K), variant, standardized=standardized)
    ref = ChiSquareRef.for_dimension(panel.p**2 * K, panel.p, normal_above)
    return _result(variant, stat, ref, alpha, K, panel)


def _ls_residuals(y, z):
    coef, *_ = np.linalg.lstsq(z, y, rcond=None)
    return y - z @ coef


def lm_statistic(panel: TimeSeriesPanel, K: int) -> float:
    """(n - K) * (p - tr(S_R^{-1} S_U)) from the regression of x_t on its K lags.

    S_R is the residual covariance of the intercept-only fit and S_U that of
    the fit with an intercept and x_{t-1}, ..., x_{t-K}, both over
    t = K + 1, ..., n.
    """
    p, n = panel.p, panel.n
    if p * K >= n - K:
        raise InfeasibleMethodError(
            f"LM test needs pK < n - K; got p={p}, K={K}, n={n}"
        )
    x = panel.values
    m = n - K
    y = x[:, K:].T
    z = np.hstack([np.ones((m, 1))] + [x[:, K - k:n - k].T for k in range(1, K + 1)])
    r = y - y.mean(axis=0)
    u = _ls_residuals(y, z)
    s_r = r.T @ r / m
    s_u = u.T @ u / m
    try:
        tr = np.trace(np.linalg.solve(s_r, s_u))
    except np.linalg.LinAlgError:
        raise InfeasibleMethodError("LM test: singular residual covariance") from None
    return float(m * (p - tr))


def lm_test(panel: TimeSeriesPanel, K: int = DEFAULT_K, alpha: float = DEFAULT_ALPHA, *,
            center: bool = True, normal_above: int | None = NORMAL_ABOVE_P) -> TestResult:
    x = center_panel(panel) if center else panel
    stat = lm_statistic(x, K)
    ref = ChiSquareRef.for_dimension(panel.p**2 * K, panel.p, normal_above)
    return _result("lm", stat, ref, alpha, K, panel)


def tiao_box_statistic(panel: TimeSeriesPanel) -> float:
    """-(n - p - 3/2) * log(det S_1 / det S_0) for VAR(0) against VAR(1).

    Both models carry an intercept and are fitted on t = 2..n so that they
    are nested and the statistic is nonnegative.
    """
    p, n = panel.p, panel.n
    if p >= n - 1:
        raise InfeasibleMethodError(f"Tiao-Box test needs p < n - 1; got p={p}, n={n}")
    x = panel.values
    y = x[:, 1:].T
    z = np.hstack([np.ones((n - 1, 1)), x[:, :-1].T])
    r0 = y - y.mean(axis=0)
    r1 = _ls_residuals(y, z)
    # residual degrees of freedom n - 2 must leave a full-rank p x p covariance
    if np.linalg.matrix_rank(r1) < p:
        raise InfeasibleMethodError("Tiao-Box test: singular residual covariance")
    sign0, logdet0 = np.linalg.slogdet(r0.T @ r0 / (n - 1))
    sign1, logdet1 = np.linalg.slogdet(r1.T @ r1 / (n - 1))
    if sign0 <= 0 or sign1 <= 0:
        raise InfeasibleMethodError("Tiao-Box test: singular residual covariance")
    return float(-(n - p - 1.5) * (logdet1 - logdet0))


def tiao_box_test(panel: TimeSeriesPanel, alpha: float = DEFAULT_ALPHA, *,
                  center: bool = True, normal_above: int | None = NORMAL_ABOVE_P) -> TestResult:
    """Likelihood-ratio test of VAR(0) against VAR(1); it has no lag parameter (K is reported as 0)."""
    x = center_panel(panel) if center else panel
    stat = tiao_box_statistic(x)
    ref = ChiSquareRef.for_dimension(panel.p**2, panel.p, normal_above)
    return _result("tiao_box", stat, ref, alpha, 0, panel)

"""Residual-based model checking: fit a model, then test its residuals for whiteness."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import WhiteNoiseError
from .maxcorr import DEFAULT_ALPHA, DEFAULT_B, DEFAULT_K, TestResult
from .runner import run_test
from .tsdata import TimeSeriesPanel, center


@dataclass(frozen=True, eq=False)
class FittedModel:
    """A fitted VAR(r) y_t = c + sum_j A_j y_{t-j} + e_t and its residual panel.

    ``coefs`` has shape (r, p, p). Models built by :meth:`from_residuals`
    carry no coefficients and wrap residuals computed elsewhere.
    """

    order: int
    coefs: np.ndarray
    intercept: np.ndarray
    residuals: TimeSeriesPanel

    @classmethod
    def from_residuals(cls, residuals: TimeSeriesPanel) -> FittedModel:
        """Wrap residuals of any fitted model y_t - g(u_t; theta_hat)."""
        p = residuals.p
        return cls(order=0, coefs=np.zeros((0, p, p)), intercept=np.zeros(p),
                   residuals=residuals)


def fit_var(panel: TimeSeriesPanel, r: int) -> FittedModel:
    """Least-squares VAR(r) with intercept."""
    p, n = panel.p, panel.n
    if r < 0:
        raise ValueError("order must be >= 0")
    if p * (r + 1) >= n:
        raise ValueError(f"VAR({r}) needs p(r + 1) < n; got p={p}, n={n}")
    if r == 0:
        res = center(panel)
        return FittedModel(0, np.zeros((0, p, p)), panel.values.mean(axis=1), res)
    x = panel.values
    m = n - r
    y = x[:, r:].T
    z = np.hstack([np.ones((m, 1))] + [x[:, r - j:n - j].T for j in range(1, r + 1)])
    if np.linalg.matrix_rank(z) < z.shape[1]:
        raise WhiteNoiseError(f"VAR({r}) design matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(z, y, rcond=None)
    intercept = beta[0].copy()
    coefs = np.stack([beta[1 + j * p:1 + (j + 1) * p].T for j in range(r)])
    resid = (y - z @ beta).T
    # the intercept makes residual rows mean zero up to rounding
    resid = resid - resid.mean(axis=1, keepdims=True)
    return FittedModel(r, coefs, intercept, TimeSeriesPanel(resid, centered=True))


def var_residuals(panel: TimeSeriesPanel, model: FittedModel) -> np.ndarray:
    """y_t - c - sum_j A_j y_{t-j} recomputed from the coefficients."""
    x = panel.values
    r, n = model.order, panel.n
    out = x[:, r:] - model.intercept[:, None]
    for j in range(1, r + 1):
        out = out - model.coefs[j - 1] @ x[:, r - j:n - j]
    return out


def test_residuals(model: FittedModel, method: str = "maxcorr", K: int = DEFAULT_K,
                   alpha: float = DEFAULT_ALPHA, B: int = DEFAULT_B, seed: int = 0,
                   **options) -> TestResult:
    """Apply a white-noise test to the residuals; the result is flagged ``residual=True``."""
    result = run_test(model.residuals, method, K, alpha, B, seed, **options)
    return dataclasses.replace(result, residual=True)


test_residuals.__test__ = False

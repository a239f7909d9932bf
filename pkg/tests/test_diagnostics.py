import dataclasses

import numpy as np
import pytest

from hdwhite import simlab
from hdwhite.diagnostics import FittedModel, fit_var, test_residuals, var_residuals
from hdwhite.errors import WhiteNoiseError
from hdwhite.maxcorr import run_maxcorr_test
from hdwhite.runner import run_test
from hdwhite.tsdata import TimeSeriesPanel, center


def var1(a, n, noise, seed):
    rng = np.random.default_rng(seed)
    p = a.shape[0]
    x = np.zeros((p, n + 100))
    for t in range(1, n + 100):
        x[:, t] = a @ x[:, t - 1] + noise * rng.standard_normal(p)
    return TimeSeriesPanel(x[:, 100:] + np.array([1.0, -2.0, 0.5])[:, None])


A = np.array([[0.5, 0.1, 0.0], [-0.2, 0.3, 0.0], [0.0, 0.25, -0.4]])


def test_order_zero_is_centering():
    x = simlab.gen_model1(3, 50, seed=1)
    np.testing.assert_array_equal(fit_var(x, 0).residuals.values, center(x).values)


def test_recovers_coefficients():
    fit = fit_var(var1(A, 5000, 0.01, 2), 1)
    np.testing.assert_allclose(fit.coefs[0], A, atol=0.03)
    assert fit.residuals.centered and fit.residuals.n == 4999


@pytest.mark.parametrize("r", [1, 2, 3])
def test_residuals_match_coefficients(r):
    x = var1(A, 200, 1.0, 3)
    fit = fit_var(x, r)
    direct = var_residuals(x, fit)
    direct = direct - direct.mean(axis=1, keepdims=True)
    np.testing.assert_allclose(fit.residuals.values, direct, rtol=1e-10, atol=1e-10 * np.abs(direct).max())


def test_feasibility():
    x = simlab.gen_model1(5, 12, seed=0)
    with pytest.raises(ValueError):
        fit_var(x, 2)
    with pytest.raises(ValueError):
        fit_var(x, -1)


def test_rank_deficient_design():
    x = np.random.default_rng(0).standard_normal((1, 40))
    with pytest.raises(WhiteNoiseError):
        fit_var(TimeSeriesPanel(np.vstack([x, x])), 1)


def test_order_zero_matches_plain_test():
    x = simlab.gen_model4(3, 120, seed=5)
    res = test_residuals(fit_var(x, 0), K=2, B=300, seed=8)
    assert res.residual
    assert dataclasses.replace(res, residual=False) == run_maxcorr_test(center(x), K=2, B=300, seed=8)


@pytest.mark.parametrize("method", ["maxcorr", "q2", "lm", "tb"])
def test_identity_model_is_raw_test(method):
    e = center(simlab.gen_model1(3, 100, seed=6))
    res = test_residuals(FittedModel.from_residuals(e), method, K=2, B=300, seed=1)
    assert dataclasses.replace(res, residual=False) == run_test(e, method, 2, 0.05, 300, 1)

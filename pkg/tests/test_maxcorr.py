import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from hdwhite import maxcorr
from hdwhite.maxcorr import TestResult, critical_value, detection_threshold, run_maxcorr_test
from hdwhite.moments import sample_autocorr_set
from hdwhite.tsdata import TimeSeriesPanel, center


def iid(seed, p=3, n=120):
    return TimeSeriesPanel(np.random.default_rng(seed).standard_normal((p, n)))


def test_statistic_alternating():
    acs = sample_autocorr_set(TimeSeriesPanel([[1.0, -1.0, 1.0, -1.0]]), 1)
    assert maxcorr.tn_statistic(acs) == pytest.approx(1.5, rel=1e-15)
    assert maxcorr.tn_argmax(acs) == (1, 0, 0)


def test_critical_value_examples():
    assert critical_value([1, 2, 3, 4], 0.5) == 3
    draws = np.random.default_rng(0).permutation(np.arange(1.0, 2001.0))
    assert critical_value(draws, 0.05) == 1901.0  # 100th largest
    with pytest.raises(ValueError):
        critical_value([1.0, 2.0], 0.1)


@settings(max_examples=60)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=20, max_size=200),
       st.floats(0.05, 0.99), st.floats(0.05, 0.99))
def test_critical_value_monotone(draws, a1, a2):
    a1, a2 = sorted((a1, a2))
    assert critical_value(draws, a1) >= critical_value(draws, a2)


def test_perfect_lag_one_correlation_rejects():
    res = run_maxcorr_test(TimeSeriesPanel(np.ones((1, 100))), K=1, center=False, seed=3)
    assert res.statistic == pytest.approx(math.sqrt(100) * 0.99, rel=1e-12)
    assert res.reject and res.p_value == 0.0


def test_deterministic():
    x = iid(1)
    a = run_maxcorr_test(x, K=3, B=600, seed=42)
    assert a == run_maxcorr_test(x, K=3, B=600, seed=42)
    assert a.critical_value != run_maxcorr_test(x, K=3, B=600, seed=43).critical_value


def test_execution_options_do_not_change_result():
    x = iid(2, p=9, n=80)
    ref = run_maxcorr_test(x, K=2, B=700, seed=5)
    for opts in ({"storage": "lazy"}, {"block_rows": 100}, {"workers": 2},
                 {"storage": "lazy", "block_rows": 1, "workers": 3}):
        assert run_maxcorr_test(x, K=2, B=700, seed=5, **opts) == ref


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.01, 0.3))
def test_decision_consistency(seed, alpha):
    B = max(40, math.ceil(1 / alpha))
    res = run_maxcorr_test(iid(seed, p=2, n=40), K=2, alpha=alpha, B=B, seed=seed)
    assert res.reject == (res.statistic > res.critical_value)
    assert 0.0 <= res.p_value <= 1.0
    assert res.reject == (res.p_value < math.floor(B * alpha) / B)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.permutations(range(4)),
       st.lists(st.floats(0.05, 20.0), min_size=4, max_size=4))
def test_invariance(seed, perm, scales):
    x = center(iid(seed, p=4, n=60))
    perm = list(perm)
    y = TimeSeriesPanel(x.values[perm] * np.array(scales)[:, None])
    a = run_maxcorr_test(x, K=2, B=300, seed=9, bandwidth=1.5)
    b = run_maxcorr_test(y, K=2, B=300, seed=9, bandwidth=1.5)
    assert b.statistic == pytest.approx(a.statistic, rel=1e-10)
    assert b.critical_value == pytest.approx(a.critical_value, rel=1e-9)
    assert b.reject == a.reject
    k, i, j = maxcorr.tn_argmax(sample_autocorr_set(x, 2))
    kb, ib, jb = maxcorr.tn_argmax(sample_autocorr_set(y, 2))
    assert (kb, perm[ib], perm[jb]) == (k, i, j)


def test_permutation_keeps_andrews_bandwidth():
    x = center(iid(3, p=4, n=90))
    y = TimeSeriesPanel(x.values[[2, 0, 3, 1]])
    assert run_maxcorr_test(y, B=100, seed=0).bandwidth == pytest.approx(
        run_maxcorr_test(x, B=100, seed=0).bandwidth, rel=1e-12)


def test_p_values_uniform_under_null():
    pv = [run_maxcorr_test(iid(1000 + r, p=3, n=300), K=2, B=1000, seed=r).p_value
          for r in range(200)]
    assert stats.kstest(pv, "uniform").statistic < 0.15


@pytest.mark.parametrize("alpha,B", [(0.0, 2000), (1.0, 2000), (0.05, 19), (0.01, 50)])
def test_level_checks(alpha, B):
    with pytest.raises(ValueError):
        run_maxcorr_test(iid(0), alpha=alpha, B=B)


def test_detection_threshold():
    assert detection_threshold(1, 1, 1, 0.05) == pytest.approx(math.sqrt(2 * math.log(20)), rel=1e-14)
    assert detection_threshold(1, 1, 1, 0.05) == pytest.approx(2.4477, abs=1e-4)
    assert detection_threshold(1, 1, 1, 1 - 1e-12) < 1e-5
    t = [detection_threshold(n, 5, 3, 0.05) for n in (100, 400, 1600)]
    assert t[0] / t[1] == pytest.approx(2.0) and t[1] / t[2] == pytest.approx(2.0)
    assert detection_threshold(100, 5, 3, 0.05, varrho=4.0) == pytest.approx(2 * t[0])
    with pytest.raises(ValueError):
        detection_threshold(100, 5, 3, 0.05, varrho=0.0)


def test_result_serialization():
    res = run_maxcorr_test(iid(4), B=200, seed=1)
    kv = dict(line.split("=", 1) for line in res.to_kv().splitlines())
    assert kv["method"] == "maxcorr" and kv["reject"] in ("true", "false")
    assert float(kv["statistic"]) == res.statistic
    header = TestResult.csv_header().split(",")
    assert header == list(res.to_record()) and len(res.to_csv_row().split(",")) == len(header)


def test_pretransform_label():
    res = run_maxcorr_test(iid(5, p=4), B=200, seed=1, pretransform=True)
    assert res.method == "maxcorr_tspca" and res.p == 4

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdwhite import tspca
from hdwhite.errors import DegenerateComponentError, InfeasibleMethodError
from hdwhite.moments import sample_autocov
from hdwhite.tsdata import TimeSeriesPanel, center


def mixed(seed, p=4, n=200):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal((p, n + 1))
    x = e[:, 1:] + 0.4 * e[:, :-1] * np.linspace(0.2, 1.0, p)[:, None]
    return center(TimeSeriesPanel(rng.standard_normal((p, p)) @ x))


@pytest.mark.parametrize("method", tspca.TRANSFORMS)
def test_scalar_series(method):
    x = center(TimeSeriesPanel(3.0 * np.random.default_rng(0).standard_normal((1, 50))))
    q = tspca.fit_transform(x, method=method).q
    assert q[0, 0] == pytest.approx(1.0 / np.sqrt(np.mean(x.values**2)), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_whiten_gives_identity_covariance(seed):
    x = mixed(seed)
    y = tspca.apply(tspca.fit_transform(x), x)
    np.testing.assert_allclose(sample_autocov(y, 0), np.eye(4), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_spectral_rows_orthonormal(seed):
    x = mixed(seed)
    q = tspca.fit_transform(x, 3, "spectral").q
    d_half = np.sqrt(np.diag(sample_autocov(x, 0)))
    v = q * d_half[None, :]
    np.testing.assert_allclose(v @ v.T, np.eye(4), atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("method", tspca.TRANSFORMS)
def test_idempotent_on_prewhitened_panels(seed, method):
    x = mixed(seed)
    white = tspca.apply(tspca.fit_transform(x), x)
    once = tspca.apply(tspca.fit_transform(white, method=method), white)
    again = tspca.fit_transform(once, method=method).q
    # a second fit is the identity up to column signs
    np.testing.assert_allclose(np.abs(again), np.eye(4), atol=1e-8)


def test_spectral_orders_by_serial_dependence():
    x = mixed(7)
    white = tspca.apply(tspca.fit_transform(x), x)
    y = tspca.apply(tspca.fit_transform(white, 3, "spectral"), white)
    energy = [sum(np.sum(sample_autocov(y, k)[i] ** 2) for k in range(1, 4)) for i in range(4)]
    assert energy[0] == max(energy)


def test_apply_identity_and_inverse():
    x = mixed(1)
    ident = tspca.LinearTransform(np.eye(4), 5)
    np.testing.assert_array_equal(tspca.apply(ident, x).values, x.values)
    t = tspca.fit_transform(x, method="spectral")
    back = tspca.apply(t.inverse(), tspca.apply(t, x))
    np.testing.assert_allclose(back.values, x.values, atol=1e-10)
    assert back.centered


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        tspca.apply(tspca.LinearTransform(np.eye(3), 5), mixed(0))


@pytest.mark.parametrize("q", [np.zeros((2, 2)), np.ones((2, 3)), np.diag([1.0, 1e-12])])
def test_transform_must_be_invertible(q):
    with pytest.raises(ValueError):
        tspca.LinearTransform(q, 1)


def test_csv_roundtrip(tmp_path):
    t = tspca.fit_transform(mixed(2), 4, "spectral")
    tspca.save_csv(t, tmp_path / "q.csv")
    back = tspca.load_csv(tmp_path / "q.csv")
    assert back.k0 == 4
    np.testing.assert_array_equal(back.q, t.q)


def test_errors():
    with pytest.raises(InfeasibleMethodError):
        tspca.fit_transform(center(TimeSeriesPanel(np.random.default_rng(0).standard_normal((6, 5)))), 2)
    x = TimeSeriesPanel(np.vstack([np.random.default_rng(1).standard_normal(10), np.zeros(10)]))
    with pytest.raises(DegenerateComponentError):
        tspca.fit_transform(x, 2)
    with pytest.raises(ValueError):
        tspca.fit_transform(mixed(0), 5, "pca")
    with pytest.raises(ValueError):
        tspca.fit_transform(mixed(0), 0)

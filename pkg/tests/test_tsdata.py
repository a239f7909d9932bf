import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hdwhite.errors import PanelParseError
from hdwhite.tsdata import TimeSeriesPanel, center, load_csv, save_csv


def write(tmp_path, text, name="x.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_shape(tmp_path):
    panel = load_csv(write(tmp_path, "1,2\n3,4\n5,6\n7,8\n"))
    assert (panel.p, panel.n) == (2, 4)
    np.testing.assert_array_equal(panel.values[1], [2, 4, 6, 8])


def test_load_header_skipped(tmp_path):
    panel = load_csv(write(tmp_path, "a,b\n1,2\n3,4\n5,6\n"), has_header=True)
    assert panel.n == 3


def test_ragged_row_names_line(tmp_path):
    with pytest.raises(PanelParseError, match="line 3"):
        load_csv(write(tmp_path, "1,2,3\n4,5,6\n7,8\n"))


@pytest.mark.parametrize("text", ["", "\n\n", "1,2\n"])
def test_too_little_data(tmp_path, text):
    with pytest.raises(PanelParseError):
        load_csv(write(tmp_path, text))


def test_non_numeric_cell(tmp_path):
    with pytest.raises(PanelParseError, match="line 2"):
        load_csv(write(tmp_path, "1,2\n3,abc\n"))


def test_roundtrip(tmp_path):
    x = np.random.default_rng(0).standard_normal((3, 17))
    path = tmp_path / "r.csv"
    save_csv(TimeSeriesPanel(x), path, header=True)
    np.testing.assert_array_equal(load_csv(path, has_header=True).values, x)


@pytest.mark.parametrize("bad", [np.zeros((0, 5)), np.zeros((2, 1)), np.array([[1.0, np.nan]]),
                                 np.zeros(4)])
def test_invalid_panels(bad):
    with pytest.raises(ValueError):
        TimeSeriesPanel(bad)


def test_centered_flag_checked():
    with pytest.raises(ValueError):
        TimeSeriesPanel(np.array([[1.0, 2.0, 3.0]]), centered=True)
    TimeSeriesPanel(np.array([[-1.0, 0.0, 1.0]]), centered=True)


def test_read_only_copy():
    x = np.ones((2, 3))
    panel = TimeSeriesPanel(x)
    x[0, 0] = 5.0
    assert panel.values[0, 0] == 1.0
    with pytest.raises(ValueError):
        panel.values[0, 0] = 2.0


def test_center_examples():
    np.testing.assert_allclose(center(TimeSeriesPanel([[1.0, 2.0, 3.0]])).values, [[-1, 0, 1]])
    z = np.array([[-2.0, 1.0, 1.0]])
    np.testing.assert_array_equal(center(TimeSeriesPanel(z)).values, z)


panels = arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(2, 30)),
                elements=st.floats(-1e3, 1e3))


@settings(max_examples=50, deadline=None)
@given(panels)
def test_center_idempotent_and_shape(x):
    once = center(TimeSeriesPanel(x))
    assert center(once) is once
    assert (once.p, once.n) == x.shape
    np.testing.assert_allclose(once.values.sum(axis=1), 0.0, atol=1e-9 * max(1.0, np.abs(x).max()) * x.shape[1])


@settings(max_examples=50, deadline=None)
@given(panels, st.randoms())
def test_center_commutes_with_permutation(x, rnd):
    perm = list(range(x.shape[0]))
    rnd.shuffle(perm)
    a = center(TimeSeriesPanel(x[perm])).values
    b = center(TimeSeriesPanel(x)).values[perm]
    np.testing.assert_array_equal(a, b)

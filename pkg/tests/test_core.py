import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracsylv.core import SampledSeries, build_time_grid, demote_real, inf_error, sample
from fracsylv.exceptions import ConsistencyError


def test_grid_step():
    g = build_time_grid(1.2, 100)
    assert g.h == pytest.approx(0.012, rel=1e-15)


def test_single_interval_grid():
    np.testing.assert_array_equal(build_time_grid(1.0, 1).nodes, [0.0, 1.0])


def test_endpoint_is_exact():
    g = build_time_grid(1.2, 1600)
    assert g.node(1600) == 1.2
    assert g.nodes[-1] == 1.2
    assert g.node(0) == 0.0


@pytest.mark.parametrize("t_f, N", [(0.0, 4), (-1.0, 4), (1.0, 0), (float("nan"), 3)])
def test_grid_rejects_bad_arguments(t_f, N):
    with pytest.raises(ValueError):
        build_time_grid(t_f, N)


@given(st.floats(0.01, 100.0), st.integers(1, 5000))
def test_grid_equally_spaced(t_f, N):
    g = build_time_grid(t_f, N)
    x = g.nodes
    assert x.shape == (N + 1,)
    assert np.all(np.diff(x) > 0)
    np.testing.assert_allclose(np.diff(x), g.h, rtol=1e-12 * N, atol=4 * np.spacing(t_f))
    assert g.h * N == pytest.approx(t_f, rel=4e-16)


def test_series_length_checked():
    g = build_time_grid(1.0, 4)
    with pytest.raises(ValueError):
        SampledSeries(g, np.zeros(4))
    s = sample(np.exp, g)
    np.testing.assert_array_equal(s.values, np.exp(g.nodes))


def test_inf_error_examples():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert inf_error(A, A) == 0.0
    assert inf_error(A, [[1.0, 2.0], [3.0, 0.0]]) == 4.0


def test_inf_error_shape_mismatch():
    with pytest.raises(ValueError):
        inf_error(np.zeros((2, 2)), np.zeros((2, 3)))


@given(st.integers(0, 2**31))
def test_inf_error_is_a_metric(seed):
    r = np.random.default_rng(seed)
    A, B, C = r.normal(size=(3, 4, 5))
    assert inf_error(A, B) == inf_error(B, A) > 0
    assert inf_error(A, C) <= inf_error(A, B) + inf_error(B, C)


def test_demote_real():
    Z = np.array([1.0 + 1e-12j, 2.0])
    out = demote_real(Z)
    assert out.dtype == np.float64
    np.testing.assert_array_equal(out, [1.0, 2.0])
    with pytest.raises(ConsistencyError):
        demote_real(np.array([1.0 + 1e-3j]))
    real = np.ones(3)
    assert demote_real(real).dtype == np.float64

import numpy as np
import pytest

from fracsylv.core import SampledSeries, build_time_grid, sample
from fracsylv.opmatrix import apply, build_operational_matrix
from fracsylv.quadrature import build_power_table, caputo_quadratic
from fracsylv.specfun import caputo_monomial_exact, gamma_fn


def _scalar_reference(alpha, N, t_f):
    """Plain double loop, 1-based indices shifted by one."""
    tab = build_power_table(alpha, N)
    p1, p2 = tab.p1, tab.p2
    c = 1.0 / (2.0 - alpha)
    D = np.zeros((N + 1, N + 1))
    for j in range(2, N + 2):
        dp = p2[j - 1] - p2[j - 2]
        D[j - 1, 0] = c * dp - 1.5 * p1[j - 1] + 0.5 * p1[j - 2]
        D[j - 1, 1] = -2.0 * c * dp + 2.0 * p1[j - 1]
        D[j - 1, 2] = c * dp - 0.5 * p1[j - 1] - 0.5 * p1[j - 2]
    for j in range(3, N + 2):
        for l in range(1, j - 1):
            dk = p2[j - l - 1] - p2[j - l - 2]
            D[j - 1, l - 1] += c * dk - 0.5 * p1[j - l - 1] - 0.5 * p1[j - l - 2]
            D[j - 1, l] += -2.0 * c * dk + 2.0 * p1[j - l - 2]
            D[j - 1, l + 1] += c * dk + 0.5 * p1[j - l - 1] - 1.5 * p1[j - l - 2]
    h = t_f / N
    return D * (h ** (-alpha) / gamma_fn(2.0 - alpha))


@pytest.mark.parametrize("alpha, N", [(0.5, 2), (0.17, 3), (0.83, 9), (0.3, 40)])
def test_literal_form_is_bitwise_transcription(alpha, N):
    op = build_operational_matrix(alpha, build_time_grid(1.3, N), form="literal")
    np.testing.assert_array_equal(op.M, _scalar_reference(alpha, N, 1.3))


def test_hand_row_alpha_half():
    op = build_operational_matrix(0.5, build_time_grid(2.0, 2), form="literal")
    scale = 1.0 ** (-0.5) / gamma_fn(1.5)
    np.testing.assert_allclose(op.M[1] / scale, [-5 / 6, 2 / 3, 1 / 6], rtol=1e-14)
    stable = build_operational_matrix(0.5, build_time_grid(2.0, 2))
    np.testing.assert_allclose(stable.M, op.M, rtol=1e-14)


@pytest.mark.parametrize("N", [2, 5, 60])
def test_sparsity_pattern(N):
    M = build_operational_matrix(0.4, build_time_grid(1.0, N)).M
    assert np.all(M[0] == 0.0)
    upper = np.triu(M, 1)
    assert upper[1, 2] != 0.0
    upper[1, 2] = 0.0
    assert np.all(upper == 0.0)


@pytest.mark.parametrize("form", ["stable", "literal"])
def test_rows_sum_to_zero(form):
    M = build_operational_matrix(0.05, build_time_grid(1.0, 1500), form=form).M
    sums = M.sum(axis=1)
    assert np.all(np.abs(sums) <= 1e-10 * np.max(np.abs(M), axis=1).clip(min=1.0))


def test_matches_quadrature_e2t():
    g = build_time_grid(1.2, 100)
    s = sample(lambda t: np.exp(2 * t), g)
    np.testing.assert_allclose(apply(build_operational_matrix(0.17, g), s), caputo_quadratic(s, 0.17), rtol=0, atol=1e-12)


def test_random_equivalence(rng):
    for _ in range(20):
        alpha = rng.uniform(0.02, 0.98)
        N = int(rng.integers(2, 400))
        g = build_time_grid(rng.uniform(0.5, 3.0), N)
        s = SampledSeries(g, rng.normal(size=N + 1))
        ref = caputo_quadratic(s, alpha)
        out = apply(build_operational_matrix(alpha, g), s)
        assert np.max(np.abs(out - ref)) <= 1e-12 * max(np.max(np.abs(ref)), 1.0)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_polynomial_exactness(alpha):
    g = build_time_grid(1.5, 70)
    op = build_operational_matrix(alpha, g)
    for beta in (0.0, 1.0, 2.0):
        out = apply(op, sample(lambda t: t**beta, g))
        ref = caputo_monomial_exact(beta, alpha, g.nodes)
        np.testing.assert_allclose(out, ref, rtol=1e-11, atol=1e-12)


def test_apply_grid_mismatch():
    op = build_operational_matrix(0.5, build_time_grid(1.0, 10))
    with pytest.raises(ValueError):
        apply(op, sample(np.exp, build_time_grid(1.0, 11)))
    with pytest.raises(ValueError):
        apply(op, sample(np.exp, build_time_grid(2.0, 10)))


def test_size_guards():
    with pytest.raises(ValueError):
        build_operational_matrix(0.5, build_time_grid(1.0, 1))
    with pytest.raises(ValueError):
        build_operational_matrix(0.5, build_time_grid(1.0, 50), max_n=40)
    with pytest.raises(ValueError):
        build_operational_matrix(0.5, build_time_grid(1.0, 50), form="other")


def test_matrix_is_read_only():
    op = build_operational_matrix(0.5, build_time_grid(1.0, 4))
    with pytest.raises(ValueError):
        op.M[1, 1] = 0.0


def test_csv_dump(tmp_path):
    op = build_operational_matrix(0.3, build_time_grid(1.0, 5))
    path = op.to_csv(tmp_path / "d.csv")
    back = np.loadtxt(path, delimiter=",")
    np.testing.assert_array_equal(back, op.M)

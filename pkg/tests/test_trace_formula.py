import numpy as np
import pytest
from hypothesis import given, strategies as st

from regtrace.ensemble import decorate_magnetic, sample_multigraph
from regtrace.exceptions import BipartiteInput, OutOfSupport, PoleAtD
from regtrace.graph_model import complete_bipartite_graph
from regtrace.operators import adjacency, edge_Y
from regtrace.spectral import chebyshev_table, kesten_mckay, km_edge
from regtrace.trace_formula import (band_radius, compute_y, compute_y_magnetic,
                                    integrate_over_band, reconstruct_density, rho_corr,
                                    rho_smooth, verify_ywt_identity, y_bound)

from conftest import random_graph


def _grid(d, w, n=1000):
    a = 2 * band_radius(d, w)
    return np.linspace(-a, a, n + 2)[1:-1]


@pytest.mark.parametrize("d", [3, 4, 5, 8])
def test_smooth_at_w1_is_kesten_mckay(d):
    mu = _grid(d, 1.0)
    assert np.max(np.abs(rho_smooth(mu, d, 1.0) - kesten_mckay(mu, d))) < 1e-12


@pytest.mark.parametrize("d", [3, 4, 5, 8])
def test_corr_at_w1_matches_nonbacktracking_form(d):
    mu = _grid(d, 1.0)
    expected = -(1 + mu + mu ** 2 - 2 * (d - 1) + (d - 2) / (d - mu)) / (
        2 * np.pi * np.sqrt(4 * (d - 1) - mu ** 2))
    assert np.max(np.abs(rho_corr(mu, d, 1.0) - expected)) < 1e-12


def test_out_of_support_and_pole():
    with pytest.raises(OutOfSupport):
        rho_smooth(np.array([3.0]), 3, 1.0)
    # the band reaches +-d only at w = d/2, where mu = d sits on its edge
    with pytest.raises((PoleAtD, OutOfSupport)):
        rho_smooth(np.array([4.0]), 4, 2.0)


def test_bipartite_rejected():
    with pytest.raises(BipartiteInput):
        compute_y(complete_bipartite_graph(3), 1.0, 5)


def test_petersen_y_values(petersen):
    # frozen from exact non-backtracking traces 30, 0, 0, 0, 0, 120, 120:
    # y_t = (trY^t - 2^t) / (10 * sqrt(2)^t)
    traces = [30, 0, 0, 0, 0, 120, 120]
    expected = [(traces[t] - 2 ** t) / (10 * np.sqrt(2) ** t) for t in range(7)]
    expected[0] = 2.9  # deflated: 2E - 1 over V
    y = compute_y(petersen, 1.0, 6).y
    assert np.allclose(y, expected, atol=1e-13)


@pytest.mark.parametrize("w", [0.5, 1.0, 1.3])
def test_ywt_identity_named_graphs(k4, petersen, w):
    for g in (k4, petersen):
        assert verify_ywt_identity(g, w, 20)["max_residual"] < 1e-8


@given(st.integers(0, 300), st.sampled_from([0.5, 1.0, 1.3]))
def test_ywt_identity_random(seed, w):
    g = random_graph(12, 3, seed)
    assert verify_ywt_identity(g, w, 20)["max_residual"] < 1e-8


def test_ywt_identity_magnetic(petersen):
    dec = decorate_magnetic(petersen, 4)
    assert verify_ywt_identity(petersen, 1.0, 20, dec)["max_residual"] < 1e-8


def test_raw_traces_match_matrix_powers(k4):
    tc = compute_y(k4, 1.3, 5)
    Y = edge_Y(k4, 1.3).astype(float)
    for t in range(6):
        assert tc.raw_traces[t] == pytest.approx(np.trace(np.linalg.matrix_power(Y, t)))


def test_y_bound_holds_for_ramanujan(petersen):
    y = compute_y(petersen, 1.0, 30).y
    assert np.all(np.abs(y[1:]) <= y_bound(3, 10))


@pytest.mark.parametrize("w", [1.0, 1.1, 1.2])
def test_reconstruction_matches_resolution_matched_target(petersen, w):
    dec = reconstruct_density(petersen, w, 120, n_grid=500)
    assert np.max(np.abs(dec.total - dec.target.values)) < 1e-6


def test_reconstruction_multigraph():
    g = sample_multigraph(10, 3, np.random.default_rng(3))
    dec = reconstruct_density(g, 1.1, 120, n_grid=500)
    assert dec.meta["multigraph"] and dec.osc.normalization["t_min"] == 1
    assert np.max(np.abs(dec.total - dec.target.values)) < 1e-6


def test_reconstruction_magnetic(petersen):
    dec_ = decorate_magnetic(petersen, 11)
    w, t_max = 1.0, 80
    out = reconstruct_density(petersen, w, t_max, n_grid=400, decoration=dec_)
    assert np.all(out.corr.values == 0)
    # oracle: Chebyshev projection of all magnetic eigenvalues
    ev = np.linalg.eigvalsh(adjacency(petersen, dec_))
    r = band_radius(3, w)
    mu = out.grid
    mom = 2.0 / 10 * chebyshev_table(t_max, ev / (2 * r)).sum(axis=1)
    mom[0] /= 2
    target = np.tensordot(mom, chebyshev_table(t_max, mu / (2 * r)), axes=(0, 0)) / (
        np.pi * np.sqrt(4 * r * r - mu * mu))
    scale = max(1.0, np.abs(target).max())
    assert np.max(np.abs(out.total - target)) / scale < 1e-6


@pytest.mark.parametrize("w", [0.8, 1.0, 1.3])
def test_low_moments_independent_of_w(petersen, w):
    ev = np.sort(np.linalg.eigvalsh(adjacency(petersen).astype(float)))[:-1]
    for k in range(5):
        m = integrate_over_band(
            lambda mu: reconstruct_density(petersen, w, 30, grid=mu).total * mu ** k, 3, w, 400)
        assert m == pytest.approx(np.sum(ev ** k) / 10, abs=1e-10)


def test_integrate_over_band_km():
    assert integrate_over_band(lambda mu: kesten_mckay(mu, 3), 3, 1.0) == pytest.approx(1, abs=1e-10)
    assert km_edge(3) == pytest.approx(2 * band_radius(3, 1.0))


def test_magnetic_y_has_no_trivial_term(petersen):
    tc = compute_y_magnetic(petersen, decorate_magnetic(petersen, zero=True), 1.0, 4)
    assert tc.y[0] == pytest.approx(3.0)  # 2E / V without deflation

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from regtrace.ensemble import EnsembleSpec, decorate_magnetic, sample_regular
from regtrace.estimators import (CoarseDensityEstimator, KestenMcKayComparison,
                                 SecularDensityEstimator, TraceFormulaEstimator)
from regtrace.observables import (edge_traces, km_bin_masses, km_l1_distance,
                                  magnetic_top_eigenvalue, nontrivial_spectrum)
from regtrace.spectral import kesten_mckay, km_edge
from regtrace.trace_formula import reconstruct_density
from regtrace.walks import nonbacktracking_traces


def test_edge_traces_match_exact_counts(petersen):
    assert np.array_equal(edge_traces(petersen, 3, 8), nonbacktracking_traces(petersen, 8)[3:])


def test_nontrivial_spectrum_drops_top(k4):
    assert np.allclose(nontrivial_spectrum(k4), [-1, -1, -1])


def test_magnetic_top_zero_phase_is_degree(petersen):
    assert magnetic_top_eigenvalue(petersen, decorate_magnetic(petersen, zero=True)) == pytest.approx(3)


def test_km_bins_sum_to_one():
    edges, q = km_bin_masses(3, 0.1)
    assert q.sum() == pytest.approx(1.0)
    assert edges[0] == pytest.approx(-km_edge(3)) and edges[-1] >= km_edge(3)


def test_l1_distance_of_km_quantiles_is_small():
    # eigenvalues at Kesten-McKay quantiles reproduce the bin masses up to rounding
    from scipy.optimize import brentq
    from regtrace.spectral import kesten_mckay_cdf
    a = km_edge(3)
    u = (np.arange(20000) + 0.5) / 20000
    ev = np.array([brentq(lambda x: kesten_mckay_cdf(x, 3) - p, -a, a) for p in u[::10]])
    assert km_l1_distance(ev, 3) < 0.01
    assert km_l1_distance(np.full(10, 5.0), 3) == pytest.approx(2.0)


def test_estimators_follow_sklearn_conventions(petersen):
    for est in (CoarseDensityEstimator(t_max=10), TraceFormulaEstimator(w=1.2),
                SecularDensityEstimator(eps=0.1), KestenMcKayComparison()):
        params = est.get_params()
        assert clone(est).get_params() == params
        with pytest.raises(NotFittedError):
            est.predict([0.0]) if isinstance(est, KestenMcKayComparison) else est.transform([0.0])


def test_trace_formula_estimator_matches_function(petersen):
    mu = np.linspace(-2.5, 2.5, 7)
    est = TraceFormulaEstimator(w=1.1, t_max=40).fit(petersen)
    ref = reconstruct_density(petersen, 1.1, 40, grid=mu).total
    assert np.allclose(est.transform(mu), ref)


def test_coarse_estimator_pools_graphs():
    graphs = [sample_regular(EnsembleSpec(20, 3, 2, seed=0), i) for i in range(2)]
    est = CoarseDensityEstimator(t_max=15).fit(graphs)
    assert est.eigenvalues_.size == 38
    assert est.transform(np.array([0.0, 1.0])).shape == (2,)


def test_secular_estimator(k4):
    vals = SecularDensityEstimator(eps=0.1, method="logdet").fit(k4).transform([-1.0, 0.5])
    assert vals[0] > vals[1]


def test_km_comparison_scores():
    graphs = [sample_regular(EnsembleSpec(100, 3, 5, seed=1), i) for i in range(5)]
    est = KestenMcKayComparison().fit(graphs)
    assert -0.3 < est.score() < 0
    assert np.allclose(est.predict([0.0, 1.0]), kesten_mckay(np.array([0.0, 1.0]), 3))

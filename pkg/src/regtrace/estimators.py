"""Estimator-style wrappers: fit on a graph, then evaluate a density on ``mu`` values."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .graph_model import RegularGraph
from .observables import km_l1_distance, nontrivial_spectrum
from .spectral import coarse_density, kesten_mckay
from .trace_formula import compute_y, reconstruct_density
from .unitary import density_from_secular

__all__ = [
    "CoarseDensityEstimator",
    "TraceFormulaEstimator",
    "SecularDensityEstimator",
    "KestenMcKayComparison",
]


def _graphs(X) -> list[RegularGraph]:
    if isinstance(X, RegularGraph):
        return [X]
    graphs = list(X)
    if not graphs or not all(isinstance(g, RegularGraph) for g in graphs):
        raise TypeError("expected a RegularGraph or a non-empty sequence of them")
    return graphs


def _mu(X) -> np.ndarray:
    return np.asarray(X, dtype=float).ravel()


class CoarseDensityEstimator(BaseEstimator, TransformerMixin):
    """Chebyshev-smoothed density of the pooled nontrivial adjacency spectra.

    ``fit`` takes one graph or a list of graphs of the same degree;
    ``transform`` takes ``mu`` values inside the Kesten-McKay support.
    """

    def __init__(self, t_max: int = 40):
        self.t_max = t_max

    def fit(self, X, y=None):
        graphs = _graphs(X)
        self.degree_ = graphs[0].degree
        self.eigenvalues_ = np.concatenate([nontrivial_spectrum(g) for g in graphs])
        return self

    def transform(self, X):
        check_is_fitted(self, "eigenvalues_")
        curve = coarse_density(self.eigenvalues_, self.degree_, self.t_max, grid=_mu(X),
                               drop_trivial=False)
        return curve.values


class TraceFormulaEstimator(BaseEstimator, TransformerMixin):
    """Trace-formula density ``smooth + osc + corr / V`` of one graph at back-scatter weight ``w``."""

    def __init__(self, w: float = 1.0, t_max: int = 60):
        self.w = w
        self.t_max = t_max

    def fit(self, X, y=None):
        (g,) = _graphs(X)
        self.graph_ = g
        self.coefficients_ = compute_y(g, self.w, self.t_max, eigen_side=False)
        return self

    def decompose(self, X):
        check_is_fitted(self, "coefficients_")
        return reconstruct_density(self.graph_, self.w, self.t_max, grid=_mu(X),
                                   coefficients=self.coefficients_)

    def transform(self, X):
        return self.decompose(X).total


class SecularDensityEstimator(BaseEstimator, TransformerMixin):
    """Density of one graph from the unitary secular function, broadened by ``eps``."""

    def __init__(self, phi=-np.pi / 2, eps: float = 0.05, t_max: int = 40,
                 method: str = "series"):
        self.phi = phi
        self.eps = eps
        self.t_max = t_max
        self.method = method

    def fit(self, X, y=None):
        (g,) = _graphs(X)
        self.graph_ = g
        return self

    def transform(self, X):
        check_is_fitted(self, "graph_")
        return density_from_secular(self.graph_, _mu(X), self.phi, self.eps, self.t_max,
                                    self.method).values


class KestenMcKayComparison(BaseEstimator):
    """Pooled nontrivial spectra of a sample of graphs compared with Kesten-McKay.

    ``score`` returns minus the binned L1 distance, so larger is better.
    """

    def __init__(self, bin_width: float = 0.1):
        self.bin_width = bin_width

    def fit(self, X, y=None):
        graphs = _graphs(X)
        self.degree_ = graphs[0].degree
        self.eigenvalues_ = np.concatenate([nontrivial_spectrum(g) for g in graphs])
        self.l1_ = km_l1_distance(self.eigenvalues_, self.degree_, self.bin_width)
        return self

    def predict(self, X):
        """Kesten-McKay density at ``mu``."""
        check_is_fitted(self, "degree_")
        return kesten_mckay(_mu(X), self.degree_)

    def score(self, X=None, y=None):
        check_is_fitted(self, "l1_")
        return -self.l1_

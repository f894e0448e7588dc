"""Per-graph observables used in ensemble experiments."""

from __future__ import annotations

import numpy as np

from .graph_model import MagneticDecoration, RegularGraph
from .operators import adjacency, edge_Y
from .spectral import kesten_mckay_cdf, km_edge

__all__ = [
    "edge_traces",
    "nontrivial_spectrum",
    "magnetic_top_eigenvalue",
    "km_bin_masses",
    "km_l1_distance",
]


def edge_traces(g: RegularGraph, t_min: int = 3, t_max: int = 6, w: float = 1.0) -> np.ndarray:
    """``tr Y(w)^t`` for ``t = t_min..t_max`` in floating point.

    At ``w = 1`` these count closed non-backtracking walks and are exact
    while below ``2^53``.
    """
    Y = edge_Y(g, w).astype(float)
    P = np.linalg.matrix_power(Y, t_min)
    out = [np.trace(P)]
    for _ in range(t_min + 1, t_max + 1):
        P = P @ Y
        out.append(np.trace(P))
    return np.array(out)


def nontrivial_spectrum(g: RegularGraph) -> np.ndarray:
    """Adjacency eigenvalues without the top one (``d`` for a connected regular graph)."""
    ev = np.linalg.eigvalsh(adjacency(g).astype(float))
    return ev[:-1]


def magnetic_top_eigenvalue(g: RegularGraph, decoration: MagneticDecoration) -> float:
    """Largest ``|mu|`` of the magnetic adjacency matrix."""
    ev = np.linalg.eigvalsh(adjacency(g, decoration))
    return float(np.abs(ev).max())


def _bin_edges(d: int, bin_width: float) -> np.ndarray:
    a = km_edge(d)
    n = int(np.ceil(2 * a / bin_width - 1e-9))
    return -a + bin_width * np.arange(n + 1)


def km_bin_masses(d: int, bin_width: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Bin edges starting at the lower band edge and the Kesten-McKay mass in each bin."""
    edges = _bin_edges(d, bin_width)
    return edges, np.diff(kesten_mckay_cdf(edges, d))


def km_l1_distance(eigenvalues, d: int, bin_width: float = 0.1) -> float:
    """L1 distance between the eigenvalue histogram and Kesten-McKay at a fixed bin width.

    ``sum |p_bin - q_bin|`` over bins, where ``p`` and ``q`` are the empirical
    and Kesten-McKay masses; this equals the integral of ``|hist - rho|``
    for piecewise-constant densities. Eigenvalues falling outside every bin
    add their full mass.
    """
    ev = np.asarray(eigenvalues, dtype=float).ravel()
    edges, q = km_bin_masses(d, bin_width)
    counts, _ = np.histogram(ev, bins=edges)
    p = counts / ev.size
    outside = 1.0 - p.sum()
    return float(np.abs(p - q).sum() + outside)

"""Vertex- and edge-space matrices of a graph.

All functions return dense numpy arrays. Edge-space matrices are indexed by
directed edges in the layout of :class:`~regtrace.graph_model.RegularGraph`.
"""

from __future__ import annotations

import numpy as np

from .graph_model import MagneticDecoration, RegularGraph, WeightDecoration

__all__ = [
    "adjacency",
    "degree_matrix",
    "laplacian",
    "edge_B",
    "edge_J",
    "edge_Y",
    "incidence_halves",
]


def _split(decoration):
    if decoration is None:
        return None, None
    if isinstance(decoration, MagneticDecoration):
        return decoration, None
    if isinstance(decoration, WeightDecoration):
        return None, decoration
    raise TypeError(f"unknown decoration type {type(decoration).__name__}")


def adjacency(g: RegularGraph, decoration=None) -> np.ndarray:
    """Adjacency matrix; a loop contributes 2 to its diagonal entry.

    With a magnetic decoration entry ``(o(e), t(e))`` accumulates
    ``exp(i phi_e)`` (Hermitian); with weights it accumulates ``W_e``.
    """
    mag, wt = _split(decoration)
    V = g.n_vertices
    if mag is not None:
        mag.check(g)
        A = np.zeros((V, V), dtype=complex)
        np.add.at(A, (g.origin, g.terminus), np.exp(1j * mag.directed_phases))
        return A
    if wt is not None:
        wt.check(g)
        A = np.zeros((V, V))
        np.add.at(A, (g.origin, g.terminus), wt.directed_weights)
        return A
    A = np.zeros((V, V), dtype=np.int64)
    np.add.at(A, (g.origin, g.terminus), 1)
    return A


def degree_matrix(g: RegularGraph, decoration=None) -> np.ndarray:
    """Diagonal degree matrix; with weights ``D_ii`` sums ``W_e`` over edges into ``i``."""
    _, wt = _split(decoration)
    if wt is not None:
        wt.check(g)
        return np.diag(np.bincount(g.terminus, weights=wt.directed_weights,
                                   minlength=g.n_vertices))
    return np.diag(g.degrees.astype(np.int64))


def laplacian(g: RegularGraph, decoration=None) -> np.ndarray:
    """``D - A``. Magnetic decorations keep the plain degree matrix."""
    mag, wt = _split(decoration)
    return degree_matrix(g, wt) - adjacency(g, decoration)


def edge_B(g: RegularGraph, decoration=None) -> np.ndarray:
    """Edge connectivity ``B[e, e'] = [t(e) == o(e')]``.

    Magnetic: entries carry ``exp(i (phi_e + phi_e') / 2)``.
    Weighted: ``S B S`` with ``S = diag(sqrt(W_e))`` using the principal
    complex root, which is the per-edge factorization that keeps the
    determinant identity exact when some weights are negative.
    """
    mag, wt = _split(decoration)
    B = (g.terminus[:, None] == g.origin[None, :]).astype(np.int64)
    if mag is not None:
        mag.check(g)
        half = np.exp(0.5j * mag.directed_phases)
        return B * half[:, None] * half[None, :]
    if wt is not None:
        wt.check(g)
        root = np.sqrt(wt.directed_weights.astype(complex))
        return B * root[:, None] * root[None, :]
    return B


def edge_J(g: RegularGraph) -> np.ndarray:
    """Reversal permutation ``J[e, e^1] = 1``."""
    n = g.n_directed
    J = np.zeros((n, n), dtype=np.int64)
    idx = np.arange(n)
    J[idx, idx ^ 1] = 1
    return J


def edge_Y(g: RegularGraph, w=1.0, decoration=None) -> np.ndarray:
    """``Y(w) = B - w J``; at ``w = 1`` this is the non-backtracking matrix."""
    B = edge_B(g, decoration)
    if w == 0:
        return B
    return B - w * edge_J(g)


def incidence_halves(g: RegularGraph, magnetic: MagneticDecoration | None = None):
    """The ``2E x V`` terminus and origin indicator matrices ``(B_plus, B_minus)``.

    With a magnetic decoration ``B_plus`` rows are scaled by ``exp(+i phi_e/2)``
    and ``B_minus`` rows by ``exp(-i phi_e/2)``; products then use the
    conjugate transpose.
    """
    n, V = g.n_directed, g.n_vertices
    rows = np.arange(n)
    Bp = np.zeros((n, V), dtype=np.int64)
    Bm = np.zeros((n, V), dtype=np.int64)
    Bp[rows, g.terminus] = 1
    Bm[rows, g.origin] = 1
    if magnetic is None:
        return Bp, Bm
    magnetic.check(g)
    half = np.exp(0.5j * magnetic.directed_phases)[:, None]
    return Bp * half, Bm * half.conj()

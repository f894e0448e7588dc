"""Random regular graph ensembles, their decorations, and ensemble averages.

Every sample owns a random stream derived from ``(seed, sample_index)`` so
results do not depend on the number of workers or on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

from .exceptions import GraphError, OddProduct, RejectionBudgetExceeded
from .graph_model import (MagneticDecoration, RegularGraph, WeightDecoration, build_graph,
                          is_bipartite, is_connected)

__all__ = [
    "EnsembleSpec",
    "sample_regular",
    "sample_multigraph",
    "decorate_magnetic",
    "decorate_weighted",
    "ensemble_average",
    "ensemble_samples",
    "mean_and_stderr",
]

DECORATIONS = ("none", "magnetic", "weighted")


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of an ensemble experiment.

    ``max_attempts`` bounds the number of configuration-model pairings tried
    per sample before giving up.
    """

    V: int
    d: int
    sample_count: int = 1
    seed: int = 0
    decoration: str = "none"
    reject_bipartite: bool = True
    reject_disconnected: bool = True
    max_attempts: int = 100_000

    def __post_init__(self):
        if self.V < 1 or self.d < 1:
            raise GraphError("V and d must be positive")
        if (self.V * self.d) % 2:
            raise OddProduct(f"d*V = {self.d}*{self.V} is odd")
        if self.V <= self.d:
            raise GraphError(f"need V > d for a simple graph, got V={self.V}, d={self.d}")
        if self.sample_count < 1:
            raise GraphError("sample_count must be at least 1")
        if self.decoration not in DECORATIONS:
            raise GraphError(f"decoration must be one of {DECORATIONS}")

    def rng(self, index: int, stream: int = 0) -> np.random.Generator:
        key = [self.seed % 2**64, index] + ([stream] if stream else [])
        return np.random.default_rng(np.random.SeedSequence(key))


def _pairing(V: int, d: int, rng: np.random.Generator) -> np.ndarray:
    stubs = np.repeat(np.arange(V), d)
    return rng.permutation(stubs).reshape(-1, 2)


def _is_simple(pairs: np.ndarray, V: int) -> bool:
    if np.any(pairs[:, 0] == pairs[:, 1]):
        return False
    key = np.minimum(pairs[:, 0], pairs[:, 1]) * V + np.maximum(pairs[:, 0], pairs[:, 1])
    return np.unique(key).size == key.size


def sample_regular(spec: EnsembleSpec, index: int = 0) -> RegularGraph:
    """Draw sample ``index`` of the simple d-regular ensemble.

    Configuration model with full restart on any loop or parallel edge, so
    the accepted graph is uniform over simple d-regular graphs. Bipartite and
    disconnected draws are also restarted when the ensemble settings ask for it.
    """
    rng = spec.rng(index)
    V, d = spec.V, spec.d
    for _ in range(spec.max_attempts):
        pairs = _pairing(V, d, rng)
        if not _is_simple(pairs, V):
            continue
        pairs = np.sort(pairs, axis=1)
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        g = build_graph(pairs.tolist(), n_vertices=V, degree=d)
        if spec.reject_disconnected and not is_connected(g):
            continue
        if spec.reject_bipartite and is_bipartite(g):
            continue
        return g
    raise RejectionBudgetExceeded(
        f"no acceptable pairing in {spec.max_attempts} attempts for V={V}, d={d}")


def sample_multigraph(V: int, d: int, rng: np.random.Generator) -> RegularGraph:
    """Configuration-model multigraph: loops and parallel edges are kept."""
    if (V * d) % 2:
        raise OddProduct(f"d*V = {d}*{V} is odd")
    pairs = _pairing(V, d, rng)
    return build_graph(pairs.tolist(), mode="multigraph", n_vertices=V, degree=d)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def decorate_magnetic(g: RegularGraph, seed=None, zero: bool = False) -> MagneticDecoration:
    """Independent phases uniform on ``[0, 2 pi)``, one per undirected edge."""
    if zero:
        phases = np.zeros(g.n_edges)
    else:
        phases = _as_rng(seed).uniform(0.0, 2 * np.pi, g.n_edges)
    return MagneticDecoration(phases, g.fingerprint())


def decorate_weighted(g: RegularGraph, seed=None, unit: bool = False) -> WeightDecoration:
    """Independent weights uniform on ``[-1, 1]``, one per undirected edge."""
    if unit:
        weights = np.ones(g.n_edges)
    else:
        weights = _as_rng(seed).uniform(-1.0, 1.0, g.n_edges)
    return WeightDecoration(weights, g.fingerprint())


def _draw(spec: EnsembleSpec, index: int):
    g = sample_regular(spec, index)
    if spec.decoration == "magnetic":
        return g, decorate_magnetic(g, spec.rng(index, stream=1))
    if spec.decoration == "weighted":
        return g, decorate_weighted(g, spec.rng(index, stream=1))
    return g, None


def _evaluate(spec: EnsembleSpec, index: int, observable: Callable) -> np.ndarray:
    g, dec = _draw(spec, index)
    value = observable(g) if dec is None else observable(g, dec)
    return np.atleast_1d(np.asarray(value, dtype=float))


def ensemble_samples(spec: EnsembleSpec, observable: Callable, n_jobs: int = 1) -> np.ndarray:
    """Observable values for every sample, shape ``(sample_count, k)``.

    ``observable`` receives the graph, plus its decoration when the ensemble
    requests one.
    """
    if n_jobs == 1:
        rows = [_evaluate(spec, i, observable) for i in range(spec.sample_count)]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_evaluate)(spec, i, observable) for i in range(spec.sample_count))
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ValueError(f"observable returned vectors of varying length {sorted(lengths)}")
    return np.vstack(rows)


def mean_and_stderr(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and standard errors ``std(ddof=1) / sqrt(n)``.

    Sums use :func:`math.fsum`, so the result does not depend on row order.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    mean = np.array([math.fsum(col) / n for col in values.T])
    if n < 2:
        return mean, np.zeros_like(mean)
    var = np.array([math.fsum((col - m) ** 2) / (n - 1) for col, m in zip(values.T, mean)])
    return mean, np.sqrt(var / n)


def ensemble_average(spec: EnsembleSpec, observable: Callable, n_jobs: int = 1):
    """Sample mean and standard error of a vector observable over the ensemble."""
    return mean_and_stderr(ensemble_samples(spec, observable, n_jobs))

"""Spectra, the vertex-to-edge spectrum map, Kesten-McKay law and Chebyshev kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import linear_sum_assignment

from .exceptions import AllEigenvaluesExcluded, EndpointSingular, NotHermitian

__all__ = [
    "SpectralData",
    "DensityCurve",
    "adjacency_spectrum",
    "arccos_continued",
    "edge_spectrum_from_vertex",
    "multiset_distance",
    "kesten_mckay",
    "kesten_mckay_cdf",
    "km_edge",
    "chebyshev_T",
    "chebyshev_table",
    "coarse_delta",
    "non_ramanujan_mask",
    "coarse_density",
    "empirical_histogram",
    "tmax_bound",
]

RAMANUJAN_TOL = 1e-12


def km_edge(d) -> float:
    """Upper edge ``2 sqrt(d-1)`` of the Kesten-McKay support."""
    return 2.0 * np.sqrt(d - 1.0)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues sorted non-increasing, plus the degree when known."""

    eigenvalues: np.ndarray
    degree: int | None = None

    @property
    def V(self) -> int:
        return len(self.eigenvalues)

    @property
    def trivial(self) -> bool:
        """True when the top eigenvalue equals the degree (and is simple)."""
        if self.degree is None or self.V == 0:
            return False
        ev = self.eigenvalues
        top = abs(ev[0] - self.degree) < 1e-8
        simple = self.V == 1 or abs(ev[1] - self.degree) > 1e-8
        return bool(top and simple)

    @property
    def bipartite_flag(self) -> bool:
        """True when ``-d`` is an eigenvalue."""
        return self.degree is not None and abs(self.eigenvalues[-1] + self.degree) < 1e-8

    @property
    def nontrivial(self) -> np.ndarray:
        return self.eigenvalues[1:] if self.trivial else self.eigenvalues

    def phases(self, w: complex = 1.0) -> np.ndarray:
        """``arccos(mu_k / (2 sqrt(w (d - w))))``, continued outside ``[-1, 1]``."""
        r = 2 * np.sqrt(complex(w * (self.degree - w)))
        return arccos_continued(self.eigenvalues / r)


def adjacency_spectrum(m, degree: int | None = None, tol: float = 1e-10) -> SpectralData:
    """Full spectrum of a symmetric or Hermitian matrix, sorted non-increasing."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian("matrix must be square")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.conj().T).max(initial=0.0) > tol * scale:
        raise NotHermitian("matrix is not Hermitian")
    ev = np.linalg.eigvalsh(m)[::-1].copy()
    ev.setflags(write=False)
    return SpectralData(ev, degree)


def arccos_continued(x) -> np.ndarray:
    """``arccos`` extended to all complex arguments as ``-i log(x + sqrt(x^2 - 1))``.

    Agrees with the real arccos on ``[-1, 1]``.
    """
    x = np.asarray(x, dtype=complex)
    out = -1j * np.log(x + np.sqrt(x - 1) * np.sqrt(x + 1))
    inside = (np.abs(x.imag) == 0) & (np.abs(x.real) <= 1)
    out[inside] = np.arccos(x.real[inside])
    return out


def edge_spectrum_from_vertex(spec, w: complex, E: int, V: int | None = None,
                              d: int | None = None) -> np.ndarray:
    """Predicted eigenvalues of ``Y(w) = B - w J`` from the adjacency spectrum.

    Each vertex eigenvalue ``mu`` contributes the two roots of
    ``lam^2 - mu lam + w (d - w)``; for ``mu = d`` these are ``d - w`` and
    ``w``. The remaining ``2(E - V)`` eigenvalues are ``+w`` and ``-w``, each
    ``E - V`` times.
    """
    if isinstance(spec, SpectralData):
        mu, d = spec.eigenvalues, spec.degree if d is None else d
    else:
        mu = np.asarray(spec, dtype=float)
    if d is None:
        raise ValueError("degree is required")
    V = len(mu) if V is None else V
    c = w * (d - w)
    disc = np.sqrt(np.asarray(mu, dtype=complex) ** 2 - 4 * c)
    roots = np.concatenate([(mu + disc) / 2, (mu - disc) / 2])
    extra = np.concatenate([np.full(E - V, w, dtype=complex), np.full(E - V, -w, dtype=complex)])
    return np.concatenate([roots, extra])


def multiset_distance(predicted, direct, cluster_tol: float = 1e-6) -> float:
    """Worst mismatch between two multisets of complex numbers.

    Values are paired by an optimal assignment. Predicted values that
    coincide within ``cluster_tol`` form a cluster; its mean is compared with
    the mean of the direct values assigned to it. Cluster means are stable
    for defective eigenvalues, where individual direct eigenvalues scatter
    by roughly the square root of machine precision.
    """
    p = np.asarray(predicted, dtype=complex)
    q = np.asarray(direct, dtype=complex)
    if p.shape != q.shape:
        raise ValueError(f"multiset sizes differ: {p.size} vs {q.size}")
    rows, cols = linear_sum_assignment(np.abs(p[:, None] - q[None, :]))
    q = q[cols[np.argsort(rows)]]
    label = -np.ones(p.size, dtype=int)
    n_clusters = 0
    for i in range(p.size):
        if label[i] < 0:
            near = (np.abs(p - p[i]) <= cluster_tol) & (label < 0)
            label[near] = n_clusters
            n_clusters += 1
    worst = 0.0
    for c in range(n_clusters):
        sel = label == c
        worst = max(worst, abs(p[sel].mean() - q[sel].mean()))
    return float(worst)


# -- Kesten-McKay -----------------------------------------------------------

def kesten_mckay(mu, d) -> np.ndarray:
    """Kesten-McKay density ``d sqrt(4(d-1) - mu^2) / (2 pi (d^2 - mu^2))``; zero off support."""
    mu = np.asarray(mu, dtype=float)
    rad = 4.0 * (d - 1) - mu * mu
    inside = rad > 0
    out = np.zeros(np.broadcast(mu, rad).shape)
    m = np.broadcast_to(mu, out.shape)[inside]
    out[inside] = d * np.sqrt(rad[inside]) / (2 * np.pi * (d * d - m * m))
    return out if out.ndim else out[()]


def kesten_mckay_cdf(mu, d) -> np.ndarray:
    """Closed-form cumulative distribution of the Kesten-McKay law."""
    a = km_edge(d)
    mu = np.clip(np.asarray(mu, dtype=float), -a, a)
    root = np.sqrt(np.clip(a * a - mu * mu, 0.0, None))
    angle = np.arctan2((d - 2) * mu, d * root)
    return 0.5 + d / (2 * np.pi) * (np.arcsin(mu / a) - (d - 2) / d * angle)


# -- Chebyshev machinery ----------------------------------------------------

def chebyshev_table(t_max: int, x) -> np.ndarray:
    """``T_t(x)`` for ``t = 0..t_max`` by the three-term recurrence, shape ``(t_max+1,) + x.shape``.

    The recurrence is a polynomial identity, so arguments outside ``[-1, 1]``
    and complex arguments are handled too.
    """
    x = np.asarray(x)
    out = np.empty((t_max + 1,) + x.shape, dtype=np.result_type(x, float))
    out[0] = 1
    if t_max >= 1:
        out[1] = x
    for t in range(2, t_max + 1):
        out[t] = 2 * x * out[t - 1] - out[t - 2]
    return out


def chebyshev_T(t: int, x):
    """Chebyshev polynomial of the first kind ``T_t(x)``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return chebyshev_table(t, x)[t]


def coarse_delta(x, x_prime, t_max: int) -> np.ndarray:
    """Truncated Chebyshev delta kernel, peaked at ``x = x'`` with width ~ 1/t_max."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1):
        raise EndpointSingular("coarse_delta is singular at |x| = 1")
    weights = np.ones(t_max + 1)
    weights[0] = 0.5
    Tx = chebyshev_table(t_max, x)
    Txp = chebyshev_table(t_max, np.asarray(x_prime, dtype=float))
    s = np.tensordot(weights[:, None] * Tx.reshape(t_max + 1, -1),
                     Txp.reshape(t_max + 1, -1), axes=(0, 0))
    s = s.reshape(x.shape + np.shape(x_prime))
    pre = 2.0 / (np.pi * np.sqrt(1.0 - x * x))
    return pre.reshape(x.shape + (1,) * np.ndim(x_prime)) * s


def non_ramanujan_mask(eigenvalues, d, tol: float = RAMANUJAN_TOL) -> np.ndarray:
    """True for eigenvalues strictly outside ``[-2 sqrt(d-1), 2 sqrt(d-1)]`` beyond ``tol``."""
    return np.abs(np.asarray(eigenvalues, dtype=float)) > km_edge(d) + tol


@dataclass
class DensityCurve:
    """A sampled density ``mu -> rho(mu)`` with a record of how it was made."""

    grid: np.ndarray
    values: np.ndarray
    provenance: str
    normalization: dict = field(default_factory=dict)

    def integral(self) -> float:
        return float(trapezoid(self.values, self.grid))


def coarse_density(eigenvalues, d: int, t_max: int, grid=None, n_grid: int = 1000,
                   drop_trivial: bool = True) -> DensityCurve:
    """Chebyshev-smoothed spectral density on the Kesten-McKay interval.

    Eigenvalues outside the interval (and the trivial eigenvalue ``d``) are
    left out; the result is divided by the number of eigenvalues kept so it
    integrates to one, and by ``2 sqrt(d-1)`` so it is a density in ``mu``.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    if drop_trivial and ev.size and abs(ev[0] - d) < 1e-8:
        ev = ev[1:]
    excluded = non_ramanujan_mask(ev, d)
    kept = ev[~excluded]
    if kept.size == 0:
        raise AllEigenvaluesExcluded("no eigenvalue lies inside the Kesten-McKay interval")
    a = km_edge(d)
    if grid is None:
        u = (np.arange(n_grid) + 0.5) / n_grid
        grid = a * np.cos(np.pi * (1 - u))
    grid = np.asarray(grid, dtype=float)
    x = grid / a
    xk = np.clip(kept / a, -1.0, 1.0)
    kern = coarse_delta(x, xk, t_max)
    values = kern.sum(axis=-1) / (kept.size * a)
    return DensityCurve(grid, values, "coarse",
                        {"t_max": t_max, "n_kept": int(kept.size),
                         "n_excluded": int(excluded.sum()), "trivial_dropped": bool(drop_trivial)})


def empirical_histogram(eigenvalues, bin_width: float = 0.05, lo: float | None = None,
                        hi: float | None = None):
    """Normalized histogram ``(bin_edges, density)`` of a list of eigenvalues."""
    ev = np.asarray(eigenvalues, dtype=float).ravel()
    lo = float(ev.min()) if lo is None else lo
    hi = float(ev.max()) if hi is None else hi
    n_bins = max(1, int(np.ceil((hi - lo) / bin_width - 1e-9)))
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(ev, bins=edges)
    return edges, counts / (ev.size * bin_width)


def tmax_bound(V: int, a: float = 1.0, alpha: float = 2.0 / 3.0) -> float:
    """Largest truncation order for which non-Ramanujan outliers stay negligible.

    ``(V^(alpha/2) / a) log(V^(1 - alpha/2))``; asymptotic guidance only.
    """
    return V ** (alpha / 2) / a * np.log(V ** (1 - alpha / 2))

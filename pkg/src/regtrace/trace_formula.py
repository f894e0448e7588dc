"""Trace formula for the spectral density of a regular graph, parametrized by ``w``.

With ``r = sqrt(w (d - w))`` and ``x = mu / (2 r)`` the density splits as::

    rho(mu) = rho_smooth(mu; w) + rho_osc(mu; w) + rho_corr(mu; w) / V

``rho_osc`` is a Chebyshev series whose coefficients ``y_t(w)`` are
normalized traces of ``Y(w)^t``; only finite truncations are built here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import BipartiteInput, OutOfSupport, PoleAtD
from .graph_model import MagneticDecoration, RegularGraph, is_bipartite
from .operators import adjacency, edge_Y
from .spectral import DensityCurve, chebyshev_table

__all__ = [
    "TraceCoefficients",
    "TraceFormulaDecomposition",
    "band_radius",
    "compute_y",
    "compute_y_magnetic",
    "y_from_spectrum",
    "verify_ywt_identity",
    "rho_smooth",
    "rho_corr",
    "rho_corr_multigraph",
    "rho_osc",
    "reconstruct_density",
    "chebyshev_projection",
    "integrate_over_band",
    "y_bound",
]


def band_radius(d, w) -> float:
    """``r = sqrt(w (d - w))``; the band is ``|mu| < 2 r``."""
    return float(np.sqrt(w * (d - w)))


@dataclass
class TraceCoefficients:
    """Normalized traces ``y_t`` for ``t = 0..t_max`` at one value of ``w``.

    ``raw_traces`` holds ``tr Y(w)^t``. ``eigen_side`` holds the same ``y_t``
    evaluated from the adjacency spectrum, when requested.
    """

    w: float
    d: int
    V: int
    y: np.ndarray
    raw_traces: np.ndarray
    magnetic: bool = False
    eigen_side: np.ndarray | None = None

    @property
    def t_max(self) -> int:
        return len(self.y) - 1


def _deflated_traces(Y: np.ndarray, lam0: complex | None, r: float, t_max: int):
    """``tr((Y P / r)^t)`` where ``P`` removes the all-ones eigenvector (if ``lam0``)."""
    n = Y.shape[0]
    if lam0 is not None:
        M = (Y - lam0 * np.full((n, n), 1.0 / n)) / r
    else:
        M = Y / r
    out = np.empty(t_max + 1, dtype=M.dtype)
    P = np.eye(n, dtype=M.dtype)
    out[0] = n - (1 if lam0 is not None else 0)
    for t in range(1, t_max + 1):
        P = P @ M
        out[t] = np.trace(P)
    return out


def _raw_traces(Y: np.ndarray, t_max: int):
    out = np.empty(t_max + 1, dtype=Y.dtype)
    P = np.eye(Y.shape[0], dtype=Y.dtype)
    out[0] = Y.shape[0]
    for t in range(1, t_max + 1):
        P = P @ Y
        out[t] = np.trace(P)
    return out


def _require_nonbipartite(g: RegularGraph):
    if is_bipartite(g):
        raise BipartiteInput("the trace formula excludes bipartite graphs")


def y_from_spectrum(eigenvalues, d: int, w: float, V: int, t_max: int,
                    trivial: bool = True) -> np.ndarray:
    """Eigenvalue side of the ``y_t`` identity.

    ``(1/V) z^t + ((d-2)/2) z^t (1 + (-1)^t) + (2/V) sum_k T_t(mu_k / 2r)``
    with ``z = sqrt(w / (d - w))``. With ``trivial=True`` the first
    eigenvalue is the trivial one and is replaced by the ``z^t / V`` term;
    otherwise (magnetic case) all eigenvalues enter the Chebyshev sum.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    r = band_radius(d, w)
    z = np.sqrt(w / (d - w))
    t = np.arange(t_max + 1)
    zt = z ** t
    rest = ev[1:] if trivial else ev
    cheb = chebyshev_table(t_max, rest / (2 * r)).sum(axis=1)
    y = (d - 2) / 2 * zt * (1 + (-1.0) ** t) + 2.0 / V * cheb
    if trivial:
        y = y + zt / V
    return y


def compute_y(g: RegularGraph, w: float = 1.0, t_max: int = 20, eigen_side: bool = True
              ) -> TraceCoefficients:
    """``y_t(w) = (tr Y(w)^t - (d - w)^t) / (V r^t)`` from matrix powers.

    The trivial eigenvalue ``d - w`` of ``Y(w)`` (the all-ones vector is a
    left and right eigenvector) is projected out before taking powers so
    that large ``t`` does not lose precision to cancellation.
    """
    _require_nonbipartite(g)
    d, V = g.degree, g.n_vertices
    r = band_radius(d, w)
    Y = edge_Y(g, w).astype(float)
    y = _deflated_traces(Y, d - w, r, t_max).real / V
    raw = _raw_traces(Y, t_max).real
    eig = None
    if eigen_side:
        eig = y_from_spectrum(np.linalg.eigvalsh(adjacency(g).astype(float)), d, w, V, t_max)
    return TraceCoefficients(w, d, V, y, raw, False, eig)


def compute_y_magnetic(g: RegularGraph, decoration: MagneticDecoration, w: float = 1.0,
                       t_max: int = 20, eigen_side: bool = True) -> TraceCoefficients:
    """Magnetic ``y_t = tr (Y^M(w))^t / (V r^t)``; there is no trivial eigenvalue to remove."""
    d, V = g.degree, g.n_vertices
    r = band_radius(d, w)
    Y = edge_Y(g, w, decoration)
    y = _deflated_traces(Y, None, r, t_max).real / V
    raw = _raw_traces(Y, t_max)
    eig = None
    if eigen_side:
        ev = np.linalg.eigvalsh(adjacency(g, decoration))
        eig = y_from_spectrum(ev, d, w, V, t_max, trivial=False)
    return TraceCoefficients(w, d, V, y, raw, True, eig)


def verify_ywt_identity(g: RegularGraph, w: float = 1.0, t_max: int = 20,
                        decoration: MagneticDecoration | None = None) -> dict:
    """Compare matrix-side and eigenvalue-side ``y_t`` for ``t <= t_max``.

    Residuals are ``|difference| / max(1, |y_t|)``; the eigenvalue side
    uses the continued Chebyshev polynomials for eigenvalues outside the band.
    """
    if decoration is None:
        tc = compute_y(g, w, t_max)
    else:
        tc = compute_y_magnetic(g, decoration, w, t_max)
    diff = np.abs(tc.y - tc.eigen_side) / np.maximum(1.0, np.abs(tc.y))
    return {"w": float(w), "t_max": int(t_max), "max_residual": float(diff.max()),
            "residuals": diff.tolist(), "y_matrix": tc.y.tolist(), "y_eigen": tc.eigen_side.tolist()}


def y_bound(d: int, V: int) -> float:
    """Uniform bound on ``|y_t(w)|`` for Ramanujan graphs and ``1 <= w <= (d-1)/2``."""
    return 1.0 / V + (d - 2) + 2


# -- closed-form parts ------------------------------------------------------

def _check_band(mu, d, w):
    mu = np.asarray(mu, dtype=float)
    r = band_radius(d, w)
    if np.any(np.abs(mu) >= 2 * r):
        raise OutOfSupport(f"|mu| must be below 2 sqrt(w (d - w)) = {2 * r:.6g}")
    if np.any(np.abs(np.abs(mu) - d) == 0):
        raise PoleAtD("mu = +-d is a pole")
    return mu, r


def rho_smooth(mu, d: int, w: float = 1.0) -> np.ndarray:
    """Smooth part of the density; equals the Kesten-McKay density at ``w = 1``."""
    mu, r = _check_band(mu, d, w)
    c = w * (d - w)
    bracket = (1 - (d - 2 * w) * (d - 2) / (d * d - mu * mu)
               + (w - 1) ** 2 * (mu * mu - 2 * c) / (w * w * (d - w) ** 2))
    return d / (2 * np.pi) / np.sqrt(4 * c - mu * mu) * bracket


def rho_corr(mu, d: int, w: float = 1.0) -> np.ndarray:
    """Coefficient of ``1/V`` in the density (simple graphs)."""
    mu, r = _check_band(mu, d, w)
    c = w * (d - w)
    bracket = 1 + mu / w + (mu * mu - 2 * c) / (w * w) + (d - 2 * w) / (d - mu)
    return -bracket / (2 * np.pi * np.sqrt(4 * c - mu * mu))


def rho_corr_multigraph(mu, d: int, w: float = 1.0) -> np.ndarray:
    """Coefficient of ``1/V`` when ``y_1`` and ``y_2`` are kept in the oscillatory sum."""
    mu, r = _check_band(mu, d, w)
    return -(1 + (d - 2 * w) / (d - mu)) / (2 * np.pi * np.sqrt(4 * w * (d - w) - mu * mu))


def _smooth_multigraph(mu, d, w):
    mu, r = _check_band(mu, d, w)
    x = mu / (2 * r)
    t2 = d * (1 - w) ** 2 / (w * (d - w)) * (2 * x * x - 1)
    return rho_smooth(mu, d, w) - t2 / (np.pi * np.sqrt(4 * r * r - mu * mu))


def rho_osc(mu, d: int, w: float, y, t_min: int = 3, t_max: int | None = None) -> np.ndarray:
    """Truncated oscillatory series ``(1/pi) sum_t y_t T_t(x) / sqrt(4 r^2 - mu^2)``."""
    mu, r = _check_band(mu, d, w)
    y = np.asarray(y)
    t_max = len(y) - 1 if t_max is None else t_max
    if t_max < t_min:
        return np.zeros_like(mu)
    T = chebyshev_table(t_max, mu / (2 * r))
    s = np.tensordot(y[t_min:t_max + 1], T[t_min:], axes=(0, 0))
    return s / (np.pi * np.sqrt(4 * r * r - mu * mu))


@dataclass
class TraceFormulaDecomposition:
    """Smooth, truncated oscillatory and ``(1/V)``-scaled correction parts on a grid."""

    smooth: DensityCurve
    osc: DensityCurve
    corr: DensityCurve
    w: float
    t_max: int
    support: float
    target: DensityCurve | None = None
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return self.smooth.grid

    @property
    def total(self) -> np.ndarray:
        return self.smooth.values + self.osc.values + self.corr.values


def chebyshev_projection(eigenvalues, d: int, w: float, t_max: int, grid, V: int | None = None
                         ) -> np.ndarray:
    """Density of the nontrivial eigenvalues smoothed at Chebyshev order ``t_max``.

    ``(1/(pi sqrt(4r^2 - mu^2))) sum_t T_t(x) c_t (2/V) sum_k T_t(x_k)``
    with ``c_0 = 1/2``. This is the resolution-matched comparison target for
    a reconstruction truncated at the same order.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))[::-1][1:]
    V = len(ev) + 1 if V is None else V
    grid, r = _check_band(grid, d, w)
    moments = 2.0 / V * chebyshev_table(t_max, ev / (2 * r)).sum(axis=1)
    moments[0] /= 2
    T = chebyshev_table(t_max, grid / (2 * r))
    return np.tensordot(moments, T, axes=(0, 0)) / (np.pi * np.sqrt(4 * r * r - grid * grid))


def reconstruct_density(g: RegularGraph, w: float = 1.0, t_max: int = 60, grid=None,
                        n_grid: int = 2000, decoration: MagneticDecoration | None = None,
                        coefficients: TraceCoefficients | None = None
                        ) -> TraceFormulaDecomposition:
    """Evaluate the three parts of the trace formula on a grid inside the band.

    Multigraphs keep ``y_1`` and ``y_2`` in the oscillatory sum (loops and
    parallel edges make them graph dependent) and adjust the smooth and
    correction parts accordingly. Magnetic graphs have no trivial
    eigenvalue, so the correction part vanishes.
    """
    d, V = g.degree, g.n_vertices
    r = band_radius(d, w)
    if grid is None:
        u = (np.arange(n_grid) + 0.5) / n_grid
        grid = 2 * r * np.cos(np.pi * (1 - u))
    grid, _ = _check_band(grid, d, w)
    if coefficients is None:
        if decoration is None:
            coefficients = compute_y(g, w, t_max, eigen_side=False)
        else:
            coefficients = compute_y_magnetic(g, decoration, w, t_max, eigen_side=False)
    y = coefficients.y

    if decoration is not None:
        smooth = rho_smooth(grid, d, w)
        corr = np.zeros_like(grid)
        t_min = 3
    elif g.multigraph:
        smooth = _smooth_multigraph(grid, d, w)
        corr = rho_corr_multigraph(grid, d, w) / V
        t_min = 1
    else:
        smooth = rho_smooth(grid, d, w)
        corr = rho_corr(grid, d, w) / V
        t_min = 3
    osc = rho_osc(grid, d, w, y, t_min=t_min, t_max=t_max)

    target = None
    if decoration is None:
        ev = np.linalg.eigvalsh(adjacency(g).astype(float))
        target = DensityCurve(grid, chebyshev_projection(ev, d, w, t_max, grid, V),
                              f"coarse-empirical(t_max={t_max})")
    tag = f"trace-formula(w={w})"
    return TraceFormulaDecomposition(
        DensityCurve(grid, smooth, tag + ":smooth"),
        DensityCurve(grid, osc, tag + ":osc", {"t_min": t_min, "t_max": t_max}),
        DensityCurve(grid, corr, tag + ":corr/V"),
        w, t_max, 2 * r, target,
        {"multigraph": g.multigraph, "magnetic": decoration is not None})


def integrate_over_band(func, d: int, w: float, n_nodes: int = 4000, weight=None) -> float:
    """``int func(mu) weight(mu) dmu`` over the band for densities with inverse-sqrt edges.

    Substitutes ``mu = 2 r cos(theta)`` and uses the midpoint rule in
    ``theta``, which is spectrally accurate for ``func(mu) sqrt(4r^2 - mu^2)``
    smooth on the closed band.
    """
    r = band_radius(d, w)
    theta = (np.arange(n_nodes) + 0.5) * np.pi / n_nodes
    mu = 2 * r * np.cos(theta)
    vals = np.asarray(func(mu)) * 2 * r * np.sin(theta)
    if weight is not None:
        vals = vals * weight(mu)
    return float(vals.sum() * np.pi / n_nodes)

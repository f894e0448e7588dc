"""Unitary edge operators ``U(mu, phi) = alpha B - beta J`` and densities built from them.

With ``beta = exp(i phi)`` and ``alpha = (1 - exp(2 i phi)) / (mu - d exp(i phi))``
the operator is unitary for real ``mu`` and ``phi`` not a multiple of ``pi``,
and ``det(I - U)`` is proportional to the characteristic polynomial of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .exceptions import BranchJump, DegeneratePhase, NoRootInBranch, Pole
from .graph_model import RegularGraph
from .operators import adjacency, edge_B, edge_J
from .spectral import DensityCurve, kesten_mckay, kesten_mckay_cdf, km_edge

__all__ = [
    "UnitaryParams",
    "PhaseFunction",
    "build_U",
    "patched_U",
    "unitarity_defect",
    "secular_sides",
    "secular_residual",
    "trU_from_walks",
    "trU_closed_form",
    "trU_minus_half_pi",
    "smooth_density_const_phi",
    "smooth_density",
    "ode_lhs_km",
    "nkm_lhs",
    "nkm_partials",
    "large_d_phi_km",
    "solve_phi_km",
    "density_from_secular",
    "backscatter_orbit_density",
    "single_t2_density",
]

_PHASE_TOL = 1e-14


@dataclass(frozen=True)
class UnitaryParams:
    """``(mu, phi)`` with the derived coefficients ``alpha`` and ``beta``."""

    mu: complex
    phi: float
    d: int

    def __post_init__(self):
        if abs(np.sin(self.phi)) < _PHASE_TOL:
            raise DegeneratePhase(f"phi = {self.phi} is a multiple of pi")
        if abs(self.mu - self.d * np.exp(1j * self.phi)) < _PHASE_TOL:
            raise Pole("mu = d exp(i phi)")

    @property
    def beta(self) -> complex:
        return complex(np.exp(1j * self.phi))

    @property
    def alpha(self) -> complex:
        return complex((1 - np.exp(2j * self.phi)) / (self.mu - self.d * np.exp(1j * self.phi)))

    def unitarity_conditions(self) -> tuple[float, float]:
        """Residuals of ``|beta|^2 = 1`` and ``d |alpha|^2 = alpha conj(beta) + conj(alpha) beta``."""
        a, b = self.alpha, self.beta
        return (abs(abs(b) ** 2 - 1),
                abs(self.d * abs(a) ** 2 - (a * np.conj(b) + np.conj(a) * b)))

    def spectral_relation(self) -> float:
        """Residual of ``alpha mu = 1 + d alpha beta - beta^2``."""
        a, b = self.alpha, self.beta
        return abs(a * self.mu - (1 + self.d * a * b - b * b))


def build_U(g: RegularGraph, mu: complex, phi: float) -> np.ndarray:
    """The ``2E x 2E`` operator ``alpha B - beta J``."""
    p = UnitaryParams(mu, phi, g.degree)
    return p.alpha * edge_B(g) - p.beta * edge_J(g)


def patched_U(g: RegularGraph, mu: float, phi: float) -> np.ndarray:
    """``U(mu, phi)``, continued by ``(-1)^k J`` where ``phi = k pi``."""
    k = np.rint(phi / np.pi)
    if abs(phi - k * np.pi) < _PHASE_TOL:
        return (-1.0) ** int(k) * edge_J(g).astype(float)
    return build_U(g, mu, phi)


def unitarity_defect(U: np.ndarray) -> float:
    """``max |U^dagger U - I|``."""
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())


def secular_sides(g: RegularGraph, mu: float, phi: float) -> tuple[complex, complex]:
    """``det(I - U)`` and ``(1 - e^{2i phi})^E (mu - d e^{i phi})^{-V} det(mu I - A)``."""
    U = build_U(g, mu, phi)
    lhs = np.linalg.det(np.eye(U.shape[0]) - U)
    V, E, d = g.n_vertices, g.n_edges, g.degree
    Z = np.linalg.det(mu * np.eye(V) - adjacency(g))
    rhs = (1 - np.exp(2j * phi)) ** E * (mu - d * np.exp(1j * phi)) ** (-V) * Z
    return complex(lhs), complex(rhs)


def secular_residual(g: RegularGraph, mu: float, phi: float) -> float:
    lhs, rhs = secular_sides(g, mu, phi)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


# -- periodic-walk expansions of tr U^t --------------------------------------

def trU_from_walks(mu: complex, phi: float, t: int, table, d: int) -> complex:
    """``sum_g N(t; g) alpha^(t-g) (alpha - beta)^g``.

    A step that continues forward carries ``alpha``; a back-scatter carries
    ``alpha - beta``.
    """
    p = UnitaryParams(mu, phi, d)
    a, b = p.alpha, p.beta
    return complex(sum(table[t, gb] * a ** (t - gb) * (a - b) ** gb for gb in range(t + 1)))


def trU_closed_form(mu: float, phi: float, t: int, table, d: int) -> complex:
    """Polar form of :func:`trU_from_walks` for real ``mu``.

    ``alpha = (2|sin phi| / R) exp(i (phi + arctan((d cos phi - mu) / (d sin phi))))``
    with ``R^2 = mu^2 + d^2 - 2 mu d cos phi``, and
    ``(alpha - beta) / alpha = a~ exp(i (pi - arctan((d cos phi - mu) / ((d-2) sin phi))))``
    with ``a~ = sqrt((d-2)^2 sin^2 phi + (d cos phi - mu)^2) / (2 |sin phi|)``.
    """
    UnitaryParams(mu, phi, d)
    s, c = np.sin(phi), np.cos(phi)
    R = np.sqrt(mu * mu + d * d - 2 * mu * d * c)
    mod_a = 2 * abs(s) / R
    arg_a = phi + np.arctan((d * c - mu) / (d * s))
    a_tilde = np.sqrt((d - 2) ** 2 * s * s + (d * c - mu) ** 2) / (2 * abs(s))
    arg_r = np.pi - np.arctan((d * c - mu) / ((d - 2) * s))
    orbit_sum = sum(table[t, gb] * a_tilde ** gb * np.exp(1j * gb * arg_r) for gb in range(t + 1))
    return complex(mod_a ** t * np.exp(1j * t * arg_a) * orbit_sum)


def trU_minus_half_pi(mu: float, t: int, table, d: int) -> complex:
    """:func:`trU_closed_form` at ``phi = -pi/2``.

    ``2^t (d^2 + mu^2)^(-t/2) e^{i t (arctan(mu/d) - pi/2)}
    sum_g N(t; g) ((d-2)^2 + mu^2)^(g/2) 2^-g e^{i g (pi - arctan(mu/(d-2)))}``
    """
    pref = 2.0 ** t / (d * d + mu * mu) ** (t / 2) * np.exp(1j * t * (np.arctan(mu / d) - np.pi / 2))
    amp = np.sqrt((d - 2) ** 2 + mu * mu) / 2
    ang = np.pi - np.arctan(mu / (d - 2))
    return complex(pref * sum(table[t, gb] * amp ** gb * np.exp(1j * gb * ang)
                              for gb in range(t + 1)))


# -- smooth densities ---------------------------------------------------------

def smooth_density_const_phi(mu, d: int, phi: float) -> np.ndarray:
    """``-(1/(pi d)) sin(phi) / ((mu/d)^2 + 1 - 2 (mu/d) cos(phi))``."""
    x = np.asarray(mu, dtype=float) / d
    return -np.sin(phi) / (np.pi * d * (x * x + 1 - 2 * x * np.cos(phi)))


def ode_lhs_km(mu, phi, dphi, d: int) -> np.ndarray:
    """``(d / (2 pi Q)) (2 sin phi - phi' (mu^2 + d(d-2) - 2(d-1) mu cos phi))``.

    ``Q = mu^2 + d^2 - 2 mu d cos phi``. Setting this equal to the
    Kesten-McKay density defines the Kesten-McKay phase function.
    """
    mu, phi, dphi = (np.asarray(v, dtype=float) for v in (mu, phi, dphi))
    Q = mu * mu + d * d - 2 * mu * d * np.cos(phi)
    return d / (2 * np.pi * Q) * (2 * np.sin(phi)
                                  - dphi * (mu * mu + d * (d - 2) - 2 * (d - 1) * mu * np.cos(phi)))


def smooth_density(mu, d: int, phi, dphi) -> np.ndarray:
    """Smooth part of the secular density for a phase ``phi(mu)`` with slope ``dphi``.

    Equals ``-ode_lhs_km``; for constant phase it reduces to
    :func:`smooth_density_const_phi`.
    """
    return -ode_lhs_km(mu, phi, dphi, d)


def nkm_lhs(phi, mu, d: int, ratio: float) -> np.ndarray:
    """Phase of the smooth prefactor divided by ``pi V``, shifted by the branch ratio ``2k/V``.

    The arccos term with its sign and the ``+2`` offset (taken when
    ``mu sin(phi) > 0``) combine into ``2 - arg(mu e^{i phi} - d) / pi`` with
    the argument read in ``[0, 2 pi)``. Since ``|mu| < d`` the real part of
    ``mu e^{i phi} - d`` is negative, so this form is smooth where the two
    signs meet and avoids the square-root loss of ``arccos`` near ``-1``.
    """
    phi = np.asarray(phi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    theta = np.mod(np.arctan2(mu * np.sin(phi), mu * np.cos(phi) - d), 2 * np.pi)
    return ratio + d / 2 * (0.5 - phi / np.pi) + phi / np.pi + 2.0 - theta / np.pi


def nkm_partials(phi, mu, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of :func:`nkm_lhs` in ``phi`` and in ``mu``."""
    phi = np.asarray(phi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    e = np.exp(1j * phi)
    z = mu * e - d
    f_phi = (1 - d / 2) / np.pi - (1j * mu * e / z).imag / np.pi
    f_mu = -(e / z).imag / np.pi
    return f_phi, f_mu


def large_d_phi_km(mu, d: int, ratio: float) -> np.ndarray:
    """First-order large-d approximation of the Kesten-McKay phase on branch ``ratio``."""
    mu = np.asarray(mu, dtype=float)
    q = d - 1.0
    C = np.pi / 2 + 2 * np.pi / (d - 2) * (1 + ratio)
    return (C - mu * np.sqrt(np.clip(4 * q - mu * mu, 0, None)) / (2 * q * q)
            - 2 / q * np.arcsin(np.clip(mu / (2 * np.sqrt(q)), -1, 1)))


@dataclass
class PhaseFunction:
    """Kesten-McKay phase ``phi(mu)`` on one branch, sampled on a grid.

    ``phi`` solves the counting-function equation; its slope ``dphi`` comes
    from implicit differentiation of that equation. The operator whose
    smooth density is Kesten-McKay uses phase ``-phi`` (see
    :meth:`operator_phase`).
    """

    d: int
    ratio: float
    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    residuals: np.ndarray
    k: int | None = None
    V: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._spline = CubicSpline(self.grid, self.phi)
        self._dspline = CubicSpline(self.grid, self.dphi)

    def __call__(self, mu):
        return self._spline(mu)

    def derivative(self, mu):
        return self._dspline(mu)

    def operator_phase(self, mu):
        return -self._spline(mu)

    def operator_phase_derivative(self, mu):
        return -self._dspline(mu)

    @property
    def max_residual(self) -> float:
        return float(np.abs(self.residuals).max())

    def ode_residual(self, finite_difference: bool = True) -> np.ndarray:
        """``ode_lhs_km - rho_KM`` on the grid, with the slope from finite differences or implicit."""
        slope = np.gradient(self.phi, self.grid) if finite_difference else self.dphi
        return ode_lhs_km(self.grid, self.phi, slope, self.d) - kesten_mckay(self.grid, self.d)


def _partial(f: Callable, x: float, h: float = 1e-6) -> float:
    return (f(x + h) - f(x - h)) / (2 * h)


def solve_phi_km(d: int, mu_grid, ratio: float | None = None, k: int | None = None,
                 V: int | None = None, phi0: float | None = None, window: float = 0.25,
                 jump_tol: float = 0.2, scan: tuple[float, float] = (-4 * np.pi, 4 * np.pi)
                 ) -> PhaseFunction:
    """Solve the counting-function equation for ``phi`` at every grid point.

    The branch is fixed by ``ratio = 2k/V`` (or by ``k`` and ``V``). At the
    first grid point all roots in ``scan`` are bracketed and the one nearest
    ``phi0`` (default: the large-d approximation) is taken; each later point
    is solved by Brent's method inside ``[prev - window, prev + window]``.

    Raises
    ------
    NoRootInBranch
        No sign change in the search window.
    BranchJump
        Consecutive solutions differ by more than ``jump_tol``.
    """
    if ratio is None:
        if k is None or V is None:
            raise ValueError("give ratio or both k and V")
        ratio = 2.0 * k / V
    mu_grid = np.asarray(mu_grid, dtype=float)
    a = km_edge(d)
    if np.any(np.abs(mu_grid) > a):
        raise ValueError("grid must lie inside the Kesten-McKay support")
    if mu_grid.size < 2 or np.any(np.diff(mu_grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")

    def f(phi, mu, target):
        return float(nkm_lhs(phi, mu, d, ratio)) - target

    targets = kesten_mckay_cdf(mu_grid, d)
    phis = np.empty_like(mu_grid)
    prev = None
    for i, (mu, N) in enumerate(zip(mu_grid, targets)):
        if prev is None:
            guess = float(large_d_phi_km(mu, d, ratio)) if phi0 is None else phi0
            lo, hi = scan
            n = int((hi - lo) / 0.01) + 1
        else:
            guess = prev
            lo, hi = prev - window, prev + window
            n = 101
        ps = np.linspace(lo, hi, n)
        fs = nkm_lhs(ps, mu, d, ratio) - N
        idx = np.flatnonzero(np.sign(fs[:-1]) != np.sign(fs[1:]))
        if idx.size == 0:
            raise NoRootInBranch(f"no root near phi={guess:.4f} at mu={mu:.6g}")
        j = min(idx, key=lambda j: abs(0.5 * (ps[j] + ps[j + 1]) - guess))
        root = brentq(f, ps[j], ps[j + 1], args=(mu, N), xtol=1e-15, maxiter=200)
        if prev is not None and abs(root - prev) > jump_tol:
            raise BranchJump(f"phase jumped by {root - prev:.3g} at mu={mu:.6g}")
        phis[i] = root
        prev = root

    resid = nkm_lhs(phis, mu_grid, d, ratio) - targets
    rho = kesten_mckay(mu_grid, d)
    dphi = np.empty_like(phis)
    f_phi, f_mu = nkm_partials(phis, mu_grid, d)
    dphi[:] = (rho - f_mu) / f_phi
    jumps = np.abs(np.diff(phis))
    crossings = np.flatnonzero(np.diff(np.floor(phis / np.pi)) != 0)
    meta = {"max_step": float(jumps.max(initial=0.0)),
            "pi_crossings_at_mu": mu_grid[crossings + 1].tolist(),
            "sign_convention": "minus arccos with +2 when mu sin(phi) > 0, via the argument form"}
    return PhaseFunction(d, float(ratio), mu_grid, phis, dphi, resid, k, V, meta)


# -- densities from the secular function -------------------------------------

def _phase_and_slope(phi_spec, mu):
    if isinstance(phi_spec, PhaseFunction):
        return float(phi_spec.operator_phase(mu)), float(phi_spec.operator_phase_derivative(mu))
    if callable(phi_spec):
        return float(phi_spec(mu)), float(_partial(phi_spec, mu))
    return float(phi_spec), 0.0


def _dU(d: int, mu: complex, phi: float, dphi: float):
    """``alpha``, ``beta`` and their total ``mu`` derivatives."""
    e1, e2 = np.exp(1j * phi), np.exp(2j * phi)
    den = mu - d * e1
    alpha = (1 - e2) / den
    beta = e1
    da_dmu = -alpha / den
    da_dphi = (-2j * e2 * den + (1 - e2) * 1j * d * e1) / den ** 2
    return alpha, beta, da_dmu + da_dphi * dphi, 1j * beta * dphi


def density_from_secular(g: RegularGraph, mu_grid, phi_spec=-np.pi / 2, eps: float = 0.05,
                         t_max: int = 40, method: str = "series") -> DensityCurve:
    """Smooth term plus the ``eps``-regularized fluctuating term on a grid.

    ``phi_spec`` is a constant phase, a callable ``phi(mu)``, or a
    :class:`PhaseFunction` (whose operator phase is used).

    ``method="series"`` truncates ``(1/(V pi)) Im d/dmu sum_t tr U^t / t`` at
    ``t_max``; it converges when ``sin(phi) < 0``. ``method="logdet"`` uses
    the resummed ``-(1/(V pi)) Im d/dmu log det(I - U)``, valid for either
    sign. The ``mu`` derivative is taken analytically.
    """
    if method not in ("series", "logdet"):
        raise ValueError("method must be 'series' or 'logdet'")
    mu_grid = np.asarray(mu_grid, dtype=float)
    B = edge_B(g).astype(complex)
    J = edge_J(g).astype(complex)
    n, V, d = g.n_directed, g.n_vertices, g.degree
    I = np.eye(n)
    smooth = np.empty_like(mu_grid)
    fluct = np.empty_like(mu_grid)
    for i, mu in enumerate(mu_grid):
        phi, dphi = _phase_and_slope(phi_spec, mu)
        UnitaryParams(mu, phi, d)
        smooth[i] = smooth_density(mu, d, phi, dphi)
        alpha, beta, da, db = _dU(d, mu + 1j * eps, phi, dphi)
        U = alpha * B - beta * J
        dU = da * B - db * J
        if method == "logdet":
            val = np.trace(np.linalg.solve(I - U, dU))
        else:
            val = 0j
            P = np.eye(n, dtype=complex)
            for _ in range(t_max):
                val += np.trace(P @ dU)
                P = P @ U
        fluct[i] = val.imag / (V * np.pi)
    curve = DensityCurve(mu_grid, smooth + fluct, "unitary",
                         {"eps": eps, "t_max": t_max, "method": method})
    curve.normalization["smooth"] = smooth
    curve.normalization["fluctuating"] = fluct
    return curve


def backscatter_orbit_density(mu, d: int, phi: float = -np.pi / 2, edges_per_vertex=None):
    """Fluctuating-term contribution of all repetitions of back-and-forth orbits.

    There are ``2E`` such orbits of every even length ``2m``, each with
    amplitude ``(alpha - beta)^(2m)``, so they sum to
    ``-(E / (V pi)) Im d/dmu log(1 - (alpha - beta)^2)``.
    """
    mu = np.asarray(mu, dtype=complex)
    ratio = d / 2 if edges_per_vertex is None else edges_per_vertex
    alpha, beta, da, db = _dU(d, mu, phi, 0.0)
    r = alpha - beta
    deriv = -2 * r * (da - db) / (1 - r * r)
    return -ratio / np.pi * deriv.imag


def single_t2_density(mu, d: int, phi: float = -np.pi / 2, edges_per_vertex=None):
    """The ``t = 2`` term alone: ``(1/(V pi)) Im d/dmu tr U^2 / 2`` with ``tr U^2 = 2E (alpha-beta)^2``."""
    mu = np.asarray(mu, dtype=complex)
    ratio = d / 2 if edges_per_vertex is None else edges_per_vertex
    alpha, beta, da, db = _dU(d, mu, phi, 0.0)
    r = alpha - beta
    return ratio / np.pi * (2 * r * (da - db)).imag

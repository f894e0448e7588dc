"""Edge-space versus vertex-space determinant identity and its generalizations.

For a graph with adjacency ``A`` and degree matrix ``D``::

    det(I - s (B - w J)) = (1 - w^2 s^2)^(E - V) det(I + w s^2 (D - w I) - s A)

The magnetic, multigraph and weighted variants swap in the decorated
``A``, ``B`` and ``D`` while ``J`` stays the plain reversal. Both sides are
evaluated either in floating point (LU determinants) or exactly at rational
points (fraction-free integer elimination).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DecorationMismatch, GraphError, PolePoint
from .graph_model import MagneticDecoration, RegularGraph, WeightDecoration
from .operators import adjacency, degree_matrix, edge_B, edge_J

__all__ = [
    "IdentityReport",
    "VARIANTS",
    "check_identity",
    "identity_sides",
    "exact_sides",
    "bareiss_det",
    "integer_char_poly",
    "char_poly_edge",
    "char_poly_vertex_side",
    "random_points",
]

VARIANTS = ("regular", "general", "magnetic", "multigraph", "weighted")


@dataclass
class IdentityReport:
    """Outcome of checking the identity at a list of ``(s, w)`` points.

    ``residuals`` are ``|LHS - RHS| / max(|LHS|, |RHS|, 1)`` per point.
    ``exact_match`` is None when no exact evaluation was attempted.
    """

    graph_id: str
    variant: str
    points: list
    residuals: np.ndarray = field(repr=False)
    max_abs_residual: float
    exact_match: bool | None = None

    def to_dict(self) -> dict:
        return {
            "graph_id": self.graph_id,
            "variant": self.variant,
            "n_points": len(self.points),
            "max_abs_residual": float(self.max_abs_residual),
            "exact_match": self.exact_match,
        }


def _matrices(g: RegularGraph, variant: str, decoration):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if variant == "magnetic" and not isinstance(decoration, MagneticDecoration):
        raise DecorationMismatch("magnetic variant needs a MagneticDecoration")
    if variant == "weighted" and not isinstance(decoration, WeightDecoration):
        raise DecorationMismatch("weighted variant needs a WeightDecoration")
    if variant in ("regular", "general", "multigraph"):
        decoration = None
    if variant == "regular" and not g.is_regular:
        raise GraphError("regular variant needs a regular graph")
    if variant == "multigraph" and not g.multigraph:
        raise GraphError("multigraph variant needs a graph built in multigraph mode")
    A = adjacency(g, decoration)
    B = edge_B(g, decoration)
    D = degree_matrix(g, decoration if variant == "weighted" else None)
    return A, B, D


def _check_pole(s, w):
    if s * s * w * w == 1:
        raise PolePoint(f"w^2 s^2 = 1 at s={s}, w={w}")


def identity_sides(g: RegularGraph, s: complex, w: complex, variant: str = "regular",
                   decoration=None, _mats=None) -> tuple[complex, complex]:
    """Floating-point values of (LHS, RHS) at one point."""
    _check_pole(s, w)
    A, B, D = _mats if _mats is not None else _matrices(g, variant, decoration)
    V, E = g.n_vertices, g.n_edges
    J = edge_J(g)
    lhs = np.linalg.det(np.eye(2 * E) - s * (B - w * J))
    if variant == "regular":
        inner = (1 + w * (g.degree - w) * s * s) * np.eye(V) - s * A
    else:
        inner = np.eye(V) + w * s * s * (D - w * np.eye(V)) - s * A
    rhs = (1 - w * w * s * s) ** (E - V) * np.linalg.det(inner)
    return complex(lhs), complex(rhs)


def bareiss_det(M) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    M = np.array(M, dtype=object)
    n = M.shape[0]
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k, k] == 0:
            nz = np.flatnonzero(M[k + 1:, k] != 0)
            if nz.size == 0:
                return 0
            i = k + 1 + nz[0]
            M[[k, i]] = M[[i, k]]
            sign = -sign
        M[k + 1:, k + 1:] = (M[k + 1:, k + 1:] * M[k, k]
                             - np.outer(M[k + 1:, k], M[k, k + 1:])) // prev
        prev = M[k, k]
    return sign * M[n - 1, n - 1]


def exact_sides(g: RegularGraph, s, w, variant: str = "regular") -> tuple[Fraction, Fraction]:
    """Exact (LHS, RHS) at rational ``s``, ``w`` for the integer variants."""
    if variant not in ("regular", "general", "multigraph"):
        raise ValueError("exact evaluation is available for integer variants only")
    s, w = Fraction(s), Fraction(w)
    _check_pole(s, w)
    A, B, D = _matrices(g, variant, None)
    V, E = g.n_vertices, g.n_edges
    J = edge_J(g)
    p, q = s.numerator, s.denominator
    a, b = w.numerator, w.denominator
    # I - s(B - wJ) scaled by q*b
    lhs_int = q * b * np.eye(2 * E, dtype=object) - p * b * B.astype(object) + p * a * J.astype(object)
    lhs = Fraction(bareiss_det(lhs_int), (q * b) ** (2 * E))
    # I + w s^2 (D - wI) - sA scaled by q^2 b^2
    I = np.eye(V, dtype=object)
    rhs_int = (q * q * b * b - a * a * p * p) * I + a * b * p * p * D.astype(object) \
        - p * q * b * b * A.astype(object)
    rhs = (1 - w * w * s * s) ** (E - V) * Fraction(bareiss_det(rhs_int), (q * b) ** (2 * V))
    return lhs, rhs


def check_identity(g: RegularGraph, variant: str = "regular", points: Sequence = (),
                   decoration=None, exact: bool = False, graph_id: str | None = None
                   ) -> IdentityReport:
    """Evaluate both sides at every point and report the worst relative residual.

    With ``exact=True`` (integer variants, rational points) both sides are
    also computed exactly and ``exact_match`` records whether they agree at
    every point.
    """
    points = list(points)
    for s, w in points:
        _check_pole(s, w)
    mats = _matrices(g, variant, decoration)
    res = np.empty(len(points))
    for i, (s, w) in enumerate(points):
        lhs, rhs = identity_sides(g, complex(s), complex(w), variant, decoration, _mats=mats)
        res[i] = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)
    exact_match = None
    if exact:
        exact_match = all(l == r for l, r in (exact_sides(g, s, w, variant) for s, w in points))
    return IdentityReport(graph_id or g.fingerprint(), variant, points, res,
                          float(res.max(initial=0.0)), exact_match)


def random_points(rng: np.random.Generator, n: int, rational: bool = False,
                  scale: float = 0.5) -> list:
    """Random evaluation points away from the pole ``w^2 s^2 = 1``.

    Complex floats by default; small-denominator rationals when
    ``rational=True``.
    """
    pts = []
    while len(pts) < n:
        if rational:
            s = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 12)))
            w = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6)))
        else:
            s = complex(*rng.normal(0, scale, 2))
            w = complex(*rng.normal(0, 1.0, 2))
        if s * s * w * w != 1:
            pts.append((s, w))
    return pts


# -- characteristic polynomials ---------------------------------------------

def integer_char_poly(M) -> list[Fraction]:
    """Coefficients ``c`` with ``det(I - s M) = sum_j c[j] s^j``, exactly.

    ``M`` must hold integers or Fractions. Uses power traces and Newton's
    identities, which is exact over the rationals.
    """
    M = np.array(M, dtype=object)
    n = M.shape[0]
    power_sums = []
    P = np.eye(n, dtype=object)
    for _ in range(n):
        P = P.dot(M)
        power_sums.append(Fraction(np.trace(P)))
    e = [Fraction(1)]
    for k in range(1, n + 1):
        acc = sum(((-1) ** (i - 1)) * e[k - i] * power_sums[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    return [((-1) ** k) * e[k] for k in range(n + 1)]


def _to_exact(x):
    return Fraction(x) if not isinstance(x, Fraction) else x


def char_poly_edge(g: RegularGraph, w=1, exact: bool = True) -> list:
    """Coefficients of ``det(I - s Y(w))`` in increasing powers of ``s``.

    Exact (Fractions) for rational ``w``; otherwise from the eigenvalues.
    """
    B, J = edge_B(g), edge_J(g)
    if exact:
        w = _to_exact(w)
        # b Y(w) is an integer matrix; coefficient k of det(I - s Y) is that of b Y over b^k
        a, b = w.numerator, w.denominator
        M = b * B.astype(object) - a * J.astype(object)
        return [c / b ** k for k, c in enumerate(integer_char_poly(M))]
    ev = np.linalg.eigvals(B - w * J)
    # prod(x - lambda) high-first has the same coefficients as prod(1 - s lambda) low-first
    return list(np.poly(ev))


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_pow(p, k):
    out = [Fraction(1)]
    for _ in range(k):
        out = _poly_mul(out, p)
    return out


def char_poly_vertex_side(g: RegularGraph, w=1) -> list[Fraction]:
    """Exact coefficients in ``s`` of ``(1 - w^2 s^2)^(E-V) det((1 + w(d-w)s^2) I - s A)``.

    Needs a regular graph with ``E >= V``.
    """
    if not g.is_regular:
        raise GraphError("vertex-side polynomial needs a regular graph")
    w = _to_exact(w)
    V, E, d = g.n_vertices, g.n_edges, g.degree
    if E < V:
        raise GraphError("vertex-side polynomial needs E >= V")
    # det(x I - A) = sum_j a_j x^(V-j) with a = coefficients of det(I - s A)
    a = integer_char_poly(adjacency(g))
    c = w * (d - w)
    base = [Fraction(1), Fraction(0), c]  # 1 + c s^2
    det_part = [Fraction(0)] * (2 * V + 1)
    for j, aj in enumerate(a):
        if aj:
            term = _poly_mul(_poly_pow(base, V - j), [Fraction(0)] * j + [aj])
            for i, v in enumerate(term):
                det_part[i] += v
    factor = _poly_pow([Fraction(1), Fraction(0), -w * w], E - V)
    out = _poly_mul(factor, det_part)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out

"""Exact counts of periodic walks by number of back-scatters.

``N(t; g)`` is the number of closed directed-edge sequences ``(e_1, ..., e_t)``
with ``t(e_i) = o(e_{i+1})`` (indices mod ``t``) in which exactly ``g``
consecutive pairs, including the closing pair ``(e_t, e_1)``, are reversals.
Then ``tr Y(w)^t = sum_g N(t; g) (1 - w)^g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from joblib import Parallel, delayed

from .exceptions import BudgetExceeded, GraphError
from .graph_model import RegularGraph
from .operators import edge_B, edge_J

__all__ = [
    "WalkCountTable",
    "enumerate_walks",
    "trY_polynomial",
    "table_from_polynomials",
    "nonbacktracking_traces",
    "n_t1_closed_form",
    "n_t1_from_polynomial",
    "a_l_coefficients",
    "verify_a_l_vanishing",
    "pq_recursion_check",
]

_FLOAT_EXACT = 2 ** 53


@dataclass
class WalkCountTable:
    """Exact ``N(t; g)`` for ``0 <= t <= t_max`` and ``0 <= g <= g_max``."""

    counts: np.ndarray  # object array of Python ints, shape (t_max+1, g_max+1)
    provenance: str
    meta: dict = field(default_factory=dict)

    @property
    def t_max(self) -> int:
        return self.counts.shape[0] - 1

    @property
    def g_max(self) -> int:
        return self.counts.shape[1] - 1

    def __getitem__(self, key):
        t, g = key
        if t > self.t_max:
            raise KeyError(f"t={t} beyond table t_max={self.t_max}")
        return int(self.counts[t, g]) if g <= self.g_max else 0

    def row(self, t: int) -> list[int]:
        return [int(c) for c in self.counts[t]]

    def totals(self) -> list[int]:
        return [int(sum(self.counts[t])) for t in range(self.t_max + 1)]

    def to_dict(self) -> dict:
        return {str(t): {str(g): int(c) for g, c in enumerate(self.counts[t]) if c}
                for t in range(1, self.t_max + 1)}

    def equals(self, other: "WalkCountTable") -> bool:
        t = min(self.t_max, other.t_max)
        g = min(self.g_max, other.g_max)
        return all(self[i, j] == other[i, j] for i in range(1, t + 1) for j in range(g + 1))


def _successors(g: RegularGraph):
    by_origin = [[] for _ in range(g.n_vertices)]
    for e, o in enumerate(g.origin):
        by_origin[o].append(e)
    return [tuple(by_origin[t]) for t in g.terminus]


def _enumerate_from(start: int, succ, t_max: int) -> np.ndarray:
    counts = np.zeros((t_max + 1, t_max + 1), dtype=np.int64)
    closers = frozenset(e for e in range(len(succ)) if start in succ[e])

    def dfs(e: int, depth: int, bs: int):
        # walk so far has ``depth`` edges ending at ``e``
        if e in closers:
            counts[depth, bs + (start == (e ^ 1))] += 1
        if depth == t_max:
            return
        rev = e ^ 1
        for nxt in succ[e]:
            dfs(nxt, depth + 1, bs + (nxt == rev))

    dfs(start, 1, 0)
    return counts


def enumerate_walks(g: RegularGraph, t_max: int, budget: float = 5e7, n_jobs: int = 1
                    ) -> WalkCountTable:
    """Brute-force depth-first enumeration of closed directed-edge walks.

    The cost is about ``2E d^(t_max - 1)`` visited prefixes; ``BudgetExceeded``
    is raised when that exceeds ``budget``.
    """
    d = int(g.degrees.max(initial=0))
    cost = g.n_directed * float(max(d, 1)) ** max(t_max - 1, 0)
    if cost > budget:
        raise BudgetExceeded(f"enumeration would visit ~{cost:.3g} prefixes (budget {budget:.3g})")
    succ = _successors(g)
    starts = range(g.n_directed)
    if n_jobs == 1:
        parts = [_enumerate_from(s, succ, t_max) for s in starts]
    else:
        parts = Parallel(n_jobs=n_jobs)(delayed(_enumerate_from)(s, succ, t_max) for s in starts)
    total = np.zeros((t_max + 1, t_max + 1), dtype=object)
    for p in parts:
        total += p.astype(object)
    total[0, 0] = 0
    return WalkCountTable(total, "enumeration", {"t_max": t_max})


def _matmul_exact(X: np.ndarray, Y: np.ndarray, use_float: bool) -> np.ndarray:
    if use_float:
        return np.rint(X.astype(float) @ Y.astype(float)).astype(np.int64)
    return X.astype(object).dot(Y.astype(object))


def trY_polynomial(g: RegularGraph, t_max: int, max_directed: int = 200) -> list[list[int]]:
    """Coefficient lists of ``tr Y(w)^t`` in ``u = 1 - w`` for ``t = 0..t_max``.

    Writes ``Y(w) = (B - J) + u J`` and propagates the ``u``-graded pieces
    ``M[t+1][g] = M[t][g] (B - J) + M[t][g-1] J``. All pieces are
    non-negative integer matrices bounded entrywise by ``B^t``; they are
    multiplied in float64 while that bound stays below 2^53 and in Python
    integers beyond.
    """
    n = g.n_directed
    if n > max_directed:
        raise BudgetExceeded(f"2E = {n} exceeds the exact-polynomial limit {max_directed}")
    B, J = edge_B(g), edge_J(g)
    Y1 = B - J
    d = int(g.degrees.max(initial=0))
    out = [[n]]
    pieces = [np.eye(n, dtype=np.int64)]
    for t in range(1, t_max + 1):
        use_float = n * float(max(d, 1)) ** t < _FLOAT_EXACT
        new = []
        for gb in range(t + 1):
            acc = None
            if gb < len(pieces):
                acc = _matmul_exact(pieces[gb], Y1, use_float)
            if gb >= 1:
                term = _matmul_exact(pieces[gb - 1], J, use_float)
                acc = term if acc is None else acc + term
            new.append(acc)
        pieces = new
        out.append([int(np.trace(p)) for p in pieces])
    return out


def table_from_polynomials(polys: list[list[int]]) -> WalkCountTable:
    t_max = len(polys) - 1
    counts = np.zeros((t_max + 1, t_max + 1), dtype=object)
    for t in range(1, t_max + 1):
        for gb, c in enumerate(polys[t]):
            counts[t, gb] = int(c)
    return WalkCountTable(counts, "polynomial", {"t_max": t_max})


def nonbacktracking_traces(g: RegularGraph, t_max: int) -> list[int]:
    """Exact ``tr Y^t`` at ``w = 1`` for ``t = 0..t_max`` (number of nb closed walks)."""
    Y = edge_B(g) - edge_J(g)
    n = g.n_directed
    d = int(g.degrees.max(initial=0))
    out = [n]
    P = np.eye(n, dtype=np.int64)
    for t in range(1, t_max + 1):
        use_float = n * float(max(d - 1, 1)) ** t < _FLOAT_EXACT
        P = _matmul_exact(P, Y, use_float)
        out.append(int(np.trace(P)))
    return out


def n_t1_closed_form(g: RegularGraph, l: int, traces: list[int] | None = None) -> int:
    """``N(l; 1)`` from non-backtracking traces of shorter length.

    Even ``l``: ``l (d-2) sum_{k=1}^{l/2-1} trY^{2k} (d-1)^{(l-2k-2)/2}``.
    Odd ``l``: ``l (d-2) sum_{k=1}^{floor(l/2)-1} trY^{2k+1} (d-1)^{(l-2k-3)/2}``.
    """
    if not g.is_regular:
        raise GraphError("closed form needs a regular graph")
    if l < 3:
        raise ValueError("closed form is stated for l >= 3")
    d = g.degree
    if traces is None or len(traces) <= l:
        traces = nonbacktracking_traces(g, l)
    if not g.multigraph and traces[2] != 0:
        raise GraphError("a simple graph must have tr Y^2 = 0")
    total = 0
    if l % 2 == 0:
        for k in range(1, l // 2):
            total += traces[2 * k] * (d - 1) ** ((l - 2 * k - 2) // 2)
    else:
        for k in range(1, l // 2):
            total += traces[2 * k + 1] * (d - 1) ** ((l - 2 * k - 3) // 2)
    return l * (d - 2) * total


def n_t1_from_polynomial(polys: list[list[int]], l: int) -> int:
    """``N(l; 1) = -(d/dw) tr Y^l(w)`` at ``w = 1``: the linear coefficient in ``u``."""
    row = polys[l]
    return int(row[1]) if len(row) > 1 else 0


# -- a_l and the p/q recursion ----------------------------------------------
#
# At w = 1 every y_t and y'_t is a rational multiple of (d-1)^(-t/2). All
# quantities below are returned as exact Fractions after multiplying by
# (d-1)^(l/2) so that odd and even l stay rational.

def _y_parts(polys, d: int, V: int, t: int, drop_trivial: bool):
    """``(Y, Yp)`` with ``y_t(1) = Y s^-t`` and ``y'_t(1) = Yp s^-t``, ``s = sqrt(d-1)``."""
    q = d - 1
    tr = polys[t][0]
    n1 = polys[t][1] if len(polys[t]) > 1 else 0
    num = Fraction(tr - q ** t)
    dnum = Fraction(-n1 + (t * q ** (t - 1) if t else 0))
    # y = num / (V (w(d-w))^(t/2)); d/dw (w(d-w))^(-t/2) at 1 = -(t/2)(d-2) q^(-t/2-1)
    Y = num / V
    Yp = dnum / V - Fraction(t, 2) * (d - 2) * num / (V * q)
    if drop_trivial:
        # remove (1/V) z^t with z = sqrt(w/(d-w)); at w = 1 z^t = s^-t and
        # d/dw z^t = (t d / 2) s^-t / q
        Y -= Fraction(1, V)
        Yp -= Fraction(t * d, 2 * V * q)
    return Y, Yp


def a_l_coefficients(g: RegularGraph, l_max: int, polys=None, drop_trivial: bool = False
                     ) -> dict[int, Fraction]:
    """``a_l (d-1)^(l/2)`` for ``l = 2..l_max`` from the finite-V ``y_t`` (exact)."""
    d, V = g.degree, g.n_vertices
    q = d - 1
    if polys is None:
        polys = trY_polynomial(g, l_max + 2)
    out = {}
    for l in range(2, l_max + 1):
        Ym, Ypm = _y_parts(polys, d, V, l - 2, drop_trivial)
        Y0, Yp0 = _y_parts(polys, d, V, l, drop_trivial)
        Yp_, Ypp = _y_parts(polys, d, V, l + 2, drop_trivial)
        # s^(l) y_{l-2} = Ym q, s^l y_{l+2} = Yp_ / q
        a = (d - 2) * (Fraction(l - 2, 4) * Ym * q - Fraction(l + 2, 4) * Yp_ / q - Y0) \
            + (d - 1) * (Yp0 - Fraction(1, 2) * Ypm * q - Fraction(1, 2) * Ypp / q)
        out[l] = a
    return out


def verify_a_l_vanishing(g: RegularGraph, l_max: int, l_min: int = 4) -> dict:
    """Exact ``a_l`` with the full finite-V ``y_t`` and with the trivial ``1/V`` part removed."""
    polys = trY_polynomial(g, l_max + 2)
    raw = a_l_coefficients(g, l_max, polys, drop_trivial=False)
    reduced = a_l_coefficients(g, l_max, polys, drop_trivial=True)
    ls = range(l_min, l_max + 1)
    return {
        "l": list(ls),
        "raw": {l: str(raw[l]) for l in ls},
        "without_trivial": {l: str(reduced[l]) for l in ls},
        "raw_all_zero": all(raw[l] == 0 for l in ls),
        "without_trivial_all_zero": all(reduced[l] == 0 for l in ls),
        "scale": "values are a_l * (d-1)^(l/2)",
    }


def pq_recursion_check(g: RegularGraph, l_max: int = 10, l_min: int = 1) -> dict:
    """Check ``p_{l+2} - p_l`` against the sum of ``q`` terms, exactly.

    ``p_l = (tr Y^l)'(1) / (d-1)^((l-2)/2)`` and
    ``q_l = (d-2)(l-2) trY^{l-2} / (d-1)^((l-2)/2) - (d-2)(l+2) trY^l / (d-1)^(l/2)``
    with ``tr Y^{-1} = 0``. Both sides are multiplied by ``sqrt(d-1)`` for odd
    ``l`` so everything stays rational. Also compares ``p_l`` with its
    closed-form solution.
    """
    d = g.degree
    q = d - 1
    polys = trY_polynomial(g, l_max + 2)
    tr = [p[0] for p in polys]

    def trace(t):
        return 0 if t < 0 else tr[t]

    def scaled(x, j, parity):
        # x / (d-1)^(j/2), times sqrt(d-1) when parity is odd
        return Fraction(x) * Fraction(q) ** (-((j - parity) // 2))

    def p(l):
        deriv = -(polys[l][1] if len(polys[l]) > 1 else 0)
        return scaled(deriv, l - 2, l % 2)

    def qq(l):
        par = l % 2
        return (d - 2) * (l - 2) * scaled(trace(l - 2), l - 2, par) \
            - (d - 2) * (l + 2) * scaled(trace(l), l, par)

    def p_closed(l):
        par = l % 2
        if par == 0:
            s = sum(scaled(trace(2 * k), 2 * k, 0) for k in range(1, l // 2))
        else:
            s = sum(scaled(trace(2 * k + 1), 2 * k + 1, 1) for k in range(1, l // 2))
        return -l * (d - 2) * s

    rows = []
    for l in range(l_min, l_max + 1):
        lhs = p(l + 2) - p(l)
        if l % 2 == 0:
            rhs = sum((qq(2 * k) for k in range(1, l // 2 + 1)), Fraction(0))
        else:
            rhs = sum((qq(2 * k + 1) for k in range(0, l // 2 + 1)), Fraction(0))
        rows.append({"l": l, "lhs": str(lhs), "rhs": str(rhs), "match": lhs == rhs})
    closed = [{"l": l, "p": str(p(l)), "closed": str(p_closed(l)), "match": p(l) == p_closed(l)}
              for l in range(max(l_min, 3), l_max + 3)]
    return {"recursion": rows, "closed_form": closed,
            "all_match": all(r["match"] for r in rows) and all(c["match"] for c in closed)}

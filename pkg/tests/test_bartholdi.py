from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from regtrace.bartholdi import (bareiss_det, char_poly_edge, char_poly_vertex_side,
                                check_identity, exact_sides, identity_sides,
                                integer_char_poly, random_points)
from regtrace.ensemble import decorate_magnetic, decorate_weighted, sample_multigraph
from regtrace.exceptions import DecorationMismatch, PolePoint
from regtrace.graph_model import build_graph

from conftest import random_graph

# Ihara-type factorization of K4, expanded independently with numpy:
# (1 - s^2)^2 (1 - s)(1 - 2s)(1 + s + 2s^2)^3
K4_ZETA = np.polymul(np.polymul([-1, 0, 1], [-1, 0, 1]),
                     np.polymul(np.polymul([-1, 1], [-2, 1]),
                               np.polymul([2, 1, 1], np.polymul([2, 1, 1], [2, 1, 1]))))


def test_bareiss_matches_float_det():
    rng = np.random.default_rng(0)
    for _ in range(10):
        M = rng.integers(-5, 6, size=(7, 7))
        assert bareiss_det(M) == round(np.linalg.det(M))


def test_bareiss_singular():
    assert bareiss_det([[1, 2], [2, 4]]) == 0


def test_k4_char_poly_matches_factorization(k4):
    coeffs = char_poly_edge(k4, 1)
    assert [int(c) for c in coeffs] == [int(c) for c in K4_ZETA[::-1]]


def test_char_poly_edge_equals_vertex_side(k4, petersen):
    for g in (k4, petersen):
        for w in (Fraction(1), Fraction(1, 2), Fraction(3, 2)):
            assert char_poly_edge(g, w) == char_poly_vertex_side(g, w)


def test_integer_char_poly_of_identity():
    assert integer_char_poly(np.eye(3, dtype=int)) == [1, -3, 3, -1]


def test_pole_rejected(k4):
    with pytest.raises(PolePoint):
        identity_sides(k4, 0.5, 2.0)


def test_decoration_required(k4):
    with pytest.raises(DecorationMismatch):
        check_identity(k4, "magnetic", [(0.1, 0.2)])


def test_exact_regular_identity(petersen):
    pts = random_points(np.random.default_rng(1), 5, rational=True)
    for s, w in pts:
        lhs, rhs = exact_sides(petersen, s, w)
        assert lhs == rhs


def test_general_variant_on_irregular_graph():
    g = build_graph([(0, 1), (1, 2), (2, 0), (2, 3)], regular=False)
    rep = check_identity(g, "general", random_points(np.random.default_rng(0), 10), exact=False)
    assert rep.max_abs_residual < 1e-10
    pts = random_points(np.random.default_rng(0), 5, rational=True)
    assert check_identity(g, "general", pts, exact=True).exact_match


def test_multigraph_variant_exact():
    g = sample_multigraph(6, 3, np.random.default_rng(3))
    pts = random_points(np.random.default_rng(2), 5, rational=True)
    rep = check_identity(g, "multigraph", pts, exact=True)
    assert rep.exact_match and rep.max_abs_residual < 1e-9


@given(st.integers(0, 500))
def test_decorated_variants(seed):
    g = random_graph(10, 3, seed)
    pts = random_points(np.random.default_rng(seed), 5)
    rm = check_identity(g, "magnetic", pts, decorate_magnetic(g, seed))
    rw = check_identity(g, "weighted", pts, decorate_weighted(g, seed))
    assert rm.max_abs_residual < 1e-9 and rw.max_abs_residual < 1e-9


def test_report_serializes(k4):
    rep = check_identity(k4, "regular", [(0.1, 0.3)], graph_id="k4")
    d = rep.to_dict()
    assert d["graph_id"] == "k4" and d["n_points"] == 1 and d["exact_match"] is None

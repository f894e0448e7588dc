"""Acceptance criteria, one test each, at the stated tolerances and runtime limits.

Each test records a one-line PASS/FAIL verdict; the lines are printed in the
terminal summary (see conftest.py) and on failure.
"""

import time

import numpy as np
import pytest

from regtrace.bartholdi import check_identity, random_points
from regtrace.ensemble import (EnsembleSpec, decorate_magnetic, decorate_weighted,
                               ensemble_samples, mean_and_stderr, sample_multigraph,
                               sample_regular)
from regtrace.graph_model import complete_graph, petersen_graph
from regtrace.observables import (edge_traces, km_l1_distance, magnetic_top_eigenvalue,
                                  nontrivial_spectrum)
from regtrace.operators import adjacency, edge_Y
from regtrace.spectral import (adjacency_spectrum, edge_spectrum_from_vertex, kesten_mckay,
                               km_edge, multiset_distance)
from regtrace.trace_formula import rho_corr, rho_smooth, verify_ywt_identity
from regtrace.unitary import (build_U, density_from_secular, secular_residual, solve_phi_km,
                              trU_closed_form, trU_minus_half_pi, unitarity_defect)
from regtrace.walks import (enumerate_walks, n_t1_closed_form, n_t1_from_polynomial,
                            table_from_polynomials, trY_polynomial)

RESULTS: dict[int, str] = {}
W_VALUES = (0.5, 1.0, 1.3)


def _record(n: int, ok: bool, detail: str):
    line = f"acceptance {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def _random_simple(rng, count, V_max=20, max_directed=None):
    graphs = []
    while len(graphs) < count:
        d = int(rng.choice([3, 4, 5]))
        V = int(rng.integers(d + 1, V_max + 1))
        if (V * d) % 2 or (max_directed is not None and V * d > max_directed):
            continue
        graphs.append(sample_regular(EnsembleSpec(V, d, 1, seed=int(rng.integers(2**31)),
                                                  reject_bipartite=False,
                                                  reject_disconnected=False)))
    return graphs


@pytest.fixture(scope="module")
def spectral_graphs():
    """K4, Petersen and 20 random connected non-bipartite graphs."""
    rng = np.random.default_rng(2024)
    out = [complete_graph(4), petersen_graph()]
    while len(out) < 22:
        d = int(rng.choice([3, 4, 5]))
        V = int(rng.integers(d + 1, 21))
        if (V * d) % 2:
            continue
        out.append(sample_regular(EnsembleSpec(V, d, 1, seed=int(rng.integers(2**31)))))
    return out


def test_criterion_01_bartholdi():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    graphs = _random_simple(rng, 100)
    worst = {"regular": 0.0, "magnetic": 0.0, "weighted": 0.0}
    exact_ok, n_exact = True, 0
    for g in graphs:
        pts = random_points(rng, 20)
        worst["regular"] = max(worst["regular"], check_identity(g, "regular", pts).max_abs_residual)
        rep = check_identity(g, "magnetic", pts, decorate_magnetic(g, rng))
        worst["magnetic"] = max(worst["magnetic"], rep.max_abs_residual)
        rep = check_identity(g, "weighted", pts, decorate_weighted(g, rng))
        worst["weighted"] = max(worst["weighted"], rep.max_abs_residual)
        if g.n_directed <= 60:
            rpts = random_points(rng, 20, rational=True)
            exact_ok &= bool(check_identity(g, "regular", rpts, exact=True).exact_match)
            n_exact += 1
    n_multi = 0
    while n_multi < 100:
        d = int(rng.choice([3, 4, 5]))
        V = int(rng.integers(2, 21))
        if (V * d) % 2 or V * d > 60:
            continue
        mg = sample_multigraph(V, d, rng)
        rpts = random_points(rng, 20, rational=True)
        exact_ok &= bool(check_identity(mg, "multigraph", rpts, exact=True).exact_match)
        n_multi += 1
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-9 and exact_ok and elapsed < 120
    _record(1, ok, f"max residual {max(worst.values()):.2e} "
                   f"(reg {worst['regular']:.1e}, mag {worst['magnetic']:.1e}, "
                   f"wt {worst['weighted']:.1e}); exact on {n_exact} simple + {n_multi} "
                   f"multigraphs: {exact_ok}; {elapsed:.1f}s")
    assert ok


def test_criterion_02_spectrum_mapping(spectral_graphs):
    t0 = time.perf_counter()
    worst = 0.0
    for g in spectral_graphs:
        sd = adjacency_spectrum(adjacency(g), g.degree)
        for w in W_VALUES:
            pred = edge_spectrum_from_vertex(sd, w, g.n_edges)
            direct = np.linalg.eigvals(edge_Y(g, w).astype(float))
            worst = max(worst, multiset_distance(pred, direct))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 60
    _record(2, ok, f"max multiset distance {worst:.2e} over {len(spectral_graphs)} graphs "
                   f"x {len(W_VALUES)} w; {elapsed:.1f}s")
    assert ok


def test_criterion_03_ywt_identity(spectral_graphs):
    worst = 0.0
    for g in spectral_graphs:
        for w in W_VALUES:
            worst = max(worst, verify_ywt_identity(g, w, 20)["max_residual"])
    ok = worst < 1e-8
    _record(3, ok, f"max |y_matrix - y_eigen| / max(1, |y|) = {worst:.2e} for t <= 20")
    assert ok


def test_criterion_04_walk_counts():
    t0 = time.perf_counter()
    ok = True
    notes = []
    for name, g in (("K4", complete_graph(4)), ("Petersen", petersen_graph())):
        polys = trY_polynomial(g, 10)
        poly_table = table_from_polynomials(polys)
        enum10 = enumerate_walks(g, 10)
        same8 = all(poly_table[t, k] == enum10[t, k] for t in range(1, 9) for k in range(9))
        closed = [n_t1_closed_form(g, l) for l in range(3, 11)]
        from_poly = [n_t1_from_polynomial(polys, l) for l in range(3, 11)]
        from_enum = [enum10[l, 1] for l in range(3, 11)]
        ok &= same8 and closed == from_poly == from_enum
        notes.append(f"{name}: tables t,g<=8 equal={same8}, N(l;1) l<=10 equal="
                     f"{closed == from_poly == from_enum}")
    n51 = n_t1_closed_form(complete_graph(4), 5)
    elapsed = time.perf_counter() - t0
    ok &= n51 == 120 and elapsed < 300
    _record(4, ok, "; ".join(notes) + f"; N(5;1) on K4 = {n51}; {elapsed:.1f}s")
    assert ok


def test_criterion_05_kesten_mckay():
    t0 = time.perf_counter()
    l1 = {}
    for V in (500, 1000):
        ev = ensemble_samples(EnsembleSpec(V, 3, 200, seed=5), nontrivial_spectrum).ravel()
        l1[V] = km_l1_distance(ev, 3, 0.1)
    elapsed = time.perf_counter() - t0
    ok = l1[500] < 0.03 and l1[1000] < l1[500] and elapsed < 600
    _record(5, ok, f"L1(V=500) = {l1[500]:.4f} (< 0.03), L1(V=1000) = {l1[1000]:.4f} "
                   f"(improves: {l1[1000] < l1[500]}); {elapsed:.1f}s")
    assert ok


def test_criterion_06_mean_traces():
    t0 = time.perf_counter()
    values = ensemble_samples(EnsembleSpec(200, 3, 500, seed=6), edge_traces)
    mean, se = mean_and_stderr(values)
    target = np.array([2.0 ** t for t in range(3, 7)])
    z = (mean - target) / se
    elapsed = time.perf_counter() - t0
    ok = bool(np.all(np.abs(z) < 3)) and elapsed < 300
    parts = ", ".join(f"t={t}: {m:.2f}+-{s:.2f} vs {int(c)} ({zz:+.1f} se)"
                      for t, m, s, c, zz in zip(range(3, 7), mean, se, target, z))
    # non-gating: repeated traversals of shorter cycles add sum over divisors k >= 3 of t
    with_repeats = np.array([sum(2.0 ** k for k in range(3, t + 1) if t % k == 0)
                             for t in range(3, 7)])
    z_rep = (mean - with_repeats) / se
    diag = ", ".join(f"{int(c)} ({zz:+.1f} se)" for c, zz in zip(with_repeats, z_rep))
    _record(6, ok, f"{parts}; {elapsed:.1f}s [non-gating: divisor-sum means {diag}]")
    assert ok


def test_criterion_07_magnetic_top():
    t0 = time.perf_counter()
    spec = EnsembleSpec(500, 3, 100, seed=7, decoration="magnetic")
    mean, se = mean_and_stderr(ensemble_samples(spec, magnetic_top_eigenvalue))
    edge = km_edge(3)
    rel = abs(mean[0] - edge) / edge
    elapsed = time.perf_counter() - t0
    ok = rel < 0.05 and elapsed < 600
    _record(7, ok, f"<|mu0|> = {mean[0]:.4f}+-{se[0]:.4f} vs 2 sqrt(2) = {edge:.4f} "
                   f"(rel {rel:.2%}); {elapsed:.1f}s")
    assert ok


def _printed_const_phi(mu, phi, t, table, d):
    # transcription of the polar form as printed, kept as a non-gating diagnostic
    s, c = np.sin(phi), np.cos(phi)
    R2 = mu * mu + d * d - 2 * mu * d * c
    a_t = np.sqrt(2 + d * (d - 2) + mu * mu - 2 * mu * d * c + 2 * (d - 1) * np.cos(2 * phi)) / (2 * s)
    ang = np.pi / 2 - phi + np.arctan((d * np.sin(2 * phi) - np.sin(2 * phi) - mu * s)
                                      / (1 - np.cos(2 * phi) - mu * c + d * np.cos(2 * phi)))
    pref = (2 * s) ** t / R2 ** (t / 2) * np.exp(1j * t * (phi - np.arctan((d * c - mu) / (d * s))))
    return pref * sum(table[t, g] * a_t ** g * np.exp(1j * g * ang) for g in range(t + 1))


def _printed_minus_half_pi(mu, t, table, d):
    pref = 2.0 ** t / (d * d + mu * mu) ** (t / 2) * np.exp(1j * t * (np.arctan(mu / d) - np.pi / 2))
    return pref * sum(table[t, g] * ((d - 2) ** 2 + mu * mu) ** (g / 2) / 2 ** g
                      * np.exp(-1j * g * np.arctan(mu / (d - 2))) for g in range(t + 1))


def test_criterion_08_unitarity_and_secular(spectral_graphs):
    rng = np.random.default_rng(8)
    worst_u = worst_s = 0.0
    n = 0
    while n < 500:
        g = spectral_graphs[int(rng.integers(len(spectral_graphs)))]
        d = g.degree
        mu = float(rng.uniform(-d, d))
        phi = float(rng.uniform(-np.pi, np.pi))
        if abs(np.sin(phi)) < 1e-6:
            continue
        worst_u = max(worst_u, unitarity_defect(build_U(g, mu, phi)))
        worst_s = max(worst_s, secular_residual(g, mu, phi))
        n += 1

    k4 = complete_graph(4)
    table = table_from_polynomials(trY_polynomial(k4, 6))
    worst_c = worst_h = printed_c = printed_h = 0.0
    for _ in range(40):
        mu = float(rng.uniform(-2.95, 2.95))
        phi = float(rng.uniform(-np.pi, np.pi))
        if abs(np.sin(phi)) < 1e-3:
            continue
        for ph in (phi, -np.pi / 2):
            U = build_U(k4, mu, ph)
            P = np.eye(12, dtype=complex)
            for t in range(1, 7):
                P = P @ U
                direct = np.trace(P)
                scale = max(1.0, abs(direct))
                worst_c = max(worst_c, abs(trU_closed_form(mu, ph, t, table, 3) - direct) / scale)
                printed_c = max(printed_c,
                                abs(_printed_const_phi(mu, ph, t, table, 3) - direct) / scale)
                if ph == -np.pi / 2:
                    worst_h = max(worst_h, abs(trU_minus_half_pi(mu, t, table, 3) - direct) / scale)
                    printed_h = max(printed_h,
                                    abs(_printed_minus_half_pi(mu, t, table, 3) - direct) / scale)
    ok = worst_u < 1e-12 and worst_s < 1e-9 and worst_c < 1e-8 and worst_h < 1e-8
    _record(8, ok, f"unitarity {worst_u:.1e}, secular {worst_s:.1e} over {n} tuples; "
                   f"tr U^t closed form {worst_c:.1e}, phi=-pi/2 form {worst_h:.1e} "
                   f"[non-gating: forms as printed {printed_c:.1e} / {printed_h:.1e}]")
    assert ok


def test_criterion_09_phase_function():
    d = 4
    a = km_edge(d)
    grid = np.linspace(-a, a, 803)[1:-1]
    pf = solve_phi_km(d, grid, ratio=-2.0)
    nkm = pf.max_residual
    interior = np.abs(grid) < 0.9 * a
    ode_fd = float(np.abs(pf.ode_residual()[interior]).max())
    g = sample_regular(EnsembleSpec(10, 4, 1, seed=9))
    mu = grid[interior][::10]
    curve = density_from_secular(g, mu, pf, eps=0.05, t_max=1)
    smooth_err = float(np.abs(curve.normalization["smooth"] - kesten_mckay(mu, d)).max())
    monotone = bool(np.all(np.diff(pf.phi) < 0))
    in_range = bool(-np.pi - 1e-3 < pf.phi.min() and pf.phi.max() < 1e-3)
    ok = nkm < 1e-8 and ode_fd < 1e-4 and smooth_err < 1e-3 and monotone and in_range
    _record(9, ok, f"counting-equation residual {nkm:.1e}, ODE by finite differences "
                   f"{ode_fd:.1e} (|mu| < 0.9 edge), smooth vs KM {smooth_err:.1e}; "
                   f"phi in [{pf.phi.min():.3f}, {pf.phi.max():.3f}], decreasing={monotone}")
    assert ok


def test_criterion_10_w1_reductions():
    worst_s = worst_c = 0.0
    for d in (3, 4, 5, 7):
        a = km_edge(d)
        mu = np.linspace(-a, a, 1002)[1:-1]
        worst_s = max(worst_s, float(np.abs(rho_smooth(mu, d, 1.0) - kesten_mckay(mu, d)).max()))
        ref = -(1 + mu + mu ** 2 - 2 * (d - 1) + (d - 2) / (d - mu)) / (
            2 * np.pi * np.sqrt(4 * (d - 1) - mu ** 2))
        worst_c = max(worst_c, float(np.abs(rho_corr(mu, d, 1.0) - ref).max()))
    ok = worst_s < 1e-12 and worst_c < 1e-12
    _record(10, ok, f"smooth vs Kesten-McKay {worst_s:.1e}, correction vs w=1 form {worst_c:.1e}")
    assert ok

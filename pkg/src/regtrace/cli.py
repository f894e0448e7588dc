"""Command-line experiment runner.

Every run writes its data files (CSV or JSON) plus ``manifest.json`` into
``--out-dir``. Data files depend only on the arguments, so reruns with the
same arguments and seed are byte-identical; the manifest alone carries the
wall time. Module errors print a JSON error object on stderr and exit 1;
invalid arguments exit 2.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bartholdi import VARIANTS, check_identity, random_points
from .ensemble import (EnsembleSpec, decorate_magnetic, decorate_weighted, ensemble_samples,
                       mean_and_stderr, sample_multigraph, sample_regular)
from .exceptions import RegTraceError
from .graph_model import (complete_bipartite_graph, complete_graph, petersen_graph,
                          read_graph)
from .observables import (edge_traces, km_bin_masses, km_l1_distance,
                          magnetic_top_eigenvalue, nontrivial_spectrum)
from .operators import adjacency, degree_matrix, edge_B, edge_J, edge_Y, laplacian
from .spectral import coarse_density, kesten_mckay, km_edge
from .trace_formula import band_radius, reconstruct_density, rho_smooth
from .unitary import density_from_secular, solve_phi_km
from .walks import enumerate_walks, table_from_polynomials, trY_polynomial

SCHEMA = 1
_NOT_HASHED = ("out_dir", "threads", "func")


class UsageError(Exception):
    """Invalid flag values or combinations (exit status 2)."""


def _error_json(kind: str, message: str) -> str:
    return json.dumps({"schema": SCHEMA, "error": kind, "message": message})


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(_error_json("UsageError", message), file=sys.stderr)
        raise SystemExit(2)


# -- output -----------------------------------------------------------------

class Writer:
    """Collects output files for one run; the only place files are written."""

    def __init__(self, out_dir: Path, fmt: str):
        self.out_dir = out_dir
        self.fmt = fmt
        self.files: list[str] = []

    def _put(self, name: str, text: str) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / name).write_text(text)
        self.files.append(name)

    def table(self, stem: str, columns: list[str], rows) -> str:
        """Write a table; ``columns`` are ``"name [unit]"`` labels."""
        rows = [[_cell(v) for v in r] for r in rows]
        if self.fmt == "json":
            name = stem + ".json"
            self._put(name, json.dumps({"schema": SCHEMA, "columns": columns, "rows": rows},
                                       indent=1) + "\n")
        else:
            name = stem + ".csv"
            buf = io.StringIO()
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow(columns)
            wr.writerows(rows)
            self._put(name, buf.getvalue())
        return name

    def columns(self, stem: str, named: dict) -> str:
        cols = list(named)
        return self.table(stem, cols, zip(*[np.asarray(v).tolist() for v in named.values()]))

    def json(self, stem: str, payload: dict) -> str:
        name = stem + ".json"
        self._put(name, json.dumps({"schema": SCHEMA, **payload}, indent=1, sort_keys=True,
                                   default=_cell) + "\n")
        return name

    def plot_script(self, stem: str, tables: list[str]) -> None:
        """Emit a small matplotlib script that plots each table's first column against the rest."""
        body = _PLOT_TEMPLATE.format(tables=tables, fmt=self.fmt, stem=stem)
        self._put(f"plot_{stem}.py", body)


def _cell(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else ""
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return str(complex(v))
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


_PLOT_TEMPLATE = '''"""Plot the data files written next to this script."""
import csv
import json
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).parent
for name in {tables!r}:
    path = here / name
    if "{fmt}" == "json":
        data = json.loads(path.read_text())
        cols, rows = data["columns"], data["rows"]
    else:
        with path.open() as fh:
            reader = csv.reader(fh)
            cols = next(reader)
            rows = list(reader)
    x = [float(r[0]) for r in rows]
    fig, ax = plt.subplots()
    for k, label in enumerate(cols[1:], start=1):
        ys = [float(r[k]) if r[k] != "" else float("nan") for r in rows]
        ax.plot(x, ys, label=label)
    ax.set_xlabel(cols[0])
    ax.legend()
    fig.savefig(here / (path.stem + ".png"), dpi=150)
'''


# -- argument helpers ---------------------------------------------------------

def _parse_range(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"range must be lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"bad range {text!r}")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _graph(args):
    sources = [args.graph is not None, args.family is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --graph or --family")
    if args.graph is not None:
        return read_graph(args.graph)
    fam = args.family
    if fam == "k4":
        return complete_graph(4)
    if fam == "petersen":
        return petersen_graph()
    if fam == "k33":
        return complete_bipartite_graph(3)
    if args.V is None or args.d is None:
        raise UsageError(f"--family {fam} needs --V and --d")
    if fam == "random":
        return sample_regular(EnsembleSpec(args.V, args.d, 1, args.seed))
    return sample_multigraph(args.V, args.d, np.random.default_rng(args.seed))


def _decoration(g, name: str | None, seed: int):
    if name in (None, "none"):
        return None
    if name == "magnetic":
        return decorate_magnetic(g, seed)
    return decorate_weighted(g, seed)


def _add_graph_args(p):
    p.add_argument("--graph", help="graph file ('V d mode' header, then one edge per line)")
    p.add_argument("--family", choices=["k4", "petersen", "k33", "random", "multigraph"])
    p.add_argument("--V", type=int)
    p.add_argument("--d", type=int)


def _default_grid(half_width: float, n: int) -> np.ndarray:
    u = (np.arange(n) + 0.5) / n
    return half_width * np.cos(np.pi * (1 - u))


# -- subcommands ----------------------------------------------------------------

def cmd_ensemble(args, out: Writer):
    spec = EnsembleSpec(args.V, args.d, args.samples, args.seed, decoration=args.decoration)
    if args.observable == "traces":
        if args.decoration != "none":
            raise UsageError("the traces observable takes no decoration")
        obs = _TraceObservable(args.t_min, args.t_max)
        cols = [f"trY^{t} [walks]" for t in range(args.t_min, args.t_max + 1)]
    elif args.observable == "magnetic-top":
        if args.decoration != "magnetic":
            raise UsageError("magnetic-top needs --decoration magnetic")
        obs = magnetic_top_eigenvalue
        cols = ["abs_mu0 [1]"]
    else:
        if args.decoration != "none":
            raise UsageError("the spectrum observable takes no decoration")
        obs = nontrivial_spectrum
        cols = [f"mu_{k} [1]" for k in range(args.V - 1)]
    values = ensemble_samples(spec, obs, n_jobs=args.threads)
    out.table("samples", ["sample [index]"] + cols,
              ([i] + row.tolist() for i, row in enumerate(values)))
    mean, se = mean_and_stderr(values)
    out.table("summary", ["observable [name]", "mean [same as observable]", "stderr [same]"],
              zip(cols, mean.tolist(), se.tolist()))


class _TraceObservable:
    def __init__(self, t_min, t_max):
        self.t_min, self.t_max = t_min, t_max

    def __call__(self, g):
        return edge_traces(g, self.t_min, self.t_max)


def cmd_matrix(args, out: Writer):
    g = _graph(args)
    dec = _decoration(g, args.decoration, args.seed)
    kind = args.kind
    if kind == "A":
        M = adjacency(g, dec)
    elif kind == "D":
        M = degree_matrix(g, dec)
    elif kind == "L":
        M = laplacian(g, dec)
    elif kind == "B":
        M = edge_B(g, dec)
    elif kind == "J":
        M = edge_J(g)
    else:
        M = edge_Y(g, args.w, dec)
    M = np.asarray(M)
    rows, cols = np.nonzero(M)
    vals = M[rows, cols]
    out.table(f"matrix_{kind}", ["row [index]", "col [index]", "real [1]", "imag [1]"],
              zip(rows.tolist(), cols.tolist(), np.real(vals).tolist(), np.imag(vals).tolist()))


def cmd_spectrum(args, out: Writer):
    g = _graph(args)
    dec = _decoration(g, args.decoration, args.seed)
    if args.operator == "A":
        ev = np.sort(np.linalg.eigvalsh(adjacency(g, dec)))[::-1]
        out.columns("spectrum_A", {"mu [1]": ev})
    else:
        ev = np.linalg.eigvals(edge_Y(g, args.w, dec))
        ev = ev[np.lexsort((ev.imag, ev.real))][::-1]
        out.columns("spectrum_Y", {"real [1]": ev.real, "imag [1]": ev.imag})


def cmd_km_curve(args, out: Writer):
    grid = _default_grid(km_edge(args.d), args.n_grid)
    name = out.columns("km_curve", {"mu [1]": grid, "rho_km [1/mu]": kesten_mckay(grid, args.d)})
    out.plot_script("km_curve", [name])


def cmd_coarse(args, out: Writer):
    g = _graph(args)
    ev = np.linalg.eigvalsh(adjacency(g).astype(float))
    curve = coarse_density(ev, g.degree, args.t_max, n_grid=args.n_grid)
    name = out.columns("coarse", {"mu [1]": curve.grid, "rho_coarse [1/mu]": curve.values,
                                  "rho_km [1/mu]": kesten_mckay(curve.grid, g.degree)})
    out.json("coarse_meta", curve.normalization)
    out.plot_script("coarse", [name])


def cmd_trace_formula(args, out: Writer):
    g = _graph(args)
    dec = _decoration(g, args.decoration, args.seed)
    if dec is not None and args.decoration != "magnetic":
        raise UsageError("trace-formula accepts only a magnetic decoration")
    r = band_radius(g.degree, args.w)
    grid = _default_grid(2 * r, args.n_grid)
    dec_ = reconstruct_density(g, args.w, args.t_max, grid=grid, decoration=dec)
    cols = {"mu [1]": grid, "smooth [1/mu]": dec_.smooth.values, "osc [1/mu]": dec_.osc.values,
            "corr_over_V [1/mu]": dec_.corr.values, "total [1/mu]": dec_.total}
    if dec_.target is not None:
        cols["target [1/mu]"] = dec_.target.values
    name = out.columns("trace_formula", cols)
    out.plot_script("trace_formula", [name])


def cmd_walk_counts(args, out: Writer):
    g = _graph(args)
    if args.method == "enumerate":
        table = enumerate_walks(g, args.t_max, n_jobs=args.threads)
    else:
        table = table_from_polynomials(trY_polynomial(g, args.t_max))
    rows = [(t, gb, int(table[t, gb])) for t in range(1, args.t_max + 1)
            for gb in range(t + 1)]
    out.table("walk_counts", ["t [steps]", "g [back-scatters]", "N [walks]"], rows)


def cmd_verify_bartholdi(args, out: Writer):
    g = _graph(args)
    rng = np.random.default_rng(args.seed)
    dec = None
    if args.variant == "magnetic":
        dec = decorate_magnetic(g, rng)
    elif args.variant == "weighted":
        dec = decorate_weighted(g, rng)
    points = random_points(rng, args.points, rational=args.exact)
    rep = check_identity(g, args.variant, points, dec, exact=args.exact)
    out.json("bartholdi", rep.to_dict())


def cmd_unitary(args, out: Writer):
    g = _graph(args)
    grid = _parse_range(args.mu_grid)
    curve = density_from_secular(g, grid, args.phi, args.eps, args.t_max, args.method)
    name = out.columns("density", {"mu [1]": grid,
                                   "smooth [1/mu]": curve.normalization["smooth"],
                                   "fluctuating [1/mu]": curve.normalization["fluctuating"],
                                   "rho [1/mu]": curve.values})
    out.plot_script("density", [name])


def _phase_function(args):
    if args.branch is not None and args.k is not None:
        raise UsageError("give --branch or --k, not both")
    if args.branch is None and args.k is None:
        raise UsageError("give --branch (the ratio 2k/V) or --k with --V")
    if args.k is not None and args.V is None:
        raise UsageError("--k needs --V")
    a = km_edge(args.d)
    grid = np.linspace(-a, a, args.n_grid + 2)[1:-1]
    if args.k is not None:
        return solve_phi_km(args.d, grid, k=args.k, V=args.V)
    return solve_phi_km(args.d, grid, ratio=args.branch)


def cmd_phi_km(args, out: Writer):
    pf = _phase_function(args)
    name = out.columns("phi_km", {"mu [1]": pf.grid, "phi [rad]": pf.phi,
                                  "dphi_dmu [rad]": pf.dphi, "residual [1]": pf.residuals})
    out.json("phi_km_meta", {"d": pf.d, "ratio": pf.ratio, "max_residual": pf.max_residual,
                             **pf.meta})
    out.plot_script("phi_km", [name])


def cmd_repro(args, out: Writer):
    if args.figure == "fig1":
        d = args.d or 5
        ws = [1.0, 1.2, 1.5, 1.7]
        half = 2 * max(band_radius(d, w) for w in ws)
        grid = _default_grid(half, args.n_grid)
        cols = {"mu [1]": grid}
        for w in ws:
            r = band_radius(d, w)
            vals = np.full_like(grid, np.nan)
            inside = np.abs(grid) < 2 * r
            vals[inside] = rho_smooth(grid[inside], d, w)
            cols[f"rho_smooth_w{w:g} [1/mu]"] = vals
        name = out.columns("fig1", cols)
        out.plot_script("fig1", [name])
    elif args.figure == "km":
        d = args.d or 3
        V = args.V or 500
        spec = EnsembleSpec(V, d, args.samples, args.seed)
        ev = ensemble_samples(spec, nontrivial_spectrum, n_jobs=args.threads).ravel()
        edges, q = km_bin_masses(d, args.bin_width)
        counts, _ = np.histogram(ev, bins=edges)
        width = np.diff(edges)
        h = out.table("km_histogram", ["bin_lo [1]", "bin_hi [1]", "density [1/mu]",
                                       "km_bin_average [1/mu]"],
                      zip(edges[:-1].tolist(), edges[1:].tolist(),
                          (counts / (ev.size * width)).tolist(), (q / width).tolist()))
        grid = _default_grid(km_edge(d), args.n_grid)
        c = out.columns("km_curve", {"mu [1]": grid, "rho_km [1/mu]": kesten_mckay(grid, d)})
        out.json("km_summary", {"V": V, "d": d, "samples": args.samples,
                                "bin_width": args.bin_width,
                                "l1_distance": km_l1_distance(ev, d, args.bin_width)})
        out.plot_script("km", [h, c])
    else:
        d = args.d or 4
        a = km_edge(d)
        grid = np.linspace(-a, a, args.n_grid + 2)[1:-1]
        pf = solve_phi_km(d, grid, ratio=-2.0 if args.branch is None else args.branch)
        name = out.columns("fig3", {"mu [1]": grid, "phi_km [rad]": pf.phi})
        dp = np.diff(pf.phi)
        out.json("fig3_summary", {"d": d, "ratio": pf.ratio,
                                  "phi_min": float(pf.phi.min()), "phi_max": float(pf.phi.max()),
                                  "monotone_decreasing": bool(np.all(dp < 0)),
                                  "monotone_increasing": bool(np.all(dp > 0)),
                                  "max_residual": pf.max_residual})
        out.plot_script("fig3", [name])


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="regtrace", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ensemble", help="observable over random regular graphs")
    p.add_argument("--V", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--decoration", choices=["none", "magnetic", "weighted"], default="none")
    p.add_argument("--observable", choices=["traces", "spectrum", "magnetic-top"],
                   default="traces")
    p.add_argument("--t-min", type=int, default=3)
    p.add_argument("--t-max", "--tmax", dest="t_max", type=int, default=6)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("matrix", help="write an operator as (row, col, value) triplets")
    _add_graph_args(p)
    p.add_argument("--kind", choices=["A", "D", "L", "B", "J", "Y"], default="A")
    p.add_argument("--w", type=float, default=1.0)
    p.add_argument("--decoration", choices=["none", "magnetic", "weighted"], default="none")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("spectrum", help="eigenvalues of A or Y(w)")
    _add_graph_args(p)
    p.add_argument("--operator", choices=["A", "Y"], default="A")
    p.add_argument("--w", type=float, default=1.0)
    p.add_argument("--decoration", choices=["none", "magnetic", "weighted"], default="none")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("km-curve", help="Kesten-McKay density on a grid")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-grid", type=int, default=1000)
    p.set_defaults(func=cmd_km_curve)

    p = sub.add_parser("coarse", help="Chebyshev-smoothed density of one graph")
    _add_graph_args(p)
    p.add_argument("--t-max", "--tmax", dest="t_max", type=int, default=40)
    p.add_argument("--n-grid", type=int, default=1000)
    p.set_defaults(func=cmd_coarse)

    p = sub.add_parser("trace-formula", help="smooth, oscillatory and correction densities")
    _add_graph_args(p)
    p.add_argument("--w", type=float, default=1.0)
    p.add_argument("--t-max", "--tmax", dest="t_max", type=int, default=60)
    p.add_argument("--n-grid", type=int, default=1000)
    p.add_argument("--decoration", choices=["none", "magnetic"], default="none")
    p.set_defaults(func=cmd_trace_formula)

    p = sub.add_parser("walk-counts", help="N(t; g) table")
    _add_graph_args(p)
    p.add_argument("--t-max", "--tmax", dest="t_max", type=int, default=8)
    p.add_argument("--method", choices=["polynomial", "enumerate"], default="polynomial")
    p.set_defaults(func=cmd_walk_counts)

    p = sub.add_parser("verify-bartholdi", help="check the edge/vertex determinant identity")
    _add_graph_args(p)
    p.add_argument("--variant", choices=list(VARIANTS), default="regular")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_verify_bartholdi)

    p = sub.add_parser("unitary", help="density from the unitary secular function")
    _add_graph_args(p)
    p.add_argument("--phi", type=float, default=-np.pi / 2)
    p.add_argument("--mu-grid", default="-2.9:2.9:0.01")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--t-max", "--tmax", dest="t_max", type=int, default=40)
    p.add_argument("--method", choices=["series", "logdet"], default="series")
    p.set_defaults(func=cmd_unitary)

    p = sub.add_parser("phi-km", help="Kesten-McKay phase function on one branch")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--branch", type=float, help="branch ratio 2k/V")
    p.add_argument("--k", type=int)
    p.add_argument("--V", type=int)
    p.add_argument("--n-grid", type=int, default=801)
    p.set_defaults(func=cmd_phi_km)

    p = sub.add_parser("repro", help="data behind the reference figures")
    p.add_argument("figure", choices=["fig1", "km", "fig3"])
    p.add_argument("--d", type=int)
    p.add_argument("--V", type=int)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--bin-width", type=float, default=0.1)
    p.add_argument("--branch", type=float)
    p.add_argument("--n-grid", type=int, default=801)
    p.set_defaults(func=cmd_repro)
    return parser


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_HASHED}


def _check_common(args):
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    for name in ("n_grid", "samples", "points"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    t_max = getattr(args, "t_max", None)
    if t_max is not None and t_max < 0:
        raise UsageError("--t-max must be non-negative")
    eps = getattr(args, "eps", None)
    if eps is not None and eps <= 0:
        raise UsageError("--eps must be positive")


_RANGE_FLAGS = ("--mu-grid",)


def _join_range_flags(argv: list[str]) -> list[str]:
    # "lo:hi:step" may start with "-", which argparse would read as a flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _RANGE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_range_flags(argv))
    out = Writer(Path(args.out_dir), args.format)
    config = _config(args)
    start = time.perf_counter()
    try:
        _check_common(args)
        args.func(args, out)
    except UsageError as exc:
        print(_error_json("UsageError", str(exc)), file=sys.stderr)
        return 2
    except RegTraceError as exc:
        print(_error_json(type(exc).__name__, str(exc)), file=sys.stderr)
        return 1
    digest = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()
    manifest = {"schema": SCHEMA, "command": args.command, "config": config,
                "config_hash": digest, "version": __version__,
                "wall_time_s": time.perf_counter() - start, "files": out.files}
    out.out_dir.mkdir(parents=True, exist_ok=True)
    (out.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Graphs with directed-edge indexing, edge decorations, and the text file format.

Undirected edge ``k`` (as listed, multiplicities expanded) owns the two
directed edges ``2k`` and ``2k + 1``; ``2k`` points from the first listed
endpoint to the second. Reversal is therefore ``e ^ 1``.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DecorationMismatch, GraphError, IllegalSimple, NonRegular, OddProduct

__all__ = [
    "RegularGraph",
    "MagneticDecoration",
    "WeightDecoration",
    "build_graph",
    "is_connected",
    "is_bipartite",
    "format_graph",
    "parse_graph",
    "read_graph",
    "write_graph",
    "complete_graph",
    "complete_bipartite_graph",
    "petersen_graph",
    "disjoint_union",
]

SIMPLE = "simple"
MULTIGRAPH = "multigraph"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RegularGraph:
    """A d-regular graph (or multigraph) on vertices ``0..V-1``.

    ``degree`` is ``None`` only for irregular graphs built with
    ``regular=False``; those exist solely to exercise the general Bartholdi
    identity.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    degree: int | None
    multigraph: bool = False
    origin: np.ndarray = field(init=False, repr=False, compare=False)
    terminus: np.ndarray = field(init=False, repr=False, compare=False)
    degrees: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        origin = np.empty(2 * len(e), dtype=np.int64)
        terminus = np.empty_like(origin)
        origin[0::2], terminus[0::2] = e[:, 0], e[:, 1]
        origin[1::2], terminus[1::2] = e[:, 1], e[:, 0]
        degrees = np.bincount(terminus, minlength=self.n_vertices)
        object.__setattr__(self, "origin", _frozen(origin))
        object.__setattr__(self, "terminus", _frozen(terminus))
        object.__setattr__(self, "degrees", _frozen(degrees))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_directed(self) -> int:
        return 2 * len(self.edges)

    @property
    def mode(self) -> str:
        return MULTIGRAPH if self.multigraph else SIMPLE

    @property
    def reversal(self) -> np.ndarray:
        return np.arange(self.n_directed) ^ 1

    @staticmethod
    def reverse(e: int) -> int:
        return e ^ 1

    @property
    def is_regular(self) -> bool:
        return self.degree is not None

    def fingerprint(self) -> str:
        """Short digest identifying the exact edge listing."""
        h = hashlib.sha1(repr((self.n_vertices, self.edges)).encode())
        return h.hexdigest()[:16]

    def neighbors(self, v: int) -> np.ndarray:
        return self.terminus[self.origin == v]

    def __repr__(self):
        return (f"RegularGraph(V={self.n_vertices}, d={self.degree}, E={self.n_edges}, "
                f"mode={self.mode!r})")


def _expand(edge_list: Iterable[Sequence[int]]) -> list[tuple[int, int]]:
    out = []
    for item in edge_list:
        item = tuple(int(x) for x in item)
        if len(item) == 2:
            out.append(item)
        elif len(item) == 3:
            if item[2] < 1:
                raise GraphError(f"multiplicity must be positive, got {item}")
            out.extend([item[:2]] * item[2])
        else:
            raise GraphError(f"edge must be (i, j) or (i, j, multiplicity), got {item}")
    return out


def build_graph(edge_list, mode: str = SIMPLE, n_vertices: int | None = None,
                degree: int | None = None, regular: bool = True) -> RegularGraph:
    """Validate an edge list and return a :class:`RegularGraph`.

    Parameters
    ----------
    edge_list : iterable of (i, j) or (i, j, multiplicity)
    mode : {"simple", "multigraph"}
    n_vertices : int, optional
        Defaults to one more than the largest vertex index.
    degree : int, optional
        Required degree; inferred from vertex 0 when omitted.
    regular : bool
        When False, any degree sequence is accepted and ``degree`` is None.

    Raises
    ------
    OddProduct
        ``degree * n_vertices`` is odd.
    IllegalSimple
        Loop or parallel edge in simple mode.
    NonRegular
        Some vertex has the wrong degree, or d < 3 in simple mode.
    """
    if mode not in (SIMPLE, MULTIGRAPH):
        raise GraphError(f"mode must be 'simple' or 'multigraph', got {mode!r}")
    edges = _expand(edge_list)
    if n_vertices is None:
        n_vertices = 1 + max((max(e) for e in edges), default=-1)
    if n_vertices < 1:
        raise GraphError("graph needs at least one vertex")
    for i, j in edges:
        if not (0 <= i < n_vertices and 0 <= j < n_vertices):
            raise GraphError(f"vertex index out of range in edge ({i}, {j}) for V={n_vertices}")
    if regular and degree is not None and (degree * n_vertices) % 2:
        raise OddProduct(f"d*V = {degree}*{n_vertices} is odd")

    if mode == SIMPLE:
        seen = set()
        for i, j in edges:
            if i == j:
                raise IllegalSimple(f"loop at vertex {i} in simple mode")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise IllegalSimple(f"parallel edge {key} in simple mode")
            seen.add(key)

    g = RegularGraph(n_vertices, tuple(edges), None, mode == MULTIGRAPH)
    if not regular:
        return g
    d = int(g.degrees[0]) if degree is None else int(degree)
    bad = np.flatnonzero(g.degrees != d)
    if bad.size:
        v = int(bad[0])
        raise NonRegular(f"vertex {v} has degree {g.degrees[v]}, expected {d}")
    if mode == SIMPLE and d < 3:
        raise NonRegular(f"simple regular graphs need d >= 3, got d={d}")
    if d < 1:
        raise NonRegular("degree must be positive")
    return RegularGraph(n_vertices, tuple(edges), d, mode == MULTIGRAPH)


def _bfs_colors(g: RegularGraph):
    adj = [[] for _ in range(g.n_vertices)]
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    color = [-1] * g.n_vertices
    two_colorable = True
    components = 0
    for s in range(g.n_vertices):
        if color[s] >= 0:
            continue
        components += 1
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    two_colorable = False
    return components, two_colorable


def is_connected(g: RegularGraph) -> bool:
    return _bfs_colors(g)[0] == 1


def is_bipartite(g: RegularGraph) -> bool:
    """True iff the graph is 2-colourable (a loop makes it non-bipartite)."""
    return _bfs_colors(g)[1]


# -- decorations ------------------------------------------------------------

@dataclass(frozen=True)
class MagneticDecoration:
    """One phase per undirected edge; directed edge ``2k`` carries ``+phi_k``."""

    phases: np.ndarray
    graph_fingerprint: str

    def __post_init__(self):
        object.__setattr__(self, "phases", _frozen(np.array(self.phases, dtype=float)))

    @property
    def directed_phases(self) -> np.ndarray:
        out = np.empty(2 * len(self.phases))
        out[0::2] = self.phases
        out[1::2] = -self.phases
        return out

    def check(self, g: RegularGraph) -> None:
        if self.graph_fingerprint != g.fingerprint() or len(self.phases) != g.n_edges:
            raise DecorationMismatch("magnetic decoration was built for a different graph")


@dataclass(frozen=True)
class WeightDecoration:
    """One real weight per undirected edge with ``|W| <= 1``."""

    weights: np.ndarray
    graph_fingerprint: str

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if np.any(np.abs(w) > 1):
            raise ValueError("edge weights must satisfy |W| <= 1")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def directed_weights(self) -> np.ndarray:
        return np.repeat(self.weights, 2)

    def check(self, g: RegularGraph) -> None:
        if self.graph_fingerprint != g.fingerprint() or len(self.weights) != g.n_edges:
            raise DecorationMismatch("weight decoration was built for a different graph")


# -- file format ------------------------------------------------------------

def format_graph(g: RegularGraph) -> str:
    d = 0 if g.degree is None else g.degree
    lines = [f"{g.n_vertices} {d} {g.mode}"]
    lines += [f"{i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> RegularGraph:
    """Parse the ``V d mode`` header format; ``d = 0`` marks an irregular graph."""
    rows = [ln.split("#")[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or len(rows[0]) != 3:
        raise GraphError("graph file must start with a 'V d mode' header")
    V, d, mode = int(rows[0][0]), int(rows[0][1]), rows[0][2]
    edges = [tuple(int(x) for x in r) for r in rows[1:]]
    if d == 0:
        return build_graph(edges, mode=mode, n_vertices=V, regular=False)
    return build_graph(edges, mode=mode, n_vertices=V, degree=d)


def read_graph(path) -> RegularGraph:
    return parse_graph(Path(path).read_text())


def write_graph(g: RegularGraph, path) -> None:
    Path(path).write_text(format_graph(g))


# -- named graphs -----------------------------------------------------------

def complete_graph(n: int) -> RegularGraph:
    return build_graph([(i, j) for i in range(n) for j in range(i + 1, n)], n_vertices=n)


def complete_bipartite_graph(n: int) -> RegularGraph:
    return build_graph([(i, n + j) for i in range(n) for j in range(n)], n_vertices=2 * n)


def petersen_graph() -> RegularGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(outer + spokes + inner, n_vertices=10)


def disjoint_union(g: RegularGraph, h: RegularGraph) -> RegularGraph:
    shift = g.n_vertices
    edges = list(g.edges) + [(i + shift, j + shift) for i, j in h.edges]
    return build_graph(edges, mode=MULTIGRAPH if (g.multigraph or h.multigraph) else SIMPLE,
                       n_vertices=g.n_vertices + h.n_vertices,
                       degree=g.degree, regular=g.degree is not None and g.degree == h.degree)

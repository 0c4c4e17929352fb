"""Finite directed graphs: loading, structural predicates, paths, K-theory.

Graphs are immutable.  Vertex and edge ids are strings kept in document
order; path enumeration is lexicographic in edge ids so every report is
reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import networkx as nx
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors


class GraphError(ValueError):
    """Malformed graph document or invalid graph data."""


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    rng: str


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate edge id")
        vset = set(self.vertices)
        for e in self.edges:
            for end in (e.src, e.rng):
                if end not in vset:
                    raise GraphError(f"dangling endpoint {end!r} on edge {e.id!r}")

    # Graph identity is structural; lookups below are cached per instance.
    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertices, self.edges))

    @cached_property
    def src(self) -> dict[str, str]:
        return {e.id: e.src for e in self.edges}

    @cached_property
    def rng(self) -> dict[str, str]:
        return {e.id: e.rng for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append(e.id)
        return {v: tuple(sorted(es)) for v, es in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[str, ...]]:
        inc: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            inc[e.rng].append(e.id)
        return {v: tuple(sorted(es)) for v, es in inc.items()}

    @cached_property
    def sinks(self) -> frozenset[str]:
        return frozenset(v for v in self.vertices if not self.out_edges[v])

    @cached_property
    def sources(self) -> frozenset[str]:
        return frozenset(v for v in self.vertices if not self.in_edges[v])

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def is_sink(self, v: str) -> bool:
        return v in self.sinks

    def to_networkx(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.vertices)
        for e in self.edges:
            g.add_edge(e.src, e.rng, key=e.id)
        return g

    def to_document(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e.id, "src": e.src, "rng": e.rng} for e in self.edges],
        }


@dataclass(frozen=True)
class Path:
    """A path of edges; a length-0 path is the vertex ``vertex``."""

    edges: tuple[str, ...]
    vertex: str | None = None

    def __len__(self) -> int:
        return len(self.edges)

    def source(self, g: DirectedGraph) -> str:
        return g.src[self.edges[0]] if self.edges else self.vertex

    def range(self, g: DirectedGraph) -> str:
        return g.rng[self.edges[-1]] if self.edges else self.vertex

    def __str__(self):
        return ".".join(self.edges) if self.edges else f"<{self.vertex}>"


def make_path(g: DirectedGraph, edges: Iterable[str], vertex: str | None = None) -> Path:
    """Validate and build a path; raises ``GraphError`` when not composable."""
    edges = tuple(edges)
    for e in edges:
        if e not in g.src:
            raise GraphError(f"unknown edge {e!r}")
    for a, b in zip(edges, edges[1:]):
        if g.rng[a] != g.src[b]:
            raise GraphError(f"edges {a!r}, {b!r} do not compose")
    if not edges:
        if vertex not in g.vertex_index:
            raise GraphError(f"unknown vertex {vertex!r}")
        return Path((), vertex)
    return Path(edges, None)


# ---------------------------------------------------------------------------
# loading


def load_graph(document: str | Mapping) -> DirectedGraph:
    """Build a graph from a JSON string or an already-decoded mapping.

    >>> g = load_graph('{"vertices":["v"],"edges":[{"id":"e","src":"v","rng":"v"}]}')
    >>> len(g.edges)
    1
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GraphError(f"malformed document: {exc}") from exc
    if not isinstance(document, Mapping):
        raise GraphError("malformed document: top level must be an object")
    vertices = document.get("vertices")
    edges = document.get("edges")
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise GraphError("malformed document: 'vertices' must be a list of strings")
    if not isinstance(edges, list):
        raise GraphError("malformed document: 'edges' must be a list")
    parsed = []
    for rec in edges:
        if not isinstance(rec, Mapping) or set(rec) != {"id", "src", "rng"}:
            raise GraphError("malformed document: edge records need exactly id, src, rng")
        if not all(isinstance(rec[k], str) for k in ("id", "src", "rng")):
            raise GraphError("malformed document: edge fields must be strings")
        parsed.append(Edge(rec["id"], rec["src"], rec["rng"]))
    return DirectedGraph(tuple(vertices), tuple(parsed))


def load_graph_file(path) -> DirectedGraph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read())


def dump_graph(g: DirectedGraph) -> str:
    return json.dumps(g.to_document(), indent=2)


def cuntz_graph(n: int) -> DirectedGraph:
    """One vertex ``v`` with ``n`` loops labelled ``"1"``..``"n"``."""
    if n < 1:
        raise GraphError("need at least one loop")
    return DirectedGraph(("v",), tuple(Edge(str(i), "v", "v") for i in range(1, n + 1)))


def circle_graph() -> DirectedGraph:
    return DirectedGraph(("v",), (Edge("e", "v", "v"),))


def cycle_graph(n: int, prefix: str = "v") -> DirectedGraph:
    """Directed cycle v0 -> v1 -> ... -> v{n-1} -> v0 with edges e0..e{n-1}."""
    vs = tuple(f"{prefix}{i}" for i in range(n))
    es = tuple(Edge(f"e{i}", vs[i], vs[(i + 1) % n]) for i in range(n))
    return DirectedGraph(vs, es)


def adjacency_matrix(g: DirectedGraph) -> list[list[int]]:
    idx = g.vertex_index
    a = [[0] * len(g.vertices) for _ in g.vertices]
    for e in g.edges:
        a[idx[e.src]][idx[e.rng]] += 1
    return a


# ---------------------------------------------------------------------------
# structure


@dataclass
class StructuralReport:
    row_finite: bool
    locally_finite: bool
    has_sources: bool
    has_sinks: bool
    every_loop_has_no_exit: bool
    sources: list[str] = field(default_factory=list)
    sinks: list[str] = field(default_factory=list)
    exit_vertices: list[str] = field(default_factory=list)
    loops_with_exit: list[list[str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _cycle_vertices(g: DirectedGraph) -> set[str]:
    """Vertices lying on at least one cycle."""
    on_cycle: set[str] = set()
    ng = g.to_networkx()
    for comp in nx.strongly_connected_components(ng):
        if len(comp) > 1:
            on_cycle |= comp
        else:
            (v,) = comp
            if any(g.rng[e] == v for e in g.out_edges[v]):
                on_cycle.add(v)
    return on_cycle


def _cycle_through(g: DirectedGraph, v: str) -> list[str]:
    """Shortest loop (as edge ids) starting and ending at ``v``."""
    # BFS over edges, lexicographic tie-breaking
    frontier = [(e, [e]) for e in g.out_edges[v]]
    seen = set()
    while frontier:
        nxt = []
        for e, walk in frontier:
            w = g.rng[e]
            if w == v:
                return walk
            if w in seen:
                continue
            seen.add(w)
            nxt.extend((f, walk + [f]) for f in g.out_edges[w])
        frontier = nxt
    return []


def structural_report(g: DirectedGraph) -> StructuralReport:
    on_cycle = _cycle_vertices(g)
    exits = sorted((v for v in on_cycle if len(g.out_edges[v]) >= 2), key=g.vertex_index.get)
    return StructuralReport(
        row_finite=True,
        locally_finite=True,
        has_sources=bool(g.sources),
        has_sinks=bool(g.sinks),
        every_loop_has_no_exit=not exits,
        sources=[v for v in g.vertices if v in g.sources],
        sinks=[v for v in g.vertices if v in g.sinks],
        exit_vertices=exits,
        loops_with_exit=[_cycle_through(g, v) for v in exits],
    )


# ---------------------------------------------------------------------------
# paths


def iter_paths_with_range(g: DirectedGraph, v: str, k: int) -> Iterator[Path]:
    if v not in g.vertex_index:
        raise GraphError(f"unknown vertex {v!r}")
    if k < 0:
        raise ValueError("path length must be non-negative")
    if k == 0:
        yield Path((), v)
        return
    # build backwards, then sort for lexicographic order
    partial: list[tuple[str, ...]] = [()]
    ends = [v]
    for _ in range(k):
        new_partial, new_ends = [], []
        for suffix, w in zip(partial, ends):
            for e in g.in_edges[w]:
                new_partial.append((e,) + suffix)
                new_ends.append(g.src[e])
        partial, ends = new_partial, new_ends
    for p in sorted(partial):
        yield Path(p)


def paths_with_range(g: DirectedGraph, v: str, k: int) -> tuple[list[Path], int]:
    """All length-``k`` paths ending at ``v`` and their count ``|v|_k``."""
    paths = list(iter_paths_with_range(g, v, k))
    return paths, len(paths)


def count_paths_with_range(g: DirectedGraph, v: str, k: int) -> int:
    if v not in g.vertex_index:
        raise GraphError(f"unknown vertex {v!r}")
    counts = {w: 1 if w == v else 0 for w in g.vertices}
    for _ in range(k):
        counts = {w: sum(counts[g.rng[e]] for e in g.out_edges[w]) for w in g.vertices}
    return sum(counts.values())


def iter_paths(g: DirectedGraph, k: int) -> Iterator[Path]:
    """All paths of length exactly ``k`` in lexicographic edge order."""
    if k == 0:
        for v in g.vertices:
            yield Path((), v)
        return
    stack = [(e,) for e in sorted(g.src, reverse=True)]
    while stack:
        p = stack.pop()
        if len(p) == k:
            yield Path(p)
            continue
        for e in reversed(g.out_edges[g.rng[p[-1]]]):
            stack.append(p + (e,))


def downstream(g: DirectedGraph, sources: Iterable[str], w: str) -> bool:
    """True iff some path starts in ``sources`` and ends at ``w``."""
    start = set(sources)
    if w in start:
        return True
    seen = set(start)
    todo = list(start)
    while todo:
        v = todo.pop()
        for e in g.out_edges.get(v, ()):
            r = g.rng[e]
            if r == w:
                return True
            if r not in seen:
                seen.add(r)
                todo.append(r)
    return False


# ---------------------------------------------------------------------------
# single entry / K-theory


@dataclass(frozen=True)
class NLoop:
    n: int

    def __str__(self):
        return f"NLoop({self.n})"


@dataclass
class SingleEntryResult:
    single_entry: bool
    components: list[NLoop]
    reason: str = ""

    def __bool__(self):
        return self.single_entry


def single_entry_check(g: DirectedGraph) -> SingleEntryResult:
    """Every vertex receives exactly one edge and emits at least one.

    For a finite graph each weakly connected component of a single-entry
    graph is then a directed cycle, reported as ``NLoop(N)``.
    """
    for v in g.vertices:
        if len(g.in_edges[v]) != 1:
            return SingleEntryResult(False, [], f"vertex {v!r} receives {len(g.in_edges[v])} edges")
        if not g.out_edges[v]:
            return SingleEntryResult(False, [], f"vertex {v!r} is a sink")
    comps = nx.weakly_connected_components(g.to_networkx())
    loops = sorted((NLoop(len(c)) for c in comps), key=lambda x: x.n)
    return SingleEntryResult(True, loops)


@dataclass
class KTheoryResult:
    k0_free_rank: int
    k0_torsion: list[int]
    k1_rank: int
    invariant_factors: list[int]
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def ktheory_matrix(g: DirectedGraph) -> list[list[int]]:
    """``1 - A^t`` with rows over all vertices and columns over non-sinks."""
    a = adjacency_matrix(g)
    idx = g.vertex_index
    cols = [v for v in g.vertices if v not in g.sinks]
    return [
        [(1 if r == c else 0) - a[idx[c]][idx[r]] for c in cols]
        for r in g.vertices
    ]


def ktheory(g: DirectedGraph) -> KTheoryResult:
    """K_0 = coker(1 - A^t), K_1 = ker(1 - A^t) over the integers."""
    m = ktheory_matrix(g)
    rows = len(g.vertices)
    cols = rows - len(g.sinks)
    if cols == 0:
        factors: list[int] = []
    else:
        factors = [int(abs(f)) for f in invariant_factors(Matrix(m), domain=ZZ)]
    nonzero = [f for f in factors if f != 0]
    rank = len(nonzero)
    note = ""
    if g.sinks:
        note = "sink columns removed from 1 - A^t"
    return KTheoryResult(
        k0_free_rank=rows - rank,
        k0_torsion=[f for f in nonzero if f > 1],
        k1_rank=cols - rank,
        invariant_factors=nonzero,
        note=note,
    )


def relabel(g: DirectedGraph, vertex_order: Sequence[str]) -> DirectedGraph:
    """Same graph with vertices listed in ``vertex_order``."""
    if sorted(vertex_order) != sorted(g.vertices):
        raise GraphError("relabel needs a permutation of the vertices")
    return DirectedGraph(tuple(vertex_order), g.edges)

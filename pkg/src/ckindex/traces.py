"""Graph traces, the trace they induce, and the KMS state of O_n."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import networkx as nx

from .algebra import Element, GraphMismatch, mono_degree, raw_multiply, scale_by_degree
from .graph import DirectedGraph, cuntz_graph, structural_report
from .scalar import GaussianRational, ZERO


# ---------------------------------------------------------------------------
# graph traces


@dataclass(frozen=True)
class GraphTrace:
    graph: DirectedGraph
    weights: Mapping[str, Fraction]
    normalized: bool = True
    note: str = ""

    def __post_init__(self):
        for v in self.graph.vertices:
            w = self.weights.get(v)
            if w is None or w <= 0:
                raise ValueError(f"graph trace weight at {v!r} must be positive")
        bad = self.balance_defects()
        if bad:
            raise ValueError(f"balance equation fails at {bad}")

    def balance_defects(self) -> list[str]:
        g = self.graph
        return [
            v for v in g.vertices
            if g.out_edges[v]
            and self.weights[v] != sum(self.weights[g.rng[e]] for e in g.out_edges[v])
        ]

    def __getitem__(self, v: str) -> Fraction:
        return self.weights[v]

    def to_dict(self) -> dict[str, str]:
        return {v: _frac(self.weights[v]) for v in self.graph.vertices}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class NoFaithfulTrace:
    """No strictly positive graph trace exists; ``certificate`` says why."""

    reason: str
    certificate: dict = field(default_factory=dict)

    def __bool__(self):
        return False

    def to_dict(self) -> dict:
        return {"no_faithful_trace": True, "reason": self.reason, **self.certificate}


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def solve_graph_trace(g: DirectedGraph) -> GraphTrace | NoFaithfulTrace:
    """A faithful normalized graph trace, or the obstruction to one.

    A loop with an exit forces ``g(v) >= g(v) + (weight of the exit)`` around
    the loop, so no positive solution exists.  Otherwise each terminal strong
    component is a sink or an exit-free cycle; putting weight 1 on every
    vertex of those and summing downstream weights upstream gives the
    solution with unit weight on every terminal vertex.  When several
    terminal components exist the balance cone has one extreme ray per
    component; the returned trace is their normalized sum.
    """
    rep = structural_report(g)
    if not rep.every_loop_has_no_exit:
        return NoFaithfulTrace(
            "a loop has an exit",
            {"exit_vertices": rep.exit_vertices, "loops": rep.loops_with_exit},
        )
    ng = g.to_networkx()
    cond = nx.condensation(ng)
    members = cond.graph["mapping"]
    weights: dict[str, Fraction] = {}
    # reverse topological order: downstream first
    for comp in reversed(list(nx.topological_sort(cond))):
        verts = [v for v in g.vertices if members[v] == comp]
        if cond.out_degree(comp) == 0:
            for v in verts:
                weights[v] = Fraction(1)
            continue
        # a non-terminal component is a single vertex not on a cycle
        (v,) = verts
        weights[v] = sum((weights[g.rng[e]] for e in g.out_edges[v]), Fraction(0))
    total = sum(weights.values())
    normed = {v: weights[v] / total for v in g.vertices}
    terminal = sum(1 for c in cond.nodes if cond.out_degree(c) == 0)
    note = ""
    if terminal > 1:
        note = f"{terminal} terminal components; sum of their extreme rays, normalized"
    return GraphTrace(g, normed, True, note)


# ---------------------------------------------------------------------------
# states


class State:
    """Gauge-invariant functional on the algebra given by vertex data."""

    graph: DirectedGraph

    def mono_value(self, mu: tuple, v: str) -> Fraction:
        raise NotImplementedError

    def evaluate(self, a: Element) -> GaussianRational:
        if a.graph != self.graph:
            raise GraphMismatch("element and state belong to different graphs")
        acc = ZERO
        for (mu, nu, v), c in a.terms.items():
            if mu == nu:
                acc = acc + c * self.mono_value(mu, v)
        return acc

    __call__ = evaluate

    def inner(self, x: Element, y: Element) -> GaussianRational:
        """<x, y> = tau(x^* y)."""
        return self.evaluate(raw_multiply(x.adjoint(), y))


@dataclass(frozen=True, eq=False)
class InducedTrace(State):
    trace: GraphTrace

    @property
    def graph(self) -> DirectedGraph:
        return self.trace.graph

    def mono_value(self, mu, v):
        return self.trace.weights[v]


@dataclass(frozen=True, eq=False)
class CuntzKMS(State):
    """tau(S_mu S_nu^*) = delta_{mu,nu} n^(-|mu|) on O_n.

    ``base`` may supply the one-vertex graph with its own edge labels;
    the default labels the loops ``"1"``..``"n"``.
    """

    n: int
    base: DirectedGraph | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the KMS state needs n >= 2")
        g = self.base if self.base is not None else cuntz_graph(self.n)
        if not is_cuntz_graph(g) or len(g.edges) != self.n:
            raise ValueError(f"graph is not the one-vertex graph with {self.n} loops")
        object.__setattr__(self, "_graph", g)

    @property
    def graph(self) -> DirectedGraph:
        return self._graph

    def mono_value(self, mu, v):
        return Fraction(1, self.n ** len(mu))


def is_cuntz_graph(g: DirectedGraph) -> bool:
    return len(g.vertices) == 1 and bool(g.edges)


def evaluate(s: State, a: Element) -> GaussianRational:
    return s.evaluate(a)


def sigma_i(n: int, a: Element) -> Element:
    """sigma at t = i: S_mu S_nu^* -> n^(|mu|-|nu|) S_mu S_nu^*."""
    return scale_by_degree(a, lambda k: Fraction(n) ** k)


def kms_check(n: int, a: Element, b: Element, state: State | None = None) -> bool:
    """tau(ab) == tau(sigma_i(b) a) exactly."""
    tau = state or CuntzKMS(n)
    return tau(raw_multiply(a, b)) == tau(raw_multiply(sigma_i(n, b), a))


@dataclass
class TraceCheck:
    passed: bool
    tau_ab: GaussianRational
    tau_ba: GaussianRational

    def __bool__(self):
        return self.passed


def trace_property_check(s: State, a: Element, b: Element) -> TraceCheck:
    ab = s(raw_multiply(a, b))
    ba = s(raw_multiply(b, a))
    return TraceCheck(ab == ba, ab, ba)


def state_for(g: DirectedGraph) -> State:
    """Induced trace when a faithful graph trace exists, else the KMS state of O_n."""
    t = solve_graph_trace(g)
    if t:
        return InducedTrace(t)
    if is_cuntz_graph(g) and len(g.edges) >= 2:
        return CuntzKMS(len(g.edges), g)
    raise ValueError(f"no faithful state available: {t.reason}")


def is_gauge_invariant_on(s: State, a: Element) -> bool:
    deg0 = Element(a.graph, {m: c for m, c in a.terms.items() if mono_degree(m) == 0})
    return s(a) == s(deg0)

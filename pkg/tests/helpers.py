"""Random generators shared by the property tests (seeded, no global state)."""

from __future__ import annotations

import random
from fractions import Fraction

from ckindex.algebra import Element
from ckindex.graph import DirectedGraph, Edge, iter_paths, iter_paths_with_range
from ckindex.scalar import GaussianRational


def tree5() -> DirectedGraph:
    return DirectedGraph(
        ("v0", "v1", "v2", "v3", "v4"),
        (Edge("a", "v0", "v1"), Edge("b", "v0", "v2"), Edge("c", "v1", "v3"), Edge("d", "v1", "v4")),
    )


def random_scalar(rng: random.Random, complex_ok: bool = True) -> GaussianRational:
    re = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    im = Fraction(rng.randint(-2, 2), rng.randint(1, 3)) if complex_ok and rng.random() < 0.3 else 0
    if not re and not im:
        re = Fraction(1)
    return GaussianRational(re, im)


def random_monomial(rng: random.Random, g: DirectedGraph, max_len: int = 2) -> Element:
    v = rng.choice(g.vertices)
    l1, l2 = rng.randint(0, max_len), rng.randint(0, max_len)
    mus = [p.edges for p in iter_paths_with_range(g, v, l1)]
    nus = [p.edges for p in iter_paths_with_range(g, v, l2)]
    if not mus or not nus:
        return Element.vertex(g, v)
    return Element.monomial(g, rng.choice(mus), rng.choice(nus), v)


def random_element(rng: random.Random, g: DirectedGraph, terms: int = 3, max_len: int = 2,
                   complex_ok: bool = True) -> Element:
    out = Element.zero(g)
    for _ in range(rng.randint(1, terms)):
        out = out + random_monomial(rng, g, max_len).scale(random_scalar(rng, complex_ok))
    return out


def all_monomials(g: DirectedGraph, max_len: int):
    """Every S_mu S_nu^* with |mu|, |nu| <= max_len."""
    for v in g.vertices:
        for l1 in range(max_len + 1):
            for mu in iter_paths_with_range(g, v, l1):
                for l2 in range(max_len + 1):
                    for nu in iter_paths_with_range(g, v, l2):
                        yield mu.edges, nu.edges, v


def words(g: DirectedGraph, k: int):
    return [p.edges for p in iter_paths(g, k)]

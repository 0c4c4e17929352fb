import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ckindex.algebra import (
    Element,
    ElementMatrix,
    UnrepresentablePhase,
    commutator_with_D,
    expectation,
    from_text,
    gauge_act,
    gauge_component,
    normal_form,
    refine_to,
    to_text,
)
from ckindex.graph import circle_graph, cuntz_graph, cycle_graph
from ckindex.scalar import GaussianRational

from helpers import random_element, tree5

GRAPHS = {"O2": cuntz_graph(2), "O3": cuntz_graph(3), "circle": circle_graph(),
          "cycle3": cycle_graph(3), "tree": tree5()}

seeds = st.integers(min_value=0, max_value=10**6)


def _three(seed, g):
    r = random.Random(seed)
    return random_element(r, g), random_element(r, g), random_element(r, g)


# ---------------------------------------------------------------------------
# concrete representations used as an independent oracle


def _matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m)), GaussianRational(0)) for j in range(p)]
            for i in range(n)]


def _concrete(g, z):
    """Matrices for p_v and S_e.

    Graphs with one edge in and out of each vertex are sent to C^V with
    S_e = z |s(e)><r(e)|; acyclic graphs act on paths ending in a sink.
    """
    if all(len(g.in_edges[v]) == 1 and len(g.out_edges[v]) == 1 for v in g.vertices):
        basis = [(v,) for v in g.vertices]
        pos = {b: i for i, b in enumerate(basis)}
        zero = lambda: [[GaussianRational(0)] * len(basis) for _ in basis]
        P, S = {}, {}
        for v in g.vertices:
            M = zero()
            M[pos[(v,)]][pos[(v,)]] = GaussianRational(1)
            P[v] = M
        for e in g.edges:
            M = zero()
            M[pos[(e.src,)]][pos[(e.rng,)]] = z
            S[e.id] = M
        return P, S
    paths = []

    def walk(prefix, v):
        if not g.out_edges[v]:
            paths.append((tuple(prefix), v))
        for e in g.out_edges[v]:
            walk(prefix + [e], g.rng[e])  # out_edges holds ids

    for v in g.vertices:
        walk([], v)
    start = lambda p: g.src[p[0][0]] if p[0] else p[1]
    pos = {p: i for i, p in enumerate(paths)}
    zero = lambda: [[GaussianRational(0)] * len(paths) for _ in paths]
    P, S = {}, {}
    for v in g.vertices:
        M = zero()
        for p in paths:
            if start(p) == v:
                M[pos[p]][pos[p]] = GaussianRational(1)
        P[v] = M
    for e in g.edges:
        M = zero()
        for p in paths:
            if start(p) == e.rng:
                M[pos[((e.id,) + p[0], p[1])]][pos[p]] = GaussianRational(1)
        S[e.id] = M
    return P, S


def _image(a, P, S):
    size = len(next(iter(P.values())))
    out = [[GaussianRational(0)] * size for _ in range(size)]
    for (mu, nu, v), c in a.items():
        M = P[v]
        for e in reversed(mu):
            M = _matmul(S[e], M)
        for e in reversed(nu):
            Sd = [[S[e][j][i].conjugate() for j in range(size)] for i in range(size)]
            M = _matmul(M, Sd)
        out = [[out[i][j] + c * M[i][j] for j in range(size)] for i in range(size)]
    return out


@pytest.mark.parametrize("name", ["circle", "cycle3", "tree"])
def test_products_match_concrete_representation(name):
    g = GRAPHS[name]
    P, S = _concrete(g, GaussianRational(0, 1) if name != "tree" else GaussianRational(1))
    r = random.Random(name)
    for _ in range(30):
        a, b = random_element(r, g), random_element(r, g)
        assert _image(a * b, P, S) == _matmul(_image(a, P, S), _image(b, P, S))
        adj = _image(a, P, S)
        assert _image(a.adjoint(), P, S) == [[adj[j][i].conjugate() for j in range(len(adj))]
                                              for i in range(len(adj))]


# ---------------------------------------------------------------------------
# algebraic properties


def test_basic_relations_o2():
    g = GRAPHS["O2"]
    s1, s2 = Element.s(g, ["1"]), Element.s(g, ["2"])
    assert s1.adjoint() * s1 == Element.unit(g)
    assert s1.adjoint() * s2 == Element.zero(g)
    assert s1 * s1.adjoint() + s2 * s2.adjoint() == Element.unit(g)
    assert (s1 * s2.adjoint()) * (s2 * s1.adjoint()) == Element.projection(g, ["1"])


def test_sink_does_not_refine():
    g = GRAPHS["tree"]
    p = Element.vertex(g, "v2")
    assert normal_form(p) == p
    # S_b stops at the sink v2 while S_a refines once more
    assert len(refine_to(Element.vertex(g, "v0"), 3).terms) == 3


@pytest.mark.parametrize("name", list(GRAPHS))
@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_ring_axioms(name, seed):
    g = GRAPHS[name]
    a, b, c = _three(seed, g)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a * b).adjoint() == b.adjoint() * a.adjoint()
    assert a.adjoint().adjoint() == a
    assert a * Element.unit(g) == a


@pytest.mark.parametrize("name", ["O2", "cycle3", "tree"])
@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_D_is_a_derivation(name, seed):
    g = GRAPHS[name]
    a, b, _ = _three(seed, g)
    assert commutator_with_D(a * b) == commutator_with_D(a) * b + a * commutator_with_D(b)


@pytest.mark.parametrize("name", ["O2", "O3", "circle"])
@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_expectation_is_conditional(name, seed):
    g = GRAPHS[name]
    a, b, c = _three(seed, g)
    fa, fc = expectation(a), expectation(c)
    assert expectation(fa * b * fc) == fa * expectation(b) * fc
    assert expectation(expectation(b)) == expectation(b)


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_degree_components(seed):
    g = GRAPHS["O2"]
    a, b, _ = _three(seed, g)
    total = sum((gauge_component(a, k) for k in range(-3, 4)), Element.zero(g))
    assert total == a
    for j in range(-2, 3):
        for k in range(-2, 3):
            prod = gauge_component(a, j) * gauge_component(b, k)
            assert prod.is_zero() or normal_form(prod).is_homogeneous(j + k)


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_gauge_quarter_turn_is_automorphism(seed):
    g = GRAPHS["O3"]
    a, b, _ = _three(seed, g)
    q = Fraction(1, 4)
    assert gauge_act(a * b, q) == gauge_act(a, q) * gauge_act(b, q)
    assert gauge_act(gauge_act(a, q), q) == gauge_act(a, Fraction(1, 2))


def test_unrepresentable_phase():
    with pytest.raises(UnrepresentablePhase):
        gauge_act(Element.unit(GRAPHS["O2"]), Fraction(1, 8))


@pytest.mark.parametrize("name", list(GRAPHS))
def test_text_round_trip(name):
    g = GRAPHS[name]
    r = random.Random(1)
    for _ in range(30):
        a = normal_form(random_element(r, g))
        assert from_text(g, to_text(a)) == a
    assert to_text(Element.zero(g)) == "0"


def test_element_matrix_unitary():
    g = GRAPHS["O2"]
    s1, s2 = Element.s(g, ["1"]), Element.s(g, ["2"])
    U = ElementMatrix(g, [[s1, s2], [Element.zero(g), Element.zero(g)]])
    assert not U.is_unitary()
    W = ElementMatrix(g, [[s1.adjoint(), s2.adjoint()], [Element.zero(g), Element.zero(g)]])
    assert (W * W.adjoint()).is_identity() is False
    V = ElementMatrix(g, [[s1, s2 * s1.adjoint()], [Element.zero(g), s2 * s2.adjoint()]])
    assert V.degrees() >= {1}
    assert ElementMatrix.identity(g, 2).is_unitary()


def test_elements_are_unhashable():
    with pytest.raises(TypeError):
        hash(Element.unit(GRAPHS["O2"]))


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_fixed_point_algebra_closed_and_degrees_add(seed):
    from helpers import random_monomial

    r = random.Random(seed)
    for g in (GRAPHS["O2"], GRAPHS["cycle3"]):
        f1 = expectation(random_element(r, g))
        f2 = expectation(random_element(r, g))
        prod = f1 * f2
        assert prod.is_zero() or normal_form(prod).is_homogeneous(0)
        a, b = random_monomial(r, g, 3), random_monomial(r, g, 3)
        p = a * b
        if not p.is_zero():
            (da,), (db,) = a.degrees(), b.degrees()
            assert normal_form(p).degrees() == {da + db}

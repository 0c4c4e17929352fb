import random
from fractions import Fraction

import numpy as np
import pytest

from ckindex.algebra import Element, normal_form
from ckindex.fock import (
    DegreeMultiplier,
    LeftMul,
    RepConfig,
    Theta,
    TruncatedOperator,
    TruncatedRep,
    WindowError,
    matrix_of_D,
    matrix_of_delta,
    matrix_of_left_mult,
    matrix_of_phi_k,
    phi_expansion,
    phi_op,
    positive_projection,
    tau_delta,
    tilde_tau,
)
from ckindex.graph import circle_graph, cuntz_graph, cycle_graph
from ckindex.traces import CuntzKMS, InducedTrace, solve_graph_trace

from helpers import random_element, random_monomial, tree5


def _rep(g, depth=3, k=None):
    t = solve_graph_trace(g)
    state = InducedTrace(t) if t else CuntzKMS(len(g.edges), g)
    k = depth if k is None else k
    return TruncatedRep(g, state, RepConfig(depth, -k, k))


REPS = {
    "O2": lambda: _rep(cuntz_graph(2), 3, 2),
    "cycle3": lambda: _rep(cycle_graph(3), 3),
    "tree": lambda: _rep(tree5(), 2),
}


@pytest.mark.parametrize("name", list(REPS))
def test_basis_is_orthogonal_with_positive_gram(name):
    rep = REPS[name]()
    assert all(q > 0 for q in rep.gram)
    st = rep.state
    for i in range(min(len(rep), 40)):
        for j in range(min(len(rep), 40)):
            val = st.inner(rep.element(i), rep.element(j))
            assert val == (rep.gram[i] if i == j else 0)


@pytest.mark.parametrize("name", list(REPS))
def test_projection_of_basis_vectors(name):
    rep = REPS[name]()
    for i in range(len(rep)):
        c, inside = rep.coords(rep.element(i))
        assert inside and c == {i: 1}


def test_projection_is_orthogonal():
    rep = REPS["O2"]()
    r = random.Random(0)
    g = rep.graph
    for _ in range(20):
        x = random_element(r, g, max_len=4)
        c, _ = rep.coords(x)
        y = sum((rep.element(i).scale(v) for i, v in c.items()), Element.zero(g))
        # the residual is orthogonal to every basis vector
        for i in range(len(rep)):
            assert rep.state.inner(rep.element(i), x - y) == 0


def test_D_and_Phi():
    rep = REPS["O2"]()
    D = matrix_of_D(rep)
    ks = list(rep.cfg.degrees())
    for k in ks:
        Pk = matrix_of_phi_k(rep, k)
        for l in ks:
            prod = Pk @ matrix_of_phi_k(rep, l)
            assert prod.equals(Pk if k == l else TruncatedOperator.zero(rep))
    total = sum((matrix_of_phi_k(rep, k).scale(k) for k in ks), TruncatedOperator.zero(rep))
    assert total.equals(D)
    assert (positive_projection(rep) @ positive_projection(rep)).equals(positive_projection(rep))


@pytest.mark.parametrize("name", list(REPS))
def test_left_multiplication_is_degree_covariant(name):
    rep = REPS[name]()
    r = random.Random(name)
    D = matrix_of_D(rep)
    for _ in range(10):
        a = random_monomial(r, rep.graph, 2)
        (m, _),  = a.items()
        k = len(m[0]) - len(m[1])
        L = matrix_of_left_mult(rep, a)
        cols = [j for j in range(len(rep)) if not L.boundary[j]]
        assert (D @ L - L @ D).equals(L.scale(k), cols)


@pytest.mark.parametrize("name", list(REPS))
def test_gram_adjoint_matches_adjoint_element(name):
    rep = REPS[name]()
    r = random.Random(name + "adj")
    for _ in range(10):
        a = random_element(r, rep.graph)
        L = matrix_of_left_mult(rep, a)
        La = matrix_of_left_mult(rep, a.adjoint())
        cols = [j for j in range(len(rep)) if not L.boundary[j] and not La.boundary[j]]
        # <e_i, L e_j> = <L_{a*} e_i, e_j> on columns and rows both operators see fully
        for i in cols:
            for j in cols:
                lhs = L.entry(i, j) * rep.gram[i]
                rhs = La.entry(j, i).conjugate() * rep.gram[j]
                assert lhs == rhs


def test_orthonormal_matrix_of_unitary_is_isometric_inside():
    g = cycle_graph(3)
    rep = _rep(g, 4)
    u = sum((Element.s(g, [e.id]) for e in g.edges), Element.zero(g))
    L = matrix_of_left_mult(rep, u)
    M = L.to_numpy(orthonormal=True)
    cols = [j for j in range(len(rep)) if not L.boundary[j]]
    G = M[:, cols].conj().T @ M[:, cols]
    assert np.allclose(G, np.eye(len(cols)))


def test_delta_matrix():
    rep = REPS["O2"]()
    Dl = matrix_of_delta(rep, 2)
    for j in range(len(rep)):
        assert Dl.entry(j, j) == Fraction(2) ** (-rep.degree_of[j])


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_phi_expansion_agrees_with_degree_projection(k):
    g = cuntz_graph(2)
    r = random.Random(k)
    for _ in range(10):
        x = random_element(r, g, max_len=3)
        assert normal_form(phi_expansion(g, k).apply(x)) == normal_form(phi_op(k).apply(x))


def test_tilde_tau_symbolic_and_matrix_routes():
    g = cuntz_graph(2)
    st = CuntzKMS(2)
    rep = TruncatedRep(g, st, RepConfig(3, -3, 3))
    for k in range(-3, 4):
        sym = tilde_tau(st, phi_op(k), 3)
        mat = tilde_tau(rep, matrix_of_phi_k(rep, k), 3)
        assert sym.value == mat.value == Fraction(2) ** k
        assert sym.partial_sums == mat.partial_sums
        assert tau_delta(rep, matrix_of_phi_k(rep, k), 3).value == 1


def test_tilde_tau_rejects_oversized_cutoff():
    rep = REPS["O2"]()
    with pytest.raises(WindowError):
        tilde_tau(rep, matrix_of_D(rep), 5)


def test_tilde_tau_partial_sums_monotone_for_positive_operator():
    g = circle_graph()
    st = InducedTrace(solve_graph_trace(g))
    rep = tilde_tau(st, DegreeMultiplier(lambda k: 1 if k >= 0 else 0), 6)
    assert rep.monotone and rep.value == 7


def test_circle_vertex_trace_per_degree():
    g = circle_graph()
    st = InducedTrace(solve_graph_trace(g))
    # p_v Phi_k has unit trace for every k on the circle
    for k in range(-4, 5):
        assert tilde_tau(st, LeftMul(Element.vertex(g, "v")) @ phi_op(k), abs(k)).value == 1


def test_tilde_tau_is_tracial_on_rank_one_operators():
    g = cycle_graph(3)
    st = InducedTrace(solve_graph_trace(g))
    r = random.Random(21)
    nonzero = 0
    def times_degree_zero(x):
        while True:
            m = random_monomial(r, g, 2)
            if m.degrees() == {0} and not (x * m).is_zero():
                return x * m

    for _ in range(40):
        x, y = random_monomial(r, g, 2), random_monomial(r, g, 2)
        # B built from A's vectors so that the products do not vanish identically
        A, B = Theta(x, y), Theta(times_degree_zero(y), times_degree_zero(x))
        ab = tilde_tau(st, A @ B, 5).value
        assert ab == tilde_tau(st, B @ A, 5).value
        nonzero += ab != 0
    assert nonzero >= 10

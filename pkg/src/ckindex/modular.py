"""Modular theory of the KMS state on O_n and the modular index pairing.

For the state tau(S_mu S_nu^*) = delta n^(-|mu|) the Tomita operators act on
monomials by explicit rescalings:

    S(a) = a^*
    F(S_mu S_nu^*) = n^(|mu|-|nu|) S_nu S_mu^*
    J(S_mu S_nu^*) = n^((|mu|-|nu|)/2) S_nu S_mu^*
    Delta(S_mu S_nu^*) = n^(|nu|-|mu|) S_mu S_nu^*

and the modular automorphism sigma(a) = Delta^-1 a Delta scales a degree-k
term by n^k.  Half-integer powers from J are carried exactly as a + b sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    Element,
    ElementMatrix,
    commutator_with_D,
    mono_degree,
    multiply,
    normal_form,
    raw_multiply,
    scale_by_degree,
    to_text,
    UnrepresentablePhase,
)
from .fock import (
    Compose,
    LeftMul,
    SymOp,
    TruncatedOperator,
    TruncatedRep,
    delta_inv_op,
    delta_op,
    matrix_of_delta,
    phi_op,
    tau_delta,
)
from .graph import DirectedGraph, GraphError, cuntz_graph
from .index import WindowTooSmall, stable_coefficients, zeta_residue, ResidueResult
from .scalar import GaussianRational, ZERO
from .traces import CuntzKMS, is_cuntz_graph


@dataclass(frozen=True)
class ModularSpec:
    n: int
    graph: DirectedGraph | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        g = self.graph if self.graph is not None else cuntz_graph(self.n)
        if not is_cuntz_graph(g) or len(g.edges) != self.n:
            raise ValueError("modular data is defined for the one-vertex graph with n loops")
        object.__setattr__(self, "graph", g)

    @property
    def state(self) -> CuntzKMS:
        return CuntzKMS(self.n, self.graph)

    @property
    def vertex(self) -> str:
        return self.graph.vertices[0]

    def edge(self, label: str) -> str:
        return label

    def path(self, word: str | Sequence[str]) -> tuple[str, ...]:
        """A path from a word: a string is split per character unless it is an edge id."""
        if isinstance(word, str):
            edges = (word,) if word in self.graph.src else tuple(word)
        else:
            edges = tuple(word)
        for e in edges:
            if e not in self.graph.src:
                raise GraphError(f"unknown edge {e!r}")
        return edges


# ---------------------------------------------------------------------------
# sigma and the Tomita operators


def sigma(spec: ModularSpec, a: Element) -> Element:
    """sigma(a) = Delta^-1 a Delta: a degree-k term is scaled by n^k."""
    return scale_by_degree(a, lambda k: Fraction(spec.n) ** k)


def sigma_inv(spec: ModularSpec, a: Element) -> Element:
    return scale_by_degree(a, lambda k: Fraction(spec.n) ** (-k))


def sigma_act(spec: ModularSpec, a: Element, t="i") -> Element:
    """sigma_t(S_mu S_nu^*) = n^(it(|nu|-|mu|)) S_mu S_nu^*.

    Exact for t = i (the regular automorphism), t = -i and t = 0; a real
    nonzero t gives the phase n^(it k), never a Gaussian rational.
    """
    if t == "i":
        return sigma(spec, a)
    if t == "-i":
        return sigma_inv(spec, a)
    if Fraction(t) == 0:
        return a
    raise UnrepresentablePhase(f"sigma_t for real t={t} has transcendental phases")


def S_op(a: Element) -> Element:
    return a.adjoint()


def F_op(spec: ModularSpec, a: Element) -> Element:
    n = Fraction(spec.n)
    return Element(a.graph, {(nu, mu, v): c.conjugate() * n ** (len(mu) - len(nu))
                             for (mu, nu, v), c in a.terms.items()})


def Delta_op(spec: ModularSpec, a: Element) -> Element:
    """Delta acting on a as a vector."""
    return sigma_inv(spec, a)


@dataclass
class SqrtElement:
    """Element with coefficients a + b sqrt(n), a and b Gaussian rationals."""

    graph: DirectedGraph
    n: int
    terms: dict  # mono -> (a, b)

    def clean(self) -> "SqrtElement":
        return SqrtElement(self.graph, self.n,
                           {m: (a, b) for m, (a, b) in self.terms.items() if a or b})

    @classmethod
    def from_element(cls, a: Element, n: int) -> "SqrtElement":
        return cls(a.graph, n, {m: (c, ZERO) for m, c in a.terms.items()})

    def rational_part(self) -> Element | None:
        """The plain element when no sqrt(n) remains."""
        if any(b for _, b in self.terms.values()):
            return None
        return Element(self.graph, {m: a for m, (a, _) in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, SqrtElement):
            return NotImplemented
        # a + b sqrt(n) = 0 with a, b rational and n not a square forces a = b = 0;
        # for square n the root is folded into the rational part.
        r = math.isqrt(self.n)
        x, y = self._parts(r), other._parts(r)
        return all((p - q).is_zero() for p, q in zip(x, y))

    def _parts(self, r: int) -> tuple[Element, ...]:
        if r * r == self.n:
            return (Element(self.graph, {m: a + b * r for m, (a, b) in self.terms.items()}),)
        return (Element(self.graph, {m: a for m, (a, _) in self.terms.items()}),
                Element(self.graph, {m: b for m, (_, b) in self.terms.items()}))

    __hash__ = None

    def __str__(self):
        parts = []
        for m, (a, b) in sorted(self.terms.items()):
            coef = str(a) if not b else (f"({a} + {b}*sqrt({self.n}))" if a else f"{b}*sqrt({self.n})")
            parts.append(f"{coef} * {to_text(Element(self.graph, {m: 1}))}")
        return " + ".join(parts) or "0"


def _half_power(n: int, k: int) -> tuple[GaussianRational, GaussianRational]:
    """n^(k/2) as (a, b) with value a + b sqrt(n)."""
    q, r = divmod(k, 2)
    base = GaussianRational(Fraction(n) ** q)
    return (base, ZERO) if r == 0 else (ZERO, base)


def J_op(spec: ModularSpec, a: Element | SqrtElement) -> SqrtElement:
    """J(S_mu S_nu^*) = n^((|mu|-|nu|)/2) S_nu S_mu^*, antilinear."""
    n = spec.n
    src = a if isinstance(a, SqrtElement) else SqrtElement.from_element(a, n)
    out: dict = {}
    for (mu, nu, v), (x, y) in src.terms.items():
        p, q = _half_power(n, len(mu) - len(nu))
        xc, yc = x.conjugate(), y.conjugate()
        # (xc + yc r)(p + q r) with r^2 = n
        na = xc * p + yc * q * n
        nb = xc * q + yc * p
        key = (nu, mu, v)
        oa, ob = out.get(key, (ZERO, ZERO))
        out[key] = (oa + na, ob + nb)
    return SqrtElement(src.graph, n, out).clean()


@dataclass
class TomitaImages:
    S: Element
    F: Element
    J: SqrtElement
    FS_is_Delta: bool


def tomita_operators(spec: ModularSpec, a: Element) -> TomitaImages:
    s = S_op(a)
    f = F_op(spec, a)
    return TomitaImages(s, f, J_op(spec, a), F_op(spec, s) == Delta_op(spec, a))


def delta_matrix_dual_route(rep: TruncatedRep, spec: ModularSpec) -> TruncatedOperator:
    """Matrix of Delta built as F o S column by column."""
    cols = []
    for j in range(len(rep)):
        c, _ = rep.coords(F_op(spec, S_op(rep.element(j))))
        cols.append(c)
    return TruncatedOperator(rep, cols, None, "F S")


def delta_is_n_power_minus_D(rep: TruncatedRep, spec: ModularSpec) -> bool:
    return delta_matrix_dual_route(rep, spec) == matrix_of_delta(rep, spec.n)


# ---------------------------------------------------------------------------
# modular unitaries


@dataclass
class ModularUnitary:
    u: ElementMatrix
    verified: bool = False
    certificate: dict = field(default_factory=dict)
    shape: str = "general"
    v: Element | None = None

    @property
    def size(self) -> int:
        return self.u.size

    def to_dict(self) -> dict:
        return {"matrix": self.u.to_text(), "verified": self.verified,
                "certificate": self.certificate, "shape": self.shape}


@dataclass
class ModularCheck:
    modular: bool
    unitary: bool
    certificate: dict = field(default_factory=dict)

    def __bool__(self):
        return self.modular


def is_modular_unitary(spec: ModularSpec, u: ElementMatrix | Element) -> ModularCheck:
    U = u if isinstance(u, ElementMatrix) else ElementMatrix.scalar_element(u)
    us = U.adjoint()
    if not ((us * U).is_identity() and (U * us).is_identity()):
        return ModularCheck(False, False, {"reason": "not unitary"})
    for label, prod in (("u sigma(u*)", U * us.map(lambda x: sigma(spec, x))),
                        ("u* sigma(u)", us * U.map(lambda x: sigma(spec, x)))):
        for i, j, x in prod.entries():
            bad = sorted(k for k in normal_form(x).degrees() if k != 0)
            if bad:
                return ModularCheck(False, True, {
                    "reason": f"{label} has an entry outside the fixed-point algebra",
                    "entry": [i, j], "degrees": bad, "value": to_text(normal_form(x)),
                })
    return ModularCheck(True, True, {})


def _one(g):
    return Element.unit(g)


def build_u_v(spec: ModularSpec, v: Element) -> ModularUnitary:
    """u_v = [[1 - v^*v, v^*], [v, 1 - vv^*]] for a partial isometry v."""
    g = spec.graph
    vs = v.adjoint()
    p, q = vs * v, v * vs
    for name, e in (("v^*v", p), ("vv^*", q)):
        if not (e * e == e and e.adjoint() == e):
            raise ValueError(f"{name} is not a projection: v is not a partial isometry")
        if not normal_form(e).is_homogeneous(0):
            raise ValueError(f"{name} is not in the fixed-point algebra")
    for name, e in (("v sigma(v^*)", v * sigma(spec, vs)), ("v^* sigma(v)", vs * sigma(spec, v))):
        if not normal_form(e).is_homogeneous(0):
            raise ValueError(f"modular condition fails: {name} has nonzero degree")
    one = _one(g)
    U = ElementMatrix(g, [[one - p, vs], [v, one - q]])
    chk = is_modular_unitary(spec, U)
    if not chk:
        raise ValueError(f"u_v is not modular: {chk.certificate}")
    return ModularUnitary(U, True, chk.certificate, "u_v", v)


def build_u_mu_nu(spec: ModularSpec, mu, nu) -> ModularUnitary:
    """[[1 - P_mu, S_mu S_nu^*], [S_nu S_mu^*, 1 - P_nu]].

    Empty words are allowed and stand for the vertex, so P_() = 1.
    """
    g = spec.graph
    mu, nu = spec.path(mu), spec.path(nu)
    v = Element.monomial(g, nu, mu)  # S_nu S_mu^*, so v^* = S_mu S_nu^*
    out = build_u_v(spec, v)
    out.shape = "u_mu_nu"
    out.certificate = {"mu": list(mu), "nu": list(nu)}
    return out


# ---------------------------------------------------------------------------
# index: closed form and residue


@dataclass
class ClosedForm:
    value: Fraction
    nonnegative: bool
    in_lattice: bool


def in_lattice(n: int, x: Fraction) -> bool:
    """x in (n - 1) Z[1/n]."""
    y = Fraction(x) / (n - 1)
    d = y.denominator
    while d % n == 0:
        d //= n
    # the denominator may only contain primes dividing n
    while d > 1:
        g = math.gcd(d, n)
        if g == 1:
            return False
        d //= g
    return True


def modular_index_closed_form(spec: ModularSpec | int, len_mu: int, len_nu: int) -> ClosedForm:
    """(|mu| - |nu|)(n^-|nu| - n^-|mu|), asserted >= 0 and in (n-1) Z[1/n]."""
    n = spec.n if isinstance(spec, ModularSpec) else int(spec)
    val = (len_mu - len_nu) * (Fraction(1, n ** len_nu) - Fraction(1, n ** len_mu))
    nonneg = val >= 0
    lat = in_lattice(n, val)
    assert nonneg and lat, f"closed form {val} violates positivity or lattice membership"
    return ClosedForm(val, nonneg, lat)


@dataclass
class ModularResidue:
    value: float
    spread: float
    coefficients: dict
    residue: ResidueResult


def modular_residue_coefficients(spec: ModularSpec, u: ModularUnitary, depth: int) -> dict[int, Fraction]:
    """c_j = sum_i tau_Delta((u [D, u])_ii Phi_j), |j| up to the settling point."""
    if u.shape not in ("u_v", "u_mu_nu"):
        raise ValueError("the residue formula is only used for unitaries of the form u_v")
    U = u.u
    X = U * U.map(commutator_with_D)
    diag = [normal_form(X[i, i]) for i in range(U.size)]
    state = spec.state

    def coef(j: int) -> Fraction:
        total = Fraction(0)
        for x in diag:
            if x.is_zero():
                continue
            total += tau_delta(state, LeftMul(x) @ phi_op(j), abs(j)).value.real_value()
        return total

    return stable_coefficients(coef, U.support_length(), depth)


def modular_index_residue(spec: ModularSpec, u: ModularUnitary, depth: int) -> ModularResidue:
    """Half the residue at s=1 of sum_j c_j (1+j^2)^(-s/2)."""
    cs = modular_residue_coefficients(spec, u, depth)
    res = zeta_residue(cs)
    return ModularResidue(res.value / 2, res.spread / 2, {k: cs[k] for k in sorted(cs)}, res)


# ---------------------------------------------------------------------------
# twisted trace, conjugation, homotopy


@dataclass
class TwistedTraceCheck:
    holds: bool
    lhs: GaussianRational
    rhs: GaussianRational
    naive: GaussianRational  # tau_Delta(T2 T1), generally different

    def __bool__(self):
        return self.holds


def twisted_trace_check(spec: ModularSpec, T1: SymOp, T2: SymOp, cutoff: int) -> TwistedTraceCheck:
    """tau_Delta(T1 T2) == tau_Delta(Delta^-1 T2 Delta T1)."""
    st = spec.state
    lhs = tau_delta(st, T1 @ T2, cutoff).value
    rhs = tau_delta(st, Compose(delta_inv_op(spec.n), T2 @ Compose(delta_op(spec.n), T1)), cutoff).value
    naive = tau_delta(st, T2 @ T1, cutoff).value
    return TwistedTraceCheck(lhs == rhs, lhs, rhs, naive)


@dataclass
class ConjugationCheck:
    commutes: bool
    is_modular: bool
    consistent: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.consistent


def modular_conjugation_check(spec: ModularSpec, rep: TruncatedRep, u: ModularUnitary | ElementMatrix,
                              ) -> ConjugationCheck:
    """u Phi_j u^* commutes with Delta for every window j iff u is modular.

    Commuting with the diagonal Delta means u Phi_j u^* maps each degree-k
    basis vector to a degree-k vector; this is tested on every basis vector.
    """
    U = u.u if isinstance(u, ModularUnitary) else u
    us = U.adjoint()
    k = U.size
    failures = []
    for j in rep.cfg.degrees():
        ok = True
        for c in range(k):
            for b in range(len(rep)):
                x = rep.element(b)
                deg = rep.degree_of[b]
                # u^* applied to x placed in copy c, then Phi_j, then u
                mid = [Element._raw(rep.graph, {m: z for m, z in multiply(us[r, c], x).terms.items()
                                                if mono_degree(m) == j}) for r in range(k)]
                for r in range(k):
                    y = Element.zero(rep.graph)
                    for l in range(k):
                        y = y + raw_multiply(U[r, l], mid[l])
                    bad = normal_form(y).degrees() - {deg}
                    if bad:
                        ok = False
                        failures.append({"Q": f"Phi_{j}", "copy": c, "basis": rep.labels()[b],
                                         "degrees": sorted(bad)})
                        break
                if not ok:
                    break
            if not ok:
                break
    commutes = not failures
    modular = bool(is_modular_unitary(spec, U))
    return ConjugationCheck(commutes, modular, commutes == modular, failures)


def _rot(t: Fraction):
    d = 1 + t * t
    return (1 - t * t) / d, 2 * t / d


def _scalar_matrix(g, rows) -> ElementMatrix:
    return ElementMatrix(g, [[Element.scalar(g, x) for x in r] for r in rows])


@dataclass
class HomotopyCertificate:
    ok: bool
    samples: int
    endpoints_ok: bool
    failures: list = field(default_factory=list)
    closed_forms: tuple = ()

    def __bool__(self):
        return self.ok


def modular_homotopy_mu_nu(spec: ModularSpec, mu, nu, samples: int = 32) -> HomotopyCertificate:
    """Sampled path u_{mu,nu} ~ u_{nu,mu} through modular unitaries.

    First conjugate by the rotation R_theta, theta: 0 -> pi/2, then by
    diag(1, z) with z running along the unit circle from 1 to -1.  Cosines
    and sines are rational points (1-t^2, 2t)/(1+t^2) on the circle, so
    every sample is checked exactly.
    """
    g = spec.graph
    a = build_u_mu_nu(spec, mu, nu).u
    b = build_u_mu_nu(spec, nu, mu).u
    conj = []
    half = samples // 2
    for i in range(half):
        c, s = _rot(Fraction(i, half - 1) if half > 1 else Fraction(0))
        R = [[GaussianRational(c), GaussianRational(-s)], [GaussianRational(s), GaussianRational(c)]]
        conj.append(R)
    R90 = [[GaussianRational(0), GaussianRational(-1)], [GaussianRational(1), GaussianRational(0)]]
    rest = samples - half
    for i in range(rest):
        t = Fraction(i + 1, rest)  # z from 1 (excluded, already sampled) to -1
        # angle pi*t: rational point for the first quarter, times i for the second
        if t <= Fraction(1, 2):
            c, s = _rot(2 * t)
        else:
            c0, s0 = _rot(2 * t - 1)
            c, s = -s0, c0
        z = GaussianRational(c, s)
        Z = [[GaussianRational(1), GaussianRational(0)], [GaussianRational(0), z]]
        conj.append(_matmul2(Z, R90))
    failures = []
    pts = []
    for V in conj:
        Vm = _scalar_matrix(g, V)
        Vs = _scalar_matrix(g, [[V[j][i].conjugate() for j in range(2)] for i in range(2)])
        w = Vm * a * Vs
        pts.append(w)
        chk = is_modular_unitary(spec, w)
        if not chk:
            failures.append(chk.certificate)
    endpoints = pts[0] == a and pts[-1] == b
    cf = (modular_index_closed_form(spec, len(spec.path(mu)), len(spec.path(nu))).value,
          modular_index_closed_form(spec, len(spec.path(nu)), len(spec.path(mu))).value)
    return HomotopyCertificate(not failures and endpoints and cf[0] == cf[1], len(pts),
                               endpoints, failures, cf)


def _matmul2(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(2)), GaussianRational(0)) for j in range(2)]
            for i in range(2)]


def non_modular_example(spec: ModularSpec, mu="1", nu=None) -> ElementMatrix:
    """(3/5) + (4/5) i u_{mu,nu} with |mu| != |nu|: unitary but not modular."""
    mu_p = spec.path(mu)
    nu_p = spec.path(nu if nu is not None else mu_p + mu_p[:1])
    u = build_u_mu_nu(spec, mu_p, nu_p).u
    return u.map(lambda x: x * GaussianRational(0, Fraction(4, 5))) + \
        ElementMatrix.identity(spec.graph, 2).map(lambda x: x * Fraction(3, 5))

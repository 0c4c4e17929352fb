"""Exact symbolic algebra of the dense span of monomials S_mu S_nu^*.

A monomial is stored as ``(mu, nu, v)`` where ``mu`` and ``nu`` are tuples of
edge ids and ``v = r(mu) = r(nu)``; the vertex is kept so that vertex
projections ``p_v`` (both paths empty) and half-empty monomials need no
special casing.  Elements are finite maps monomial -> Gaussian rational.

Products are returned in *normal form*: inside each degree sector every
monomial whose range is not a sink is refined with
``S_mu S_nu^* = sum_{s(e)=r(mu)} S_{mu e} S_{nu e}^*`` until all of them share
the longest nu-length present in that sector.  Monomials of one sector at a
common depth are linearly independent, so an element is zero iff its normal
form has no terms.  Equality is decided that way.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .graph import DirectedGraph, GraphError, Path
from .scalar import GaussianRational, ONE, ScalarLike, ZERO

Mono = tuple[tuple[str, ...], tuple[str, ...], str]


class GraphMismatch(ValueError):
    """Operands live over different graphs."""


def _gr(c) -> GaussianRational:
    return c if isinstance(c, GaussianRational) else GaussianRational.coerce(c)


def mono_degree(m: Mono) -> int:
    return len(m[0]) - len(m[1])


def mono_sort_key(m: Mono):
    return (m[0], m[1], m[2])


def mono_mul(g: DirectedGraph, a: Mono, b: Mono) -> Mono | None:
    """Collapse ``(S_mu S_nu^*)(S_al S_be^*)`` to one monomial or ``None``."""
    mu, nu, v = a
    al, be, w = b
    ln, la = len(nu), len(al)
    if la >= ln:
        if ln:
            if al[:ln] != nu:
                return None
        elif la:
            if g.src[al[0]] != v:
                return None
        elif w != v:
            return None
        return (mu + al[ln:], be, w)
    # nu strictly longer than al
    if la:
        if nu[:la] != al:
            return None
    elif g.src[nu[0]] != w:
        return None
    return (mu, be + nu[la:], v)


def mono_adjoint(m: Mono) -> Mono:
    return (m[1], m[0], m[2])


def make_mono(g: DirectedGraph, mu: Sequence[str], nu: Sequence[str], v: str | None = None) -> Mono:
    """Validated monomial; ``v`` is needed only when both paths are empty.

    On a one-vertex graph the vertex of two empty paths is implied.
    """
    mu, nu = tuple(mu), tuple(nu)
    ends = set()
    for p in (mu, nu):
        if p:
            for e in p:
                if e not in g.src:
                    raise GraphError(f"unknown edge {e!r}")
            for x, y in zip(p, p[1:]):
                if g.rng[x] != g.src[y]:
                    raise GraphError(f"edges {x!r}, {y!r} do not compose")
            ends.add(g.rng[p[-1]])
    if not ends:
        if v is None and len(g.vertices) == 1:
            v = g.vertices[0]
        if v not in g.vertex_index:
            raise GraphError(f"unknown vertex {v!r}")
        ends.add(v)
    if len(ends) != 1 or (v is not None and v not in ends):
        raise GraphError("S_mu S_nu^* needs r(mu) = r(nu)")
    return (mu, nu, ends.pop())


class Element:
    """Finite linear combination of monomials with Gaussian-rational coefficients."""

    __slots__ = ("graph", "terms")
    __hash__ = None  # equality is algebraic, not structural

    def __init__(self, graph: DirectedGraph, terms: Mapping[Mono, ScalarLike] | None = None):
        self.graph = graph
        clean: dict[Mono, GaussianRational] = {}
        if terms:
            for m, c in terms.items():
                c = _gr(c)
                if c:
                    clean[m] = c
        self.terms = clean

    @classmethod
    def _raw(cls, graph, terms: dict) -> "Element":
        out = object.__new__(cls)
        out.graph = graph
        out.terms = terms
        return out

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, g: DirectedGraph) -> "Element":
        return cls._raw(g, {})

    @classmethod
    def unit(cls, g: DirectedGraph) -> "Element":
        return cls._raw(g, {((), (), v): ONE for v in g.vertices})

    @classmethod
    def vertex(cls, g: DirectedGraph, v: str) -> "Element":
        return cls._raw(g, {make_mono(g, (), (), v): ONE})

    @classmethod
    def monomial(cls, g: DirectedGraph, mu: Sequence[str], nu: Sequence[str] = (),
                 v: str | None = None, coeff: ScalarLike = 1) -> "Element":
        return cls(g, {make_mono(g, mu, nu, v): coeff})

    @classmethod
    def s(cls, g: DirectedGraph, path: Sequence[str] | Path) -> "Element":
        if isinstance(path, Path):
            return cls.monomial(g, path.edges, (), path.vertex)
        return cls.monomial(g, path, ())

    @classmethod
    def s_star(cls, g: DirectedGraph, path: Sequence[str] | Path) -> "Element":
        return cls.s(g, path).adjoint()

    @classmethod
    def projection(cls, g: DirectedGraph, path: Sequence[str]) -> "Element":
        """P_mu = S_mu S_mu^*."""
        return cls.monomial(g, path, path)

    @classmethod
    def scalar(cls, g: DirectedGraph, c: ScalarLike) -> "Element":
        return cls.unit(g) * c

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "Element"):
        if other.graph is not self.graph and other.graph != self.graph:
            raise GraphMismatch("operands belong to different graphs")

    def _lift(self, other) -> "Element | None":
        if isinstance(other, Element):
            self._check(other)
            return other
        try:
            c = _gr(other)
        except TypeError:
            return None
        return Element.unit(self.graph) * c

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in o.terms.items():
            s = terms.get(m, ZERO) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return Element._raw(self.graph, terms)

    __radd__ = __add__

    def __neg__(self):
        return Element._raw(self.graph, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def scale(self, c: ScalarLike) -> "Element":
        c = _gr(c)
        if not c:
            return Element.zero(self.graph)
        return Element._raw(self.graph, {m: c * x for m, x in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Element):
            return multiply(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Element.unit(self.graph)
        for _ in range(k):
            out = out * self
        return out

    def adjoint(self) -> "Element":
        return Element._raw(self.graph, {mono_adjoint(m): c.conjugate() for m, c in self.terms.items()})

    @property
    def star(self) -> "Element":
        return self.adjoint()

    # predicates -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not normal_form(self).terms

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, Element):
            self._check(other)
        else:
            other = self._lift(other)
            if other is None:
                return NotImplemented
        return (self - other).is_zero()

    def degrees(self) -> set[int]:
        return {mono_degree(m) for m in self.terms}

    def is_homogeneous(self, k: int | None = None) -> bool:
        ds = normal_form(self).degrees()
        if k is None:
            return len(ds) <= 1
        return ds <= {k}

    def support_length(self) -> int:
        """Longest path appearing in any term."""
        return max((max(len(m[0]), len(m[1])) for m in self.terms), default=0)

    def items(self) -> Iterator[tuple[Mono, GaussianRational]]:
        for m in sorted(self.terms, key=mono_sort_key):
            yield m, self.terms[m]

    def __len__(self):
        return len(self.terms)

    def map_coefficients(self, f) -> "Element":
        """New element with coefficient ``f(mono, c)`` on every term."""
        return Element(self.graph, {m: f(m, c) for m, c in self.terms.items()})

    # text -------------------------------------------------------------------
    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"Element({to_text(self)!r})"


# ---------------------------------------------------------------------------
# core operations


def raw_multiply(a: Element, b: Element) -> Element:
    """Product without normalization (used where only traces are taken)."""
    a._check(b)
    g = a.graph
    acc: dict[Mono, GaussianRational] = defaultdict(lambda: ZERO)
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            m = mono_mul(g, m1, m2)
            if m is not None:
                acc[m] = acc[m] + c1 * c2
    return Element._raw(g, {m: c for m, c in acc.items() if c})


def multiply(a: Element, b: Element) -> Element:
    return normal_form(raw_multiply(a, b))


def adjoint(a: Element) -> Element:
    return a.adjoint()


def refine_terms(g: DirectedGraph, terms: Mapping[Mono, GaussianRational],
                 depth: Mapping[int, int]) -> dict[Mono, GaussianRational]:
    """Expand each term until its nu-length reaches ``depth[degree]`` or it hits a sink."""
    out: dict[Mono, GaussianRational] = {}
    stack = list(terms.items())
    sinks = g.sinks
    while stack:
        (mu, nu, v), c = stack.pop()
        d = depth.get(len(mu) - len(nu), 0)
        if len(nu) >= d or v in sinks:
            key = (mu, nu, v)
            s = out.get(key)
            out[key] = c if s is None else s + c
            continue
        for e in g.out_edges[v]:
            stack.append(((mu + (e,), nu + (e,), g.rng[e]), c))
    return {m: c for m, c in out.items() if c}


def sector_depths(terms: Iterable[Mono]) -> dict[int, int]:
    depth: dict[int, int] = {}
    for m in terms:
        k = len(m[0]) - len(m[1])
        if len(m[1]) > depth.get(k, -1):
            depth[k] = len(m[1])
    return depth


def normal_form(a: Element) -> Element:
    """Uniform nu-depth per degree sector (sink-terminated terms excepted)."""
    terms = a.terms
    if not terms:
        return a
    depth = sector_depths(terms)
    g = a.graph
    if all(len(m[1]) == depth[mono_degree(m)] or m[2] in g.sinks for m in terms):
        return a
    return Element._raw(g, refine_terms(g, terms, depth))


def refine_to(a: Element, depth: int | Mapping[int, int]) -> Element:
    """Refine every sector to at least the given nu-depth."""
    cur = sector_depths(a.terms)
    if isinstance(depth, int):
        want = {k: max(depth, d) for k, d in cur.items()}
    else:
        want = {k: max(depth.get(k, 0), d) for k, d in cur.items()}
    return Element._raw(a.graph, refine_terms(a.graph, a.terms, want))


def gauge_component(a: Element, k: int) -> Element:
    """Phi_k: keep exactly the degree-k terms."""
    return Element._raw(a.graph, {m: c for m, c in a.terms.items() if mono_degree(m) == k})


def expectation(a: Element) -> Element:
    """Phi onto the fixed-point algebra, i.e. the degree-0 part."""
    return gauge_component(a, 0)


_PHASES = {
    Fraction(0): GaussianRational(1),
    Fraction(1, 4): GaussianRational(0, 1),
    Fraction(1, 2): GaussianRational(-1),
    Fraction(3, 4): GaussianRational(0, -1),
}


class UnrepresentablePhase(ValueError):
    pass


def root_of_unity(q) -> GaussianRational:
    q = Fraction(q) % 1
    try:
        return _PHASES[q]
    except KeyError:
        raise UnrepresentablePhase(
            f"e^(2 pi i q) for q={q} is not a Gaussian rational; use gauge_component"
        ) from None


def gauge_act(a: Element, q) -> Element:
    """gamma_z with z = e^(2 pi i q); only quarter turns are exact."""
    z = root_of_unity(q)
    return Element._raw(a.graph, {m: c * z ** mono_degree(m) for m, c in a.terms.items()})


def scale_by_degree(a: Element, f) -> Element:
    """Multiply each degree-k term by ``f(k)``."""
    cache: dict[int, GaussianRational] = {}
    out = {}
    for m, c in a.terms.items():
        k = mono_degree(m)
        if k not in cache:
            cache[k] = _gr(f(k))
        x = c * cache[k]
        if x:
            out[m] = x
    return Element._raw(a.graph, out)


def commutator_with_D(a: Element) -> Element:
    """[D, a], which multiplies each term by its degree."""
    return scale_by_degree(a, lambda k: k)


# ---------------------------------------------------------------------------
# canonical text


def path_text(p: tuple[str, ...]) -> str:
    return ".".join(p)


def mono_text(m: Mono) -> str:
    mu, nu, v = m
    if not mu and not nu:
        return f"p[{v}]"
    parts = []
    if mu:
        parts.append(f"S[{path_text(mu)}]")
    if nu:
        parts.append(f"S*[{path_text(nu)}]")
    return " ".join(parts)


def coeff_text(c: GaussianRational) -> str:
    s = str(c)
    return f"({s})" if c.re and c.im else s


def to_text(a: Element) -> str:
    if not a.terms:
        return "0"
    return " + ".join(f"{coeff_text(c)} * {mono_text(m)}" for m, c in a.items())


def from_text(g: DirectedGraph, text: str) -> Element:
    """Inverse of ``to_text`` (accepts the full expression grammar)."""
    from .expr import parse_element

    return parse_element(g, text, normalize=False)


# ---------------------------------------------------------------------------
# matrices over the algebra


class ElementMatrix:
    """Square matrix with Element entries."""

    __slots__ = ("graph", "rows")
    __hash__ = None

    def __init__(self, graph: DirectedGraph, rows: Sequence[Sequence[Element | ScalarLike]]):
        self.graph = graph
        size = len(rows)
        built = []
        for r in rows:
            if len(r) != size:
                raise ValueError("matrix over the algebra must be square")
            built.append([x if isinstance(x, Element) else Element.scalar(graph, x) for x in r])
        self.rows = built

    @property
    def size(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, g: DirectedGraph, k: int) -> "ElementMatrix":
        return cls(g, [[1 if i == j else 0 for j in range(k)] for i in range(k)])

    @classmethod
    def scalar_element(cls, a: Element) -> "ElementMatrix":
        return cls(a.graph, [[a]])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entries(self) -> Iterator[tuple[int, int, Element]]:
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                yield i, j, x

    def __mul__(self, other):
        if isinstance(other, ElementMatrix):
            k = self.size
            if other.size != k:
                raise ValueError("size mismatch")
            rows = []
            for i in range(k):
                row = []
                for j in range(k):
                    acc = Element.zero(self.graph)
                    for l in range(k):
                        acc = acc + raw_multiply(self.rows[i][l], other.rows[l][j])
                    row.append(normal_form(acc))
                rows.append(row)
            return ElementMatrix(self.graph, rows)
        return self.map(lambda x: x * other)

    def __rmul__(self, other):
        return self.map(lambda x: other * x)

    def __add__(self, other: "ElementMatrix"):
        return ElementMatrix(self.graph, [[a + b for a, b in zip(r1, r2)]
                                          for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: "ElementMatrix"):
        return self + other.map(lambda x: -x)

    def map(self, f) -> "ElementMatrix":
        return ElementMatrix(self.graph, [[f(x) for x in r] for r in self.rows])

    def adjoint(self) -> "ElementMatrix":
        k = self.size
        return ElementMatrix(self.graph, [[self.rows[j][i].adjoint() for j in range(k)] for i in range(k)])

    def __eq__(self, other):
        if not isinstance(other, ElementMatrix) or other.size != self.size:
            return NotImplemented
        return all(a == b for (_, _, a), (_, _, b) in zip(self.entries(), other.entries()))

    def is_identity(self) -> bool:
        return self == ElementMatrix.identity(self.graph, self.size)

    def is_unitary(self) -> bool:
        s = self.adjoint()
        return (s * self).is_identity() and (self * s).is_identity()

    def support_length(self) -> int:
        return max((x.support_length() for _, _, x in self.entries()), default=0)

    def degrees(self) -> set[int]:
        out: set[int] = set()
        for _, _, x in self.entries():
            out |= normal_form(x).degrees()
        return out

    def to_text(self) -> list[list[str]]:
        return [[to_text(x) for x in r] for r in self.rows]

    def __str__(self):
        return "[" + "; ".join(", ".join(r) for r in self.to_text()) + "]"

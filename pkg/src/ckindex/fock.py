"""Finite windows of the GNS space and the probe-sum trace.

The Hilbert space carries ``<x, y> = tau(x^* y)``.  A window of depth ``d``
and degrees ``[k_min, k_max]`` is spanned by the monomials S_mu S_nu^* with
``|nu| = d`` and ``|mu| = d + k`` (plus shorter ones ending at a sink).  They
are pairwise orthogonal, so the Gram matrix is diagonal.  Operators are
compressed by orthogonal projection onto the window; a column is flagged as
*boundary* when the image of its basis vector is not entirely inside.

Operators exist in two forms.  ``SymOp`` subclasses act on algebra elements
exactly and are cheap to probe at large depth; ``TruncatedOperator`` is the
sparse exact matrix of an operator on a window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .algebra import (
    Element,
    Mono,
    mono_degree,
    mono_sort_key,
    multiply,
    raw_multiply,
    refine_to,
    scale_by_degree,
)
from .graph import DirectedGraph, count_paths_with_range, iter_paths, iter_paths_with_range
from .scalar import GaussianRational, ONE, ZERO
from .traces import CuntzKMS, State


class WindowError(ValueError):
    """A requested vector or cutoff lies outside the representation window."""


class DegenerateGram(ValueError):
    pass


@dataclass(frozen=True)
class RepConfig:
    depth: int
    k_min: int
    k_max: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if not self.k_min <= 0 <= self.k_max:
            raise ValueError("degree window must contain 0")
        if self.depth < max(-self.k_min, self.k_max):
            raise ValueError("depth must be at least max(|k_min|, k_max)")

    @classmethod
    def symmetric(cls, depth: int, width: int | None = None) -> "RepConfig":
        w = depth if width is None else width
        return cls(depth, -w, w)

    def degrees(self) -> range:
        return range(self.k_min, self.k_max + 1)


# ---------------------------------------------------------------------------
# the window


class TruncatedRep:
    def __init__(self, graph: DirectedGraph, state: State, cfg: RepConfig):
        if state.graph != graph:
            raise ValueError("state belongs to another graph")
        self.graph = graph
        self.state = state
        self.cfg = cfg

    @property
    def depth(self) -> int:
        return self.cfg.depth

    def sector_basis(self, k: int) -> list[Mono]:
        g, d = self.graph, self.cfg.depth
        out: list[Mono] = []
        for v in g.vertices:
            for l in range(d + 1):
                if l < d and v not in g.sinks:
                    continue
                if l + k < 0:
                    continue
                nus = [p.edges for p in iter_paths_with_range(g, v, l)]
                if not nus:
                    continue
                mus = [p.edges for p in iter_paths_with_range(g, v, l + k)]
                out.extend((mu, nu, v) for mu in mus for nu in nus)
        out.sort(key=mono_sort_key)
        return out

    @cached_property
    def basis(self) -> list[Mono]:
        out: list[Mono] = []
        for k in self.cfg.degrees():
            out.extend(self.sector_basis(k))
        return out

    @cached_property
    def index(self) -> dict[Mono, int]:
        return {m: i for i, m in enumerate(self.basis)}

    @cached_property
    def gram(self) -> list[Fraction]:
        """Diagonal of the Gram matrix."""
        out = [self.norm2_mono(m) for m in self.basis]
        if any(x <= 0 for x in out):
            raise DegenerateGram("state is not faithful on the window")
        return out

    @cached_property
    def degree_of(self) -> list[int]:
        return [mono_degree(m) for m in self.basis]

    def __len__(self):
        return len(self.basis)

    def norm2_mono(self, m: Mono) -> Fraction:
        """<m, m> = tau(S_nu S_nu^*)."""
        return self.state.mono_value(m[1], m[2])

    def labels(self) -> list[str]:
        from .algebra import mono_text

        return [mono_text(m) for m in self.basis]

    def element(self, i: int) -> Element:
        return Element._raw(self.graph, {self.basis[i]: ONE})

    # coordinates ----------------------------------------------------------
    def project(self, x: Element) -> tuple[dict[Mono, GaussianRational], bool]:
        """Orthogonal projection onto the window as monomial -> coefficient.

        The flag says whether ``x`` lies entirely inside the window.
        """
        d = self.cfg.depth
        lo, hi = self.cfg.k_min, self.cfg.k_max
        y = refine_to(x, d)
        out: dict[Mono, GaussianRational] = {}
        inside = True
        for (al, be, w), c in y.terms.items():
            k = len(al) - len(be)
            if k < lo or k > hi:
                inside = False
                continue
            if len(be) <= d:
                key = (al, be, w)
            else:
                inside = False
                if al[d + k:] != be[d:]:
                    continue
                nu = be[:d]
                key = (al[: d + k], nu, self.graph.rng[nu[-1]] if nu else self.graph.src[be[0]])
                c = c * (self.state.mono_value(be, w) / self.norm2_mono(key))
            s = out.get(key)
            out[key] = c if s is None else s + c
        return {m: c for m, c in out.items() if c}, inside

    def coords(self, x: Element) -> tuple[dict[int, GaussianRational], bool]:
        proj, inside = self.project(x)
        idx = self.index
        return {idx[m]: c for m, c in proj.items()}, inside

    def inner(self, x: Element, y: Element) -> GaussianRational:
        return self.state.inner(x, y)

    def to_json(self) -> dict:
        return {
            "depth": self.cfg.depth,
            "degrees": [self.cfg.k_min, self.cfg.k_max],
            "basis": self.labels(),
            "gram": [_fs(q) for q in self.gram],
        }


def build_rep(g: DirectedGraph, s: State, cfg: RepConfig) -> TruncatedRep:
    rep = TruncatedRep(g, s, cfg)
    rep.gram  # materialize and check faithfulness
    return rep


def _fs(q) -> str:
    if isinstance(q, GaussianRational):
        return str(q)
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# symbolic operators


class SymOp:
    """Exact operator on algebra elements (the dense domain)."""

    def apply(self, x: Element) -> Element:
        raise NotImplementedError

    __call__ = lambda self, x: self.apply(x)

    def __matmul__(self, other: "SymOp") -> "SymOp":
        return Compose(self, other)

    def __add__(self, other: "SymOp") -> "SymOp":
        return SumOp((self, other))

    def __sub__(self, other: "SymOp") -> "SymOp":
        return SumOp((self, Scaled(GaussianRational(-1), other)))

    def __rmul__(self, c) -> "SymOp":
        return Scaled(GaussianRational.coerce(c), self)

    def __neg__(self):
        return Scaled(GaussianRational(-1), self)


@dataclass(frozen=True, eq=False)
class LeftMul(SymOp):
    a: Element

    def apply(self, x):
        return multiply(self.a, x)


@dataclass(frozen=True, eq=False)
class DegreeMultiplier(SymOp):
    """Acts on degree-k vectors by the scalar ``f(k)``."""

    f: Callable[[int], object]
    name: str = ""

    def apply(self, x):
        return scale_by_degree(x, self.f)


@dataclass(frozen=True, eq=False)
class Theta(SymOp):
    """Module rank-one operator z -> x Phi(y^* z)."""

    x: Element
    y: Element

    def apply(self, z):
        inner = raw_multiply(self.y.adjoint(), z)
        inner = Element._raw(z.graph, {m: c for m, c in inner.terms.items() if mono_degree(m) == 0})
        return multiply(self.x, inner)


@dataclass(frozen=True, eq=False)
class Compose(SymOp):
    outer: SymOp
    inner: SymOp

    def apply(self, x):
        return self.outer.apply(self.inner.apply(x))


@dataclass(frozen=True, eq=False)
class SumOp(SymOp):
    parts: tuple

    def apply(self, x):
        out = Element.zero(x.graph)
        for p in self.parts:
            out = out + p.apply(x)
        return out


@dataclass(frozen=True, eq=False)
class Scaled(SymOp):
    c: GaussianRational
    op: SymOp

    def apply(self, x):
        return self.op.apply(x).scale(self.c)


class Identity(SymOp):
    def apply(self, x):
        return x


def D_op() -> SymOp:
    return DegreeMultiplier(lambda k: k, "D")


def phi_op(k: int) -> SymOp:
    return DegreeMultiplier(lambda j, k=k: 1 if j == k else 0, f"Phi_{k}")


def positive_op() -> SymOp:
    return DegreeMultiplier(lambda j: 1 if j >= 0 else 0, "P")


def delta_op(n: int) -> SymOp:
    """Delta = n^(-D)."""
    return DegreeMultiplier(lambda j: Fraction(n) ** (-j), "Delta")


def delta_inv_op(n: int) -> SymOp:
    return DegreeMultiplier(lambda j: Fraction(n) ** j, "Delta^-1")


def phi_expansion(g: DirectedGraph, k: int) -> SymOp:
    """Rank-one expansion of Phi_k.

    ``Phi_k = sum_{|mu|=k} Theta_{S_mu, S_mu}`` for ``k >= 0`` and
    ``Phi_{-k} = sum_{|mu|=k} |r(mu)|_k^{-1} Theta_{S_mu^*, S_mu^*}``.
    """
    parts = []
    if k >= 0:
        for p in iter_paths(g, k):
            s = Element.s(g, p)
            parts.append(Theta(s, s))
    else:
        for p in iter_paths(g, -k):
            s = Element.s(g, p).adjoint()
            cnt = count_paths_with_range(g, p.range(g), -k)
            parts.append(Scaled(GaussianRational(Fraction(1, cnt)), Theta(s, s)))
    return SumOp(tuple(parts))


# ---------------------------------------------------------------------------
# matrices


class TruncatedOperator:
    """Exact sparse matrix over a window basis, stored by columns."""

    def __init__(self, rep: TruncatedRep, cols: Sequence[Mapping[int, GaussianRational]],
                 boundary: Sequence[bool] | None = None, name: str = ""):
        self.rep = rep
        self.cols = [dict(c) for c in cols]
        self.boundary = list(boundary) if boundary is not None else [False] * len(self.cols)
        self.name = name

    @property
    def size(self) -> int:
        return len(self.cols)

    @classmethod
    def from_symbolic(cls, rep: TruncatedRep, op: SymOp, name: str = "") -> "TruncatedOperator":
        cols, flags = [], []
        for j in range(len(rep)):
            c, inside = rep.coords(op.apply(rep.element(j)))
            cols.append(c)
            flags.append(not inside)
        return cls(rep, cols, flags, name)

    @classmethod
    def diagonal(cls, rep: TruncatedRep, f: Callable[[int], object], name: str = "") -> "TruncatedOperator":
        cols = []
        for j, k in enumerate(rep.degree_of):
            x = GaussianRational.coerce(f(k))
            cols.append({j: x} if x else {})
        return cls(rep, cols, None, name)

    @classmethod
    def identity(cls, rep: TruncatedRep) -> "TruncatedOperator":
        return cls.diagonal(rep, lambda k: 1, "1")

    @classmethod
    def zero(cls, rep: TruncatedRep) -> "TruncatedOperator":
        return cls(rep, [{} for _ in range(len(rep))], None, "0")

    def entry(self, i: int, j: int) -> GaussianRational:
        return self.cols[j].get(i, ZERO)

    def interior(self) -> list[int]:
        return [j for j, b in enumerate(self.boundary) if not b]

    # algebra ----------------------------------------------------------------
    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        cols = []
        for j, col in enumerate(other.cols):
            acc: dict[int, GaussianRational] = {}
            for l, b in col.items():
                for i, a in self.cols[l].items():
                    s = acc.get(i)
                    acc[i] = a * b if s is None else s + a * b
            cols.append({i: x for i, x in acc.items() if x})
        flags = [other.boundary[j] or any(self.boundary[l] for l in other.cols[j])
                 for j in range(len(cols))]
        return TruncatedOperator(self.rep, cols, flags)

    def __add__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        cols = []
        for a, b in zip(self.cols, other.cols):
            c = dict(a)
            for i, x in b.items():
                s = c.get(i, ZERO) + x
                if s:
                    c[i] = s
                else:
                    c.pop(i, None)
            cols.append(c)
        return TruncatedOperator(self.rep, cols, [x or y for x, y in zip(self.boundary, other.boundary)])

    def scale(self, c) -> "TruncatedOperator":
        c = GaussianRational.coerce(c)
        return TruncatedOperator(self.rep, [{i: c * x for i, x in col.items() if c * x}
                                            for col in self.cols], self.boundary)

    __rmul__ = scale

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def adjoint(self) -> "TruncatedOperator":
        """Adjoint for the Gram inner product: G^{-1} T^H G."""
        g = self.rep.gram
        cols: list[dict[int, GaussianRational]] = [{} for _ in self.cols]
        for j, col in enumerate(self.cols):
            for i, x in col.items():
                cols[i][j] = x.conjugate() * (g[i] / g[j])
        # a column of T^dagger touches the boundary when any row it reads from does
        flags = [False] * len(cols)
        for j, b in enumerate(self.boundary):
            if b:
                for i in self.cols[j]:
                    flags[i] = True
                flags[j] = True
        return TruncatedOperator(self.rep, cols, flags)

    def equals(self, other: "TruncatedOperator", columns: Iterable[int] | None = None) -> bool:
        js = range(self.size) if columns is None else columns
        return all(self.cols[j] == other.cols[j] for j in js)

    def __eq__(self, other):
        if not isinstance(other, TruncatedOperator):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def restrict(self, rows: Sequence[int], cols: Sequence[int]) -> list[list[GaussianRational]]:
        return [[self.entry(i, j) for j in cols] for i in rows]

    def apply_coords(self, x: Mapping[int, GaussianRational]) -> dict[int, GaussianRational]:
        acc: dict[int, GaussianRational] = {}
        for j, b in x.items():
            for i, a in self.cols[j].items():
                acc[i] = acc.get(i, ZERO) + a * b
        return {i: v for i, v in acc.items() if v}

    # export ---------------------------------------------------------------
    def to_numpy(self, orthonormal: bool = False) -> np.ndarray:
        n = self.size
        m = np.zeros((n, n), dtype=complex)
        for j, col in enumerate(self.cols):
            for i, x in col.items():
                m[i, j] = complex(x)
        if orthonormal:
            s = np.sqrt(np.array([float(q) for q in self.rep.gram]))
            m = (s[:, None] * m) / s[None, :]
        if not m.imag.any():
            m = m.real
        return m

    def to_json(self) -> dict:
        n = self.size
        return {
            "name": self.name,
            "basis": self.rep.labels(),
            "matrix": [[_fs(self.entry(i, j)) for j in range(n)] for i in range(n)],
            "boundary_columns": [j for j, b in enumerate(self.boundary) if b],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def matrix_of_D(rep: TruncatedRep) -> TruncatedOperator:
    return TruncatedOperator.diagonal(rep, lambda k: k, "D")


def matrix_of_phi_k(rep: TruncatedRep, k: int, verify_expansion: bool = True) -> TruncatedOperator:
    """Projection onto the degree-k block.

    For the KMS state of O_n and k < 0 the rank-one expansion of Phi_k is
    compressed as well and must agree exactly on the window.
    """
    m = TruncatedOperator.diagonal(rep, lambda j: 1 if j == k else 0, f"Phi_{k}")
    if verify_expansion and k < 0 and isinstance(rep.state, CuntzKMS):
        alt = TruncatedOperator.from_symbolic(rep, phi_expansion(rep.graph, k))
        if not alt.equals(m):
            raise AssertionError(f"rank-one expansion of Phi_{k} disagrees on the window")
    return m


def matrix_of_left_mult(rep: TruncatedRep, a: Element) -> TruncatedOperator:
    return TruncatedOperator.from_symbolic(rep, LeftMul(a), f"L({a})")


def matrix_of_delta(rep: TruncatedRep, n: int) -> TruncatedOperator:
    return TruncatedOperator.diagonal(rep, lambda k: Fraction(n) ** (-k), "Delta")


def positive_projection(rep: TruncatedRep) -> TruncatedOperator:
    return TruncatedOperator.diagonal(rep, lambda k: 1 if k >= 0 else 0, "P")


@dataclass
class NormReport:
    norm: float
    bound: int
    interior_columns: int
    ok: bool


def commutator_norm_check(rep: TruncatedRep, a: Element, tol: float = 1e-9) -> NormReport:
    """Largest singular value of [D, a] compressed to the interior columns."""
    degs = a.degrees()
    bound = max((abs(k) for k in degs), default=0)
    L = matrix_of_left_mult(rep, a)
    D = matrix_of_D(rep)
    C = D @ L - L @ D
    cols = [j for j in range(len(rep)) if not L.boundary[j]]
    if not cols:
        return NormReport(0.0, bound, 0, True)
    M = C.to_numpy(orthonormal=True)[:, cols]
    norm = float(np.linalg.norm(M, 2)) if M.size else 0.0
    return NormReport(norm, bound, len(cols), norm <= bound + tol)


# ---------------------------------------------------------------------------
# the probe-sum trace


@dataclass
class TraceReport:
    value: GaussianRational
    partial_sums: list[GaussianRational] = field(default_factory=list)
    monotone: bool = True

    def __float__(self):
        return float(self.value)


def probes(g: DirectedGraph, cutoff: int):
    """Yield ``(length, weight, vector)`` for the probe vectors up to ``cutoff``."""
    for v in g.vertices:
        yield 0, Fraction(1), Element.vertex(g, v)
    for L in range(1, cutoff + 1):
        counts: dict[str, int] = {}
        for p in iter_paths(g, L):
            s = Element.s(g, p)
            yield L, Fraction(1), s
            r = p.range(g)
            if r not in counts:
                counts[r] = count_paths_with_range(g, r, L)
            yield L, Fraction(1, counts[r]), s.adjoint()


def tilde_tau(rep_or_state, T, cutoff: int) -> TraceReport:
    """sum over |rho| <= cutoff of <S_rho, T S_rho> + |r(rho)|^{-1} <S_rho^*, T S_rho^*>.

    ``T`` may be a ``SymOp`` (then ``rep_or_state`` can be a bare state) or a
    ``TruncatedOperator`` whose window must contain every probe vector.
    """
    if isinstance(rep_or_state, TruncatedRep):
        state = rep_or_state.state
    else:
        state = rep_or_state
    g = state.graph
    by_len = [ZERO] * (cutoff + 1)
    if isinstance(T, TruncatedOperator):
        rep = T.rep
        if cutoff > rep.cfg.k_max or -cutoff < rep.cfg.k_min:
            raise WindowError("cutoff exceeds representation window")
        gram = rep.gram
        for L, w, x in probes(g, cutoff):
            cx, inside = rep.coords(x)
            if not inside:
                raise WindowError("probe vector outside the window")
            y = T.apply_coords(cx)
            val = ZERO
            for i, c in y.items():
                xi = cx.get(i)
                if xi is not None:
                    val = val + xi.conjugate() * c * gram[i]
            by_len[L] = by_len[L] + val * w
    else:
        for L, w, x in probes(g, cutoff):
            by_len[L] = by_len[L] + state.inner(x, T.apply(x)) * w
    partial, acc = [], ZERO
    for v in by_len:
        acc = acc + v
        partial.append(acc)
    monotone = all(p.is_real for p in partial) and all(
        a.re <= b.re for a, b in zip(partial, partial[1:])
    )
    return TraceReport(acc, partial, monotone)


def tau_delta(rep_or_state, T, cutoff: int, n: int | None = None) -> TraceReport:
    """tilde_tau(Delta T) for the KMS state of O_n."""
    state = rep_or_state.state if isinstance(rep_or_state, TruncatedRep) else rep_or_state
    if n is None:
        if not isinstance(state, CuntzKMS):
            raise ValueError("tau_Delta needs the KMS state of O_n")
        n = state.n
    if isinstance(T, TruncatedOperator):
        return tilde_tau(rep_or_state, matrix_of_delta(T.rep, n) @ T, cutoff)
    return tilde_tau(rep_or_state, Compose(delta_op(n), T), cutoff)

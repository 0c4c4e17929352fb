"""Index pairings: Toeplitz index, spectral flow, zeta residues, orientability.

Three routes to the same number.  Given a unitary u over the algebra:

* ``toeplitz_index``: tau-tilde mass of ker(PuP) minus that of coker(PuP),
  computed by exact linear algebra on a window where the compression is
  exact, and accepted only if it is the same at depths d and d+1.
* ``spectral_flow_crossings`` / ``spectral_flow_integral``: the path
  D_t = D + t u[D,u^*], by counting (weighted) eigenvalue crossings or by
  integrating the resolvent-type density.
* ``zeta_residue``: residue at s=1 of sum_k c_k (1+k^2)^(-s/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import mpmath
import numpy as np
from scipy import integrate

from .algebra import (
    Element,
    ElementMatrix,
    commutator_with_D,
    mono_degree,
    multiply,
    normal_form,
)
from .fock import (
    LeftMul,
    RepConfig,
    TruncatedOperator,
    TruncatedRep,
    phi_op,
    positive_projection,
    probes,
    tilde_tau,
)
from .graph import DirectedGraph, single_entry_check
from .linalg import nullspace, solve
from .scalar import GaussianRational, ONE, ZERO
from .traces import State

__all__ = [
    "positive_projection",
    "NotUnitary",
    "WindowTooSmall",
    "NotMeasurable",
    "BlockWindow",
    "toeplitz_index",
    "SpectralFlowPath",
    "spectral_flow_crossings",
    "spectral_flow_integral",
    "zeta_residue",
    "residue_of_element",
    "orientability_check",
    "IndexReport",
]


class NotUnitary(ValueError):
    pass


class WindowTooSmall(RuntimeError):
    """Truncation artefacts are visible: enlarge the depth."""


class NotMeasurable(RuntimeError):
    """Coefficients do not settle, so no residue can be read off."""


def as_matrix(u: Element | ElementMatrix) -> ElementMatrix:
    return u if isinstance(u, ElementMatrix) else ElementMatrix.scalar_element(u)


def check_unitary(u: ElementMatrix):
    if not u.is_unitary():
        raise NotUnitary("u^* u = u u^* = 1 fails")


def _max_beta(u: ElementMatrix) -> int:
    return max((len(m[1]) for _, _, x in u.entries() for m in x.terms), default=0)


# ---------------------------------------------------------------------------
# k copies of a window


class BlockWindow:
    """``k`` orthogonal copies of a window, for matrices over the algebra."""

    def __init__(self, rep: TruncatedRep, k: int):
        self.rep = rep
        self.k = k
        self.n1 = len(rep)

    def __len__(self):
        return self.k * self.n1

    @property
    def state(self) -> State:
        return self.rep.state

    @property
    def cfg(self) -> RepConfig:
        return self.rep.cfg

    @property
    def gram(self) -> list[Fraction]:
        return self.rep.gram * self.k

    @property
    def degree_of(self) -> list[int]:
        return self.rep.degree_of * self.k

    def labels(self) -> list[str]:
        base = self.rep.labels()
        if self.k == 1:
            return base
        return [f"{c}:{b}" for c in range(self.k) for b in base]

    def coords(self, xs: Sequence[Element | None]) -> tuple[dict[int, GaussianRational], bool]:
        out: dict[int, GaussianRational] = {}
        inside = True
        for c, x in enumerate(xs):
            if x is None:
                continue
            cx, ok = self.rep.coords(x)
            inside = inside and ok
            for i, v in cx.items():
                out[c * self.n1 + i] = v
        return out, inside

    def operator(self, u: ElementMatrix, columns: Sequence[int] | None = None) -> TruncatedOperator:
        """Compressed left multiplication by the matrix ``u``."""
        cols, flags = [], []
        wanted = set(range(len(self))) if columns is None else set(columns)
        for J in range(len(self)):
            if J not in wanted:
                cols.append({})
                flags.append(False)
                continue
            j, b = divmod(J, self.n1)
            bvec = self.rep.element(b)
            images = [multiply(u[i, j], bvec) for i in range(self.k)]
            c, inside = self.coords(images)
            cols.append(c)
            flags.append(not inside)
        return TruncatedOperator(self, cols, flags)

    def diagonal(self, f: Callable[[int], object]) -> TruncatedOperator:
        return TruncatedOperator.diagonal(self, f)

    def probe_coords(self, cutoff: int, lengths: Callable[[int, Element], bool] | None = None):
        """Probe vectors in every copy: yields (weight, coord dict)."""
        g = self.rep.graph
        for L, w, x in probes(g, cutoff):
            if lengths is not None and not lengths(L, x):
                continue
            cx, inside = self.rep.coords(x)
            if not inside:
                raise WindowTooSmall("probe vector outside the window")
            for c in range(self.k):
                yield w, {c * self.n1 + i: v for i, v in cx.items()}


# ---------------------------------------------------------------------------
# Toeplitz index


def _subspace_mass(vectors: list[dict[int, GaussianRational]], gram: Sequence[Fraction],
                   probe_list: list[tuple[Fraction, dict[int, GaussianRational]]]) -> Fraction:
    """tau-tilde of the orthogonal projection onto span(vectors)."""
    r = len(vectors)
    if r == 0:
        return Fraction(0)
    # A = N^H G N
    A = [[ZERO] * r for _ in range(r)]
    for a in range(r):
        for b in range(a, r):
            s = ZERO
            va, vb = vectors[a], vectors[b]
            for i, x in va.items():
                y = vb.get(i)
                if y is not None:
                    s = s + x.conjugate() * y * gram[i]
            A[a][b] = s
            A[b][a] = s.conjugate()
    B = []
    weights = []
    for w, x in probe_list:
        col = []
        for v in vectors:
            s = ZERO
            for i, c in x.items():
                y = v.get(i)
                if y is not None:
                    s = s + y.conjugate() * c * gram[i]
            col.append(s)
        if any(col):
            B.append(col)
            weights.append(w)
    if not B:
        return Fraction(0)
    Bm = [[B[p][a] for p in range(len(B))] for a in range(r)]
    X = solve(A, Bm)
    total = ZERO
    for p, w in enumerate(weights):
        s = ZERO
        for a in range(r):
            s = s + B[p][a].conjugate() * X[a][p]
        total = total + s * w
    return total.real_value()


def _kernel_mass(win: BlockWindow, u: ElementMatrix, dom_top: int) -> tuple[Fraction, int]:
    """Mass and dimension of ker(P u P) restricted to sectors [0, dom_top]."""
    degs = win.degree_of
    dom = [J for J in range(len(win)) if 0 <= degs[J] <= dom_top]
    T = win.operator(u, dom)
    for J in dom:
        if T.boundary[J]:
            raise WindowTooSmall("compression of u is not exact on the chosen domain")
    rows = sorted({i for J in dom for i in T.cols[J] if degs[i] >= 0})
    mat = [[T.cols[J].get(i, ZERO) for J in dom] for i in rows]
    ker = nullspace(mat, len(dom))
    vecs = [{dom[a]: x for a, x in enumerate(v) if x} for v in ker]
    probe_list = list(win.probe_coords(dom_top, lambda L, x: L <= dom_top and (L == 0 or _is_s(x))))
    return _subspace_mass(vecs, win.gram, probe_list), len(vecs)


def _is_s(x: Element) -> bool:
    (m,) = x.terms
    return mono_degree(m) > 0


@dataclass
class ToeplitzResult:
    index: Fraction
    ker_mass: Fraction
    coker_mass: Fraction
    ker_dim: int
    coker_dim: int
    depth: int
    stable: bool = True

    def to_dict(self) -> dict:
        return {
            "index": _fs(self.index),
            "ker_mass": _fs(self.ker_mass),
            "coker_mass": _fs(self.coker_mass),
            "ker_dim": self.ker_dim,
            "coker_dim": self.coker_dim,
            "depth": self.depth,
            "stable": self.stable,
        }


def _toeplitz_at(state: State, u: ElementMatrix, depth: int) -> ToeplitzResult:
    degs = u.degrees() or {0}
    spread = min(depth, max(abs(k) for k in degs))
    # negative sectors are kept so that images killed by P are not mistaken for leakage
    rep = TruncatedRep(state.graph, state, RepConfig(depth, -spread, depth))
    win = BlockWindow(rep, u.size)
    us = u.adjoint()
    top_u = depth - max(max(degs), 0)
    top_us = depth - max(-min(degs), 0)
    if top_u < 0 or top_us < 0:
        raise WindowTooSmall(f"depth {depth} cannot hold the degrees of u")
    km, kd = _kernel_mass(win, u, top_u)
    cm, cd = _kernel_mass(win, us, top_us)
    return ToeplitzResult(km - cm, km, cm, kd, cd, depth)


def toeplitz_index(state: State, u: Element | ElementMatrix, depth: int) -> ToeplitzResult:
    """tau-tilde(ker PuP) - tau-tilde(coker PuP), checked at depths d and d+1."""
    U = as_matrix(u)
    check_unitary(U)
    need = _max_beta(U)
    if depth < need:
        raise WindowTooSmall(f"depth {depth} is below the co-length {need} of u")
    a = _toeplitz_at(state, U, depth)
    b = _toeplitz_at(state, U, depth + 1)
    if a.index != b.index:
        raise WindowTooSmall(f"index {a.index} at depth {depth} but {b.index} at depth {depth + 1}")
    return a


# ---------------------------------------------------------------------------
# spectral flow


def vertex_diagonal(x: Element) -> dict[str, GaussianRational] | None:
    """Coefficients c_v when ``x == sum_v c_v p_v``, else ``None``."""
    g = x.graph
    x = normal_form(x)
    coeffs: dict[str, GaussianRational] = {}
    for (mu, nu, v), c in x.terms.items():
        if mu != nu:
            return None
        s = g.src[mu[0]] if mu else v
        if coeffs.setdefault(s, c) != c:
            return None
    cand = Element(g, {((), (), v): c for v, c in coeffs.items()})
    return coeffs if cand == x else None


@dataclass
class SpectralFlowPath:
    """D_t = D + shift + t X on the window of ``state``.

    ``X`` is an element (matrix size 1) or an ``ElementMatrix`` and acts by
    left multiplication; ``shift`` likewise.
    """

    state: State
    X: ElementMatrix
    shift: ElementMatrix | None = None

    @classmethod
    def from_unitary(cls, state: State, u: Element | ElementMatrix) -> "SpectralFlowPath":
        U = as_matrix(u)
        X = U * U.adjoint().map(commutator_with_D)
        return cls(state, X)

    @classmethod
    def affine(cls, state: State, c, shift=0) -> "SpectralFlowPath":
        """D + shift + t c for scalars."""
        g = state.graph
        X = ElementMatrix.scalar_element(Element.scalar(g, c))
        S = ElementMatrix.scalar_element(Element.scalar(g, shift))
        return cls(state, X, S)

    @property
    def size(self) -> int:
        return self.X.size

    def _shift(self) -> ElementMatrix:
        if self.shift is None:
            return ElementMatrix.identity(self.state.graph, self.size).map(lambda e: e * 0)
        return self.shift

    def is_self_adjoint(self) -> bool:
        return self.X == self.X.adjoint()

    def diagonal_data(self):
        """Per-copy vertex coefficients of (shift, X) when both are vertex-diagonal."""
        S = self._shift()
        out = []
        for i in range(self.size):
            for j in range(self.size):
                if i != j and (not normal_form(self.X[i, j]).is_zero()
                               or not normal_form(S[i, j]).is_zero()):
                    return None
            s = vertex_diagonal(S[i, i])
            x = vertex_diagonal(self.X[i, i])
            if s is None or x is None:
                return None
            if not all(c.is_real for c in list(s.values()) + list(x.values())):
                return None
            out.append((s, x))
        return out


@dataclass
class CrossingResult:
    value: Fraction | float
    exact: bool
    details: list = field(default_factory=list)

    def to_json(self):
        return _fs(self.value) if self.exact else float(self.value)


def _crossing_mass(state: State, v: str, k: int) -> Fraction:
    g = state.graph
    op = LeftMul(Element.vertex(g, v)) @ phi_op(k)
    return tilde_tau(state, op, abs(k)).value.real_value()


def spectral_flow_crossings(path: SpectralFlowPath, depth: int = 20, grid: int = 64,
                            max_refine: int = 12, tol: float = 1e-9) -> CrossingResult:
    """Signed tau-tilde weighted count of eigenvalues entering [0, inf).

    A branch counts when its sign bit (lambda >= 0) differs between t=0 and
    t=1, so D -> D-1 gives -tau-tilde(Phi_0) and D -> D+1 gives
    +tau-tilde(Phi_{-1}).
    """
    diag = path.diagonal_data()
    g = path.state.graph
    if diag is not None:
        total = Fraction(0)
        details = []
        for copy, (s, x) in enumerate(diag):
            for v in g.vertices:
                s0 = s.get(v, ZERO).re
                s1 = s0 + x.get(v, ZERO).re
                lo = math.floor(min(-s0, -s1)) - 1
                hi = math.ceil(max(-s0, -s1)) + 1
                for k in range(lo, hi + 1):
                    change = int(k + s1 >= 0) - int(k + s0 >= 0)
                    if change:
                        m = _crossing_mass(path.state, v, k)
                        total += change * m
                        details.append({"copy": copy, "vertex": v, "degree": k,
                                        "sign": change, "mass": _fs(m)})
        return CrossingResult(total, True, details)
    return _float_crossings(path, depth, grid, max_refine, tol)


def _float_setup(path: SpectralFlowPath, depth: int):
    rep = TruncatedRep(path.state.graph, path.state, RepConfig.symmetric(depth))
    win = BlockWindow(rep, path.size)
    X = win.operator(path.X).to_numpy(orthonormal=True)
    S = win.operator(path._shift()).to_numpy(orthonormal=True)
    D = np.diag(np.array(win.degree_of, dtype=float))
    sq = np.sqrt(np.array([float(q) for q in win.gram]))
    P = []
    W = []
    for w, cx in win.probe_coords(depth):
        vec = np.zeros(len(win), dtype=complex)
        for i, c in cx.items():
            vec[i] = complex(c) * sq[i]
        P.append(vec)
        W.append(float(w))
    P = np.array(P) if P else np.zeros((0, len(win)))
    X = (X + X.conj().T) / 2
    S = (S + S.conj().T) / 2
    return win, D + S, X, P, np.array(W)


def _nonneg_mass(H, P, W) -> float:
    lam, V = np.linalg.eigh(H)
    Q = V[:, lam >= 0]
    if Q.shape[1] == 0 or P.shape[0] == 0:
        return 0.0
    amp = np.abs(P.conj() @ Q) ** 2
    return float(W @ amp.sum(axis=1))


def _float_crossings(path, depth, grid, max_refine, tol) -> CrossingResult:
    win, D0, X, P, W = _float_setup(path, depth)
    ts = list(np.linspace(0.0, 1.0, grid + 1))

    def gap(t):
        lam = np.linalg.eigvalsh(D0 + t * X)
        return np.min(np.abs(lam)) if lam.size else 1.0

    # refine where an eigenvalue sits near 0 strictly inside the interval
    refined = [ts[0]]
    for a, b in zip(ts, ts[1:]):
        stack = [(a, b, 0)]
        while stack:
            lo, hi, lev = stack.pop()
            mid = (lo + hi) / 2
            if lev < max_refine and gap(mid) < tol * 1e3 and min(gap(lo), gap(hi)) > tol:
                stack.append((mid, hi, lev + 1))
                stack.append((lo, mid, lev + 1))
            else:
                refined.append(hi)
    refined = sorted(set(refined))
    masses = [_nonneg_mass(D0 + t * X, P, W) for t in refined]
    total = masses[-1] - masses[0]
    details = [{"t": t, "nonneg_mass": m} for t, m in zip(refined, masses)
               if t in (0.0, 1.0)]
    return CrossingResult(float(total), False, details)


def _c_const(m: int) -> float:
    """C_{m/2} = integral of (1+x^2)^(-m/2) over the line."""
    if m == 2:
        return math.pi
    return math.sqrt(math.pi) * math.gamma((m - 1) / 2) / math.gamma(m / 2)


@dataclass
class IntegralResult:
    value: float
    abserr: float
    contamination: float


def spectral_flow_integral(path: SpectralFlowPath, m: int = 2, depth: int = 20,
                           epsrel: float = 1e-6, contamination_limit: float = 0.05) -> IntegralResult:
    """(1/C_{m/2}) int_0^1 tau-tilde(X (1 + D_t^2)^(-m/2)) dt by adaptive quadrature."""
    if m < 2 or m % 2:
        raise ValueError("m must be an even integer >= 2")
    win, D0, X, P, W = _float_setup(path, depth)
    if not np.any(X):
        return IntegralResult(0.0, 0.0, 0.0)
    degs = np.array(win.degree_of)
    outer = np.abs(degs) >= depth - 1
    C = _c_const(m)

    def density(t, mask=None):
        lam, V = np.linalg.eigh(D0 + t * X)
        F = X @ (V * (1 + lam ** 2) ** (-m / 2)) @ V.conj().T
        if mask is not None:
            F = F * mask[:, None]
        vals = np.einsum("pi,ij,pj->p", P.conj(), F, P)
        return float(np.real(W @ vals))

    val, err = integrate.quad(density, 0.0, 1.0, epsrel=epsrel, limit=200)
    bnd, _ = integrate.quad(lambda t: abs(density(t, outer)), 0.0, 1.0, epsrel=1e-3, limit=50)
    contamination = bnd / C
    if err > 1e-3 * max(1.0, abs(val)):
        raise WindowTooSmall("quadrature did not converge")
    if contamination > contamination_limit:
        raise WindowTooSmall(f"boundary contamination {contamination:.3g} above {contamination_limit}")
    return IntegralResult(val / C, err / C, contamination)


# ---------------------------------------------------------------------------
# zeta residues


@dataclass
class ResidueResult:
    value: float
    spread: float
    tail: dict
    estimates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"value": self.value, "spread": self.spread}


def _aitken(x0: float, x1: float, x2: float) -> float | None:
    den = x2 - 2 * x1 + x0
    if not den:
        return None
    return x2 - (x2 - x1) ** 2 / den


def _tail_limit(seq: Sequence[Fraction]):
    """Limit of the coefficient tail: exact if constant, Aitken if geometric."""
    if len(seq) >= 3 and seq[-1] == seq[-2] == seq[-3]:
        return seq[-1], "constant"
    if len(seq) >= 4:
        x = [float(v) for v in seq[-4:]]
        d = [b - a for a, b in zip(x, x[1:])]
        if all(d) and all(abs(d[i + 1] / d[i]) < 0.9 for i in range(2)):
            a1, a2 = _aitken(*x[:3]), _aitken(*x[1:])
            if a1 is not None and a2 is not None and abs(a1 - a2) <= 1e-6 * max(1.0, abs(a2)):
                return a2, "geometric"
    raise NotMeasurable("coefficients do not stabilise at this cutoff")


def _mp(c) -> mpmath.mpf:
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpf(c)


def _tail_sum(s: mpmath.mpf, K: int, explicit: int = 50) -> mpmath.mpf:
    """sum_{k > K} (1 + k^2)^(-s/2)."""
    N = K + explicit
    acc = mpmath.fsum((1 + mpmath.mpf(k) ** 2) ** (-s / 2) for k in range(K + 1, N + 1))
    # (1+k^2)^(-s/2) = sum_j binom(-s/2, j) k^(-s-2j)
    j, term_sum = 0, mpmath.mpf(0)
    while True:
        b = mpmath.binomial(-s / 2, j)
        t = b * mpmath.zeta(s + 2 * j, N + 1)
        term_sum += t
        if abs(t) < mpmath.mpf(10) ** (-(mpmath.mp.dps - 2)) * max(1, abs(term_sum)) or j > 60:
            break
        j += 1
    return acc + term_sum


def zeta_residue(weights: Mapping[int, Fraction], tail: str = "auto",
                 eps: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4)) -> ResidueResult:
    """Residue at s=1 of f(s) = sum_k c_k (1+k^2)^(-s/2).

    The window coefficients are taken as given; beyond the largest |k| on
    each side the tail value is the detected limit of that side.
    ``tail="zero"`` assumes the coefficients vanish outside the window.
    """
    if not weights:
        return ResidueResult(0.0, 0.0, {"plus": "0", "minus": "0"})
    ks = sorted(weights)
    K = max(abs(ks[0]), abs(ks[-1]))
    plus = [Fraction(weights.get(k, 0)) for k in range(0, K + 1)]
    minus = [Fraction(weights.get(-k, 0)) for k in range(0, K + 1)]
    if tail == "zero":
        cp, cm, kinds = 0, 0, ("zero", "zero")
    else:
        cp, kp = _tail_limit(plus)
        cm, km = _tail_limit(minus)
        kinds = (kp, km)
    window = [(k, Fraction(weights.get(k, 0))) for k in range(-K, K + 1)]
    with mpmath.workdps(30):
        F = []
        for e in eps:
            s = 1 + mpmath.mpf(e)
            f = mpmath.fsum(_mp(c) * (1 + mpmath.mpf(k) ** 2) ** (-s / 2)
                            for k, c in window if c)
            if cp or cm:
                f += (_mp(cp) + _mp(cm)) * _tail_sum(s, K)
            F.append(mpmath.mpf(e) * f)
        # Richardson with ratio 10 between successive eps
        table = [F]
        ratio = mpmath.mpf(eps[0]) / eps[1]
        while len(table[-1]) > 1:
            prev = table[-1]
            p = len(table)
            table.append([(ratio ** p * prev[i + 1] - prev[i]) / (ratio ** p - 1)
                          for i in range(len(prev) - 1)])
        value = float(table[-1][0])
        spread = float(abs(table[-1][0] - table[-2][-1])) if len(table) > 1 else 0.0
    tail_info = {"plus": _tail_text(cp), "minus": _tail_text(cm), "kind": list(kinds), "K": K}
    return ResidueResult(value, spread, tail_info, [float(x) for x in F])


def _tail_text(c):
    return _fs(c) if isinstance(c, (Fraction, int)) else float(c)


def stable_coefficients(coef: Callable[[int], Fraction], support: int, cap: int,
                        run: int = 3) -> dict[int, Fraction]:
    """c_j for |j| = 0, 1, ... until ``run`` equal values beyond ``support`` on both sides.

    Raises ``WindowTooSmall`` when ``cap`` is reached first.
    """
    out: dict[int, Fraction] = {}
    j = 0
    while True:
        if j > cap:
            raise WindowTooSmall(f"coefficients not settled by |k| = {cap}")
        out[j] = coef(j)
        if j:
            out[-j] = coef(-j)
        if j >= support + run:
            ok = True
            for sgn in (1, -1):
                vals = [out[sgn * i] for i in range(j - run + 1, j + 1)]
                if any(v != vals[0] for v in vals):
                    ok = False
            if ok:
                return out
        j += 1


def residue_of_element(state: State, f: Element, depth: int, twisted: bool | None = None) -> tuple[ResidueResult, dict]:
    """Residue of k -> tau(f Phi_k) (tau-tilde, or tau_Delta for the KMS state)."""
    from .fock import tau_delta
    from .traces import CuntzKMS

    if twisted is None:
        twisted = isinstance(state, CuntzKMS)
    op = LeftMul(f)
    trace = tau_delta if twisted else tilde_tau

    def coef(k):
        return trace(state, op @ phi_op(k), abs(k)).value.real_value()

    cs = stable_coefficients(coef, f.support_length(), depth)
    return zeta_residue(cs), cs


# ---------------------------------------------------------------------------
# orientability


@dataclass
class OrientabilityResult:
    oriented: bool
    boundary_zero: bool | None
    pi_D_is_unit: bool
    pi_D: str
    boundary: str
    consistent_with_single_entry: bool

    def __bool__(self):
        return self.oriented

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def orientability_check(g: DirectedGraph, rep=None) -> OrientabilityResult:
    """b(c) and pi_D(c) for c = sum_e S_e^* (x) S_e."""
    pr = Element.zero(g)
    ss = Element.zero(g)
    for e in g.edges:
        pr = pr + Element.vertex(g, e.rng)
        ss = ss + Element.projection(g, [e.id])
    b = normal_form(pr - ss)
    boundary_zero = b.is_zero() if not g.sinks else None
    unit_ok = pr == Element.unit(g)
    in_one = all(len(g.in_edges[v]) == 1 for v in g.vertices)
    se = single_entry_check(g)
    consistent = unit_ok == in_one and (not se.single_entry or unit_ok)
    return OrientabilityResult(
        oriented=bool(boundary_zero) and unit_ok,
        boundary_zero=boundary_zero,
        pi_D_is_unit=unit_ok,
        pi_D=str(normal_form(pr)),
        boundary=str(b),
        consistent_with_single_entry=consistent,
    )


# ---------------------------------------------------------------------------
# reports


def _fs(q) -> str:
    if isinstance(q, GaussianRational):
        return str(q)
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass
class IndexReport:
    closed_form: Fraction | None = None
    toeplitz: Fraction | None = None
    crossings: Fraction | float | None = None
    crossings_exact: bool = True
    integral: float | None = None
    residue: ResidueResult | None = None
    agree: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def all_agree(self) -> bool:
        return all(self.agree.values())

    def to_dict(self) -> dict:
        return {
            "closed_form": None if self.closed_form is None else _fs(self.closed_form),
            "toeplitz": None if self.toeplitz is None else _fs(self.toeplitz),
            "crossings": None if self.crossings is None else (
                _fs(self.crossings) if self.crossings_exact else float(self.crossings)),
            "integral": self.integral,
            "residue": None if self.residue is None else self.residue.to_dict(),
            "agree": dict(self.agree),
            "notes": list(self.notes),
        }

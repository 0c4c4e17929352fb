"""Exact linear algebra over Q(i), backed by sympy's DomainMatrix."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from sympy import I as SYM_I, Rational
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .scalar import GaussianRational

Matrix = list[list[GaussianRational]]


def _is_real(rows: Sequence[Sequence[GaussianRational]]) -> bool:
    return all(x.is_real for r in rows for x in r)


def _to_dm(rows: Matrix, nrows: int, ncols: int) -> tuple[DomainMatrix, bool]:
    real = _is_real(rows)
    if real:
        dom = QQ
        data = [[QQ(x.re.numerator, x.re.denominator) for x in r] for r in rows]
    else:
        dom = QQ_I
        data = [[QQ_I.from_sympy(Rational(x.re.numerator, x.re.denominator)
                                 + SYM_I * Rational(x.im.numerator, x.im.denominator))
                 for x in r] for r in rows]
    return DomainMatrix(data, (nrows, ncols), dom), real


def _from_dom(x, real: bool) -> GaussianRational:
    if real:
        return GaussianRational(Fraction(int(x.numerator), int(x.denominator)))
    s = QQ_I.to_sympy(x)
    re, im = s.as_real_imag()
    return GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


def nullspace(rows: Matrix, ncols: int) -> list[list[GaussianRational]]:
    """Basis of {x : A x = 0} as a list of column vectors."""
    if ncols == 0:
        return []
    if not rows:
        return [[GaussianRational(1 if i == j else 0) for i in range(ncols)] for j in range(ncols)]
    dm, real = _to_dm(rows, len(rows), ncols)
    ns = dm.nullspace()
    out = []
    for r in ns.to_list():
        out.append([_from_dom(x, real) for x in r])
    return out


def solve(a: Matrix, b: Matrix) -> Matrix:
    """Solve A X = B for square invertible A."""
    n = len(a)
    m = len(b[0]) if b else 0
    if n == 0:
        return []
    da, r1 = _to_dm(a, n, n)
    db, r2 = _to_dm(b, n, m)
    real = r1 and r2
    if not real:
        da = da.convert_to(QQ_I)
        db = db.convert_to(QQ_I)
    x = da.lu_solve(db)
    return [[_from_dom(v, real) for v in r] for r in x.to_list()]


def rank(rows: Matrix, ncols: int) -> int:
    if not rows or ncols == 0:
        return 0
    dm, _ = _to_dm(rows, len(rows), ncols)
    return dm.rank()

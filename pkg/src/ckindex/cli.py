"""Command line interface: ``ckindex <command> [options]``.

Every command prints one JSON document on standard output and a short
human summary on standard error.  Exit codes: 0 success, 1 channels
disagree, 2 input error, 3 truncation instability, 4 precondition failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .algebra import Element, ElementMatrix, normal_form
from .expr import ExprError, parse_element
from .fock import (
    RepConfig,
    TruncatedOperator,
    build_rep,
    matrix_of_D,
    matrix_of_delta,
    matrix_of_left_mult,
    matrix_of_phi_k,
    positive_projection,
)
from .graph import GraphError, ktheory, load_graph_file, single_entry_check, structural_report
from .index import (
    IndexReport,
    NotMeasurable,
    NotUnitary,
    SpectralFlowPath,
    WindowTooSmall,
    as_matrix,
    check_unitary,
    orientability_check,
    residue_of_element,
    spectral_flow_crossings,
    spectral_flow_integral,
    toeplitz_index,
    zeta_residue,
    stable_coefficients,
)
from .modular import (
    ModularSpec,
    build_u_mu_nu,
    build_u_v,
    is_modular_unitary,
    modular_homotopy_mu_nu,
    modular_index_closed_form,
    modular_index_residue,
)
from .traces import CuntzKMS, InducedTrace, is_cuntz_graph, solve_graph_trace

EXIT_OK, EXIT_DISAGREE, EXIT_INPUT, EXIT_UNSTABLE, EXIT_PRECONDITION = 0, 1, 2, 3, 4

TOL_INTEGRAL = 0.05
TOL_RESIDUE = 5e-2
TOL_MODULAR = 0.01
TOL_DIXMIER = 1e-3


class Precondition(Exception):
    pass


def default_depth() -> int:
    raw = os.environ.get("CKINDEX_DEPTH_DEFAULT", "12")
    try:
        return int(raw)
    except ValueError:
        raise ExprError(f"CKINDEX_DEPTH_DEFAULT must be an integer, got {raw!r}") from None


def _fs(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _emit(doc: dict, summary: str) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    sys.stderr.write(summary.rstrip() + "\n")


def _state(g):
    t = solve_graph_trace(g)
    if t:
        return InducedTrace(t), "tracial"
    if is_cuntz_graph(g) and len(g.edges) >= 2:
        return CuntzKMS(len(g.edges), g), "modular"
    raise Precondition(f"no faithful trace ({t.reason}) and not a Cuntz graph")


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    g = load_graph_file(args.graph)
    rep = structural_report(g)
    se = single_entry_check(g)
    orient = orientability_check(g)
    trace = solve_graph_trace(g)
    doc = {
        "structure": rep.to_dict(),
        "single_entry": {"value": se.single_entry,
                         "classification": [str(c) for c in se.components],
                         "reason": se.reason},
        "orientability": orient.to_dict(),
        "trace": trace.to_dict(),
    }
    notes = []
    if not trace:
        notes.append(f"no faithful trace: {trace.reason}")
    doc["notes"] = notes
    cls = ", ".join(str(c) for c in se.components) or "not single-entry"
    _emit(doc, f"{'oriented' if orient.oriented else 'not oriented'}; {cls}"
          + (f"; {notes[0]}" if notes else ""))
    return EXIT_OK


def cmd_trace(args) -> int:
    g = load_graph_file(args.graph)
    t = solve_graph_trace(g)
    if not t:
        _emit(t.to_dict(), f"no faithful trace: {t.reason}")
        return EXIT_OK
    doc = {"weights": t.to_dict(), "note": t.note}
    if args.element:
        a = parse_element(g, args.element)
        doc["value"] = str(InducedTrace(t)(a))
    _emit(doc, "graph trace " + ", ".join(f"{v}={w}" for v, w in t.to_dict().items()))
    return EXIT_OK


def cmd_ktheory(args) -> int:
    g = load_graph_file(args.graph)
    k = ktheory(g)
    _emit(k.to_dict(), f"K0 = Z^{k.k0_free_rank} + torsion {k.k0_torsion}; K1 = Z^{k.k1_rank}")
    return EXIT_OK


def cmd_rep(args) -> int:
    g = load_graph_file(args.graph)
    state, _ = _state(g)
    d = args.depth if args.depth is not None else default_depth()
    kmin = -d if args.kmin is None else args.kmin
    kmax = d if args.kmax is None else args.kmax
    try:
        cfg = RepConfig(d, kmin, kmax)
    except ValueError as exc:
        raise ExprError(str(exc)) from exc
    rep = build_rep(g, state, cfg)
    op = args.operator
    if op is None:
        doc = rep.to_json()
    else:
        T = _rep_operator(rep, op)
        doc = {**rep.to_json(), "operator": T.to_json()}
    _emit(doc, f"window of {len(rep)} basis vectors at depth {d}")
    return EXIT_OK


def _rep_operator(rep, spec: str) -> TruncatedOperator:
    if spec == "D":
        return matrix_of_D(rep)
    if spec == "P":
        return positive_projection(rep)
    if spec == "Delta":
        if not isinstance(rep.state, CuntzKMS):
            raise Precondition("Delta needs the KMS state of O_n")
        return matrix_of_delta(rep, rep.state.n)
    if spec.startswith("phi:"):
        return matrix_of_phi_k(rep, int(spec[4:]))
    if spec.startswith("left:"):
        return matrix_of_left_mult(rep, parse_element(rep.graph, spec[5:]))
    raise ExprError(f"unknown operator {spec!r} (use D, P, Delta, phi:K, left:EXPR)")


def parse_unitary(g, text: str):
    """``umn:MU:NU``, ``uv:EXPR``, a JSON matrix of expressions, or an expression."""
    if text.startswith("umn:"):
        try:
            _, mu, nu = text.split(":")
        except ValueError:
            raise ExprError("unitary shorthand is umn:MU:NU") from None
        if not is_cuntz_graph(g):
            raise ExprError("umn shorthand needs a one-vertex graph")
        spec = ModularSpec(len(g.edges), g)
        try:
            return build_u_mu_nu(spec, mu, nu)
        except GraphError as exc:
            raise ExprError(str(exc)) from exc
    if text.startswith("uv:"):
        if not is_cuntz_graph(g):
            raise ExprError("uv shorthand needs a one-vertex graph")
        spec = ModularSpec(len(g.edges), g)
        try:
            return build_u_v(spec, parse_element(g, text[3:]))
        except ValueError as exc:
            raise Precondition(str(exc)) from exc
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            rows = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ExprError(f"matrix is not valid JSON: {exc}") from exc
        return ElementMatrix(g, [[parse_element(g, str(x)) for x in r] for r in rows])
    return parse_element(g, text)


def _tracial_pair(g, state, u, depth, channels) -> tuple[IndexReport, int]:
    U = as_matrix(u)
    try:
        check_unitary(U)
    except NotUnitary as exc:
        raise Precondition(str(exc)) from exc
    rep = IndexReport()
    path = SpectralFlowPath.from_unitary(state, U)
    if "toeplitz" in channels:
        rep.toeplitz = toeplitz_index(state, U, depth).index
    if "crossings" in channels:
        c = spectral_flow_crossings(path, depth=depth)
        rep.crossings, rep.crossings_exact = c.value, c.exact
    if "integral" in channels:
        rep.integral = spectral_flow_integral(path, m=2, depth=depth).value
    if "residue" in channels:
        X = path.X
        diag = [normal_form(X[i, i]) for i in range(X.size)]
        from .fock import LeftMul, phi_op, tilde_tau

        def coef(k):
            return sum((tilde_tau(state, LeftMul(x) @ phi_op(k), abs(k)).value.real_value()
                        for x in diag if not x.is_zero()), Fraction(0))

        cs = stable_coefficients(coef, U.support_length() + 1, depth)
        res = zeta_residue(cs)
        res.value, res.spread = res.value / 2, res.spread / 2
        rep.residue = res
    ref = rep.toeplitz if rep.toeplitz is not None else rep.crossings
    if rep.toeplitz is not None and rep.crossings is not None:
        if rep.crossings_exact:
            rep.agree["toeplitz=crossings"] = rep.toeplitz == rep.crossings
        else:
            rep.agree["toeplitz=crossings"] = abs(float(rep.toeplitz) - rep.crossings) < 1e-6
    if ref is not None:
        if rep.integral is not None:
            rep.agree["integral"] = abs(rep.integral - float(ref)) <= TOL_INTEGRAL
        if rep.residue is not None:
            rep.agree["residue"] = abs(rep.residue.value - float(ref)) <= TOL_RESIDUE
    return rep, EXIT_OK if rep.all_agree() else EXIT_DISAGREE


def _modular_pair(g, state, u, depth, channels) -> tuple[IndexReport, int]:
    spec = ModularSpec(state.n, g)
    mu_obj = u if hasattr(u, "shape") else None
    if mu_obj is None:
        chk = is_modular_unitary(spec, as_matrix(u))
        if not chk.unitary:
            raise Precondition("u is not unitary")
        raise Precondition("the modular pairing is computed for unitaries of the form u_v "
                           "(use umn:MU:NU or uv:EXPR)")
    rep = IndexReport()
    if mu_obj.shape == "u_mu_nu":
        mu, nu = mu_obj.certificate["mu"], mu_obj.certificate["nu"]
        rep.closed_form = modular_index_closed_form(spec, len(mu), len(nu)).value
    else:
        rep.notes.append("closed form is stated for u_{mu,nu} only")
    if "residue" in channels:
        r = modular_index_residue(spec, mu_obj, depth)
        from .index import ResidueResult

        rep.residue = ResidueResult(r.value, r.spread, r.residue.tail)
        if rep.closed_form is not None:
            rep.agree["residue"] = abs(r.value - float(rep.closed_form)) <= TOL_MODULAR
    skipped = [c for c in channels if c != "residue"]
    if skipped:
        rep.notes.append(f"channels {skipped} need a faithful trace; reported only for the residue")
    return rep, EXIT_OK if rep.all_agree() else EXIT_DISAGREE


def cmd_pair(args) -> int:
    g = load_graph_file(args.graph)
    state, route = _state(g)
    depth = args.depth if args.depth is not None else default_depth()
    u = parse_unitary(g, args.unitary)
    if route == "tracial":
        default = "toeplitz,crossings,integral,residue"
    else:
        default = "residue"
    channels = [c.strip() for c in (args.channels or default).split(",") if c.strip()]
    known = {"toeplitz", "crossings", "integral", "residue"}
    bad = [c for c in channels if c not in known]
    if bad:
        raise ExprError(f"unknown channels {bad}")
    if route == "tracial":
        if hasattr(u, "shape"):
            u = u.u
        rep, code = _tracial_pair(g, state, u, depth, channels)
    else:
        rep, code = _modular_pair(g, state, u, depth, channels)
    doc = {"route": route, "depth": depth, **rep.to_dict()}
    parts = [f"{k}={v}" for k, v in rep.to_dict().items() if v not in (None, {}, []) and k != "agree"]
    _emit(doc, f"{route} pairing at depth {depth}: " + "; ".join(parts)
          + ("  [agree]" if code == EXIT_OK else "  [DISAGREE]"))
    return code


def cmd_modular(args) -> int:
    if args.graph:
        g = load_graph_file(args.graph)
        if not is_cuntz_graph(g) or len(g.edges) < 2:
            raise Precondition("modular data needs the one-vertex graph with n >= 2 loops")
        spec = ModularSpec(len(g.edges), g)
    else:
        spec = ModularSpec(args.n)
    depth = args.depth if args.depth is not None else default_depth()
    try:
        u = build_u_mu_nu(spec, args.mu, args.nu)
    except GraphError as exc:
        raise ExprError(str(exc)) from exc
    mu, nu = spec.path(args.mu), spec.path(args.nu)
    cf = modular_index_closed_form(spec, len(mu), len(nu))
    res = modular_index_residue(spec, u, depth)
    hom = modular_homotopy_mu_nu(spec, mu, nu)
    agree = abs(res.value - float(cf.value)) <= TOL_MODULAR
    doc = {
        "n": spec.n,
        "mu": list(mu),
        "nu": list(nu),
        "unitary": u.to_dict(),
        "closed_form": _fs(cf.value),
        "nonnegative": cf.nonnegative,
        "in_lattice": cf.in_lattice,
        "residue": {"value": res.value, "spread": res.spread},
        "coefficients": {str(k): _fs(v) for k, v in res.coefficients.items()},
        "homotopy": {"ok": hom.ok, "samples": hom.samples, "closed_forms": [_fs(x) for x in hom.closed_forms]},
        "agree": agree,
    }
    _emit(doc, f"modular index {cf.value} (residue {res.value:.6f})")
    return EXIT_OK if agree and hom.ok else EXIT_DISAGREE


def cmd_residue(args) -> int:
    g = load_graph_file(args.graph)
    state, route = _state(g)
    depth = args.depth if args.depth is not None else default_depth()
    f = parse_element(g, args.element)
    res, cs = residue_of_element(state, f, depth)
    expected = 2 * state(f)
    expected_f = complex(expected)
    ok = abs(res.value - expected_f.real) <= TOL_DIXMIER and abs(expected_f.imag) <= TOL_DIXMIER
    doc = {
        "route": route,
        "element": str(f),
        "residue": res.to_dict(),
        "tail": res.tail,
        "expected": {"value": str(expected), "formula": "2 tau(f)"},
        "pass": ok,
    }
    _emit(doc, f"residue {res.value:.6f} vs 2 tau(f) = {expected}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_DISAGREE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ckindex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="structural predicates, single-entry, orientability")
    a.add_argument("--graph", required=True)
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("trace", help="faithful graph trace")
    t.add_argument("--graph", required=True)
    t.add_argument("--element", help="evaluate the induced trace on this element")
    t.set_defaults(func=cmd_trace)

    k = sub.add_parser("ktheory", help="K-groups from 1 - A^t")
    k.add_argument("--graph", required=True)
    k.set_defaults(func=cmd_ktheory)

    r = sub.add_parser("rep", help="window basis, Gram matrix and operator matrices")
    r.add_argument("--graph", required=True)
    r.add_argument("--depth", type=int)
    r.add_argument("--kmin", type=int)
    r.add_argument("--kmax", type=int)
    r.add_argument("--operator", help="D, P, Delta, phi:K or left:EXPR")
    r.set_defaults(func=cmd_rep)

    q = sub.add_parser("pair", help="index pairing through several channels")
    q.add_argument("--graph", required=True)
    q.add_argument("--unitary", required=True)
    q.add_argument("--depth", type=int)
    q.add_argument("--channels", help="comma list of toeplitz,crossings,integral,residue")
    q.set_defaults(func=cmd_pair)

    m = sub.add_parser("modular", help="modular index of u_{mu,nu} on O_n")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--n", type=int)
    m.add_argument("--mu", required=True)
    m.add_argument("--nu", required=True)
    m.add_argument("--depth", type=int)
    m.set_defaults(func=cmd_modular)

    z = sub.add_parser("residue", help="zeta residue of tau(f Phi_k) against 2 tau(f)")
    z.add_argument("--graph", required=True)
    z.add_argument("--element", required=True)
    z.add_argument("--depth", type=int)
    z.set_defaults(func=cmd_residue)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (GraphError, ExprError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (WindowTooSmall, NotMeasurable) as exc:
        sys.stderr.write(f"window too small: {exc}\n")
        return EXIT_UNSTABLE
    except (Precondition, NotUnitary) as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())

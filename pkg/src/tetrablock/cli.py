"""``tetra`` command line entry point.

Every subcommand prints one JSON document on stdout. Exit codes: 0 success,
1 falsified or a violated check, 2 usage or input errors, 3 numerical
degeneracy.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import harness
from .decomposition import canonical_decompose
from .errors import ParseError, TetraError
from .fundamental import adjoint_fundamentals, commutator_report, fundamental_operators
from .geometry import TetraPoint, bidisc_zero_oracle, in_bE, in_closed_E, in_open_E
from .io import dumps, emit_triple, graded_to_json, load_json, parse_triple
from .models import build_coisometry_model, build_dilation, verify_dilation
from .numkit import DEFAULT_TOL, ToleranceProfile
from .triples import OperatorTriple, classify

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3


def _cplx(z):
    return None if z is None else [float(z.real), float(z.imag)]


def _common() -> argparse.ArgumentParser:
    # SUPPRESS defaults so flags given after the subcommand don't get clobbered
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                   help="set every tolerance field to this value")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", default=argparse.SUPPRESS,
                     help="compact JSON output (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", default=argparse.SUPPRESS,
                     help="indented JSON output")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="tetra", parents=[common],
                                     description="Tetrablock contraction toolkit.")
    parser.set_defaults(tol=None, seed=0, pretty=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("geom", parents=[common], help="membership of a point in E, closed E and bE")
    g.add_argument("reals", nargs="*", type=float, help="x1 re, x1 im, x2 re, x2 im, x3 re, x3 im")
    g.add_argument("--file", help="JSON point: [[re,im],[re,im],[re,im]] or {x1,x2,x3}")
    g.add_argument("--grid", type=int, default=128, help="oracle grid size")
    g.add_argument("--oracle", action="store_true", help="run the bidisc zero oracle")
    g.set_defaults(func=cmd_geom)

    c = sub.add_parser("classify", parents=[common], help="E-contraction evidence for a triple")
    c.add_argument("--input", required=True)
    c.add_argument("--degree", type=int, default=3)
    c.add_argument("--polys", type=int, default=20)
    c.add_argument("--samples", type=int, default=2000)
    c.set_defaults(func=cmd_classify)

    f = sub.add_parser("fundamental", parents=[common], help="fundamental operators F1, F2")
    f.add_argument("--input", required=True)
    f.add_argument("--adjoint", action="store_true", help="use (A*, B*, P*)")
    f.set_defaults(func=cmd_fundamental)

    d = sub.add_parser("decompose", parents=[common], help="unitary / cnu decomposition")
    d.add_argument("--input", required=True)
    d.set_defaults(func=cmd_decompose)

    dl = sub.add_parser("dilate", parents=[common], help="truncated E-isometric dilation")
    dl.add_argument("--input", required=True)
    dl.add_argument("--levels", type=int, default=8)
    dl.add_argument("--verify-degree", type=int, default=5)
    dl.add_argument("--words", type=int, default=100)
    dl.set_defaults(func=cmd_dilate)

    m = sub.add_parser("model", parents=[common], help="E-co-isometry model")
    m.add_argument("--input", required=True)
    m.add_argument("--levels", type=int, default=8)
    m.set_defaults(func=cmd_model)

    gen = sub.add_parser("generate", parents=[common], help="seeded instance generator")
    gen.add_argument("--kind", required=True, choices=harness.KINDS)
    gen.add_argument("--dim", type=int, default=1)
    gen.add_argument("--levels", type=int, default=4)
    gen.add_argument("--k", type=int, default=1, help="symbol size of a direct-sum Toeplitz part")
    gen.add_argument("--interior", type=int, default=0)
    gen.add_argument("--base", default="direct_sum", choices=[k for k in harness.KINDS
                                                               if k not in ("conjugated", "near_miss")])
    gen.add_argument("--variant", choices=harness.NEAR_MISS_VARIANTS)
    gen.add_argument("-o", "--output", help="write the triple here instead of stdout")
    gen.add_argument("--truth", help="write the ground truth JSON here")
    gen.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", parents=[common], help="run the property suites")
    v.add_argument("--config", help="suite config JSON (default: full suite)")
    v.add_argument("--junit", help="also write a JUnit XML report here")
    v.set_defaults(func=cmd_verify)
    return parser


def _tol(args) -> ToleranceProfile:
    return DEFAULT_TOL if args.tol is None else ToleranceProfile.uniform(args.tol)


def _triple(args) -> OperatorTriple:
    t = parse_triple(Path(args.input))
    if args.tol is not None:
        t = OperatorTriple(t.A, t.B, t.P, _tol(args))
    return t


def _read_point(args) -> TetraPoint:
    if args.file:
        obj = load_json(Path(args.file))
        if isinstance(obj, dict):
            obj = [obj.get(k) for k in ("x1", "x2", "x3")]
        try:
            vals = [complex(float(z[0]), float(z[1])) for z in obj]
        except (TypeError, ValueError, IndexError):
            raise ParseError("point must be three [re, im] pairs", args.file) from None
        if len(vals) != 3:
            raise ParseError("point must be three [re, im] pairs", args.file)
        return TetraPoint(*vals)
    if len(args.reals) != 6:
        raise ParseError(f"expected 6 reals, got {len(args.reals)}", "argv")
    return TetraPoint.from_reals(args.reals)


def cmd_geom(args):
    tol = _tol(args)
    p = _read_point(args)
    m = in_closed_E(p, tol)
    cert = m.certificate
    out = {"point": [_cplx(p.x1), _cplx(p.x2), _cplx(p.x3)],
           "member_closed": m.member,
           "member_open": in_open_E(p, tol, args.grid if args.oracle else None),
           "member_bE": in_bE(p, tol),
           "c1": _cplx(cert.c1) if cert else None,
           "c2": _cplx(cert.c2) if cert else None,
           "slack": cert.slack if cert else None,
           "branch": m.branch, "margin": m.margin, "indeterminate": m.indeterminate,
           "oracle_min_modulus": None}
    if args.oracle:
        mod, (z, w) = bidisc_zero_oracle(p, args.grid)
        out["oracle_min_modulus"] = mod
        out["oracle_argmin"] = [_cplx(z), _cplx(w)]
    return out, EXIT_OK


def cmd_classify(args):
    rep = classify(_triple(args), args.degree, args.polys, args.samples, args.seed)
    return rep.to_json(), EXIT_FALSIFIED if rep.verdict == "falsified" else EXIT_OK


def cmd_fundamental(args):
    t = _triple(args)
    fp = adjoint_fundamentals(t) if args.adjoint else fundamental_operators(t)
    out = fp.to_json()
    out["commutator_report"] = commutator_report(fp).to_json()
    out["adjoint"] = args.adjoint
    bad = max(fp.residual1, fp.residual2) > 10 * t.tol.eq_atol * max(1.0, *t.norms())
    return out, EXIT_FALSIFIED if bad else EXIT_OK


def cmd_decompose(args):
    t = _triple(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        r = canonical_decompose(t)
    out = r.to_json()
    out["warnings"] = [str(w.message) for w in caught]
    ok = r.unitary_check and r.cnu_check and r.max_offdiag() <= 1e-8
    return out, EXIT_OK if ok else EXIT_FALSIFIED


def cmd_dilate(args):
    t = _triple(args)
    fp = fundamental_operators(t)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        g = build_dilation(t, fp, args.levels)
    rep = verify_dilation(t, g, args.verify_degree, args.words, args.seed)
    out = {"dilation": graded_to_json(g), "verification": rep.to_json(),
           "defect_dim": fp.defect_dim,
           "commutator_report": commutator_report(fp).to_json(),
           "warnings": [str(w.message) for w in caught]}
    bad = rep.compression_error > 10 * t.tol.eq_atol * max(1.0, *t.norms()) ** args.verify_degree
    return out, EXIT_FALSIFIED if bad else EXIT_OK


def cmd_model(args):
    m = build_coisometry_model(_triple(args), args.levels)
    return m.to_json(), EXIT_OK


def cmd_generate(args):
    spec = harness.GeneratorSpec(args.kind, dim=args.dim, seed=args.seed, k=args.k,
                                 levels=args.levels, interior=args.interior,
                                 base=args.base, variant=args.variant)
    t, truth = harness.gen_e_contraction(spec)
    text = emit_triple(t, pretty=args.pretty)
    if args.truth:
        Path(args.truth).write_text(dumps(truth, args.pretty))
    if args.output:
        Path(args.output).write_text(text)
        return {"written": args.output, "dim": t.d, "ground_truth": truth}, EXIT_OK
    return json.loads(text), EXIT_OK


def cmd_verify(args):
    cfg = load_json(Path(args.config)) if args.config else harness.default_config()
    if not isinstance(cfg, dict):
        raise ParseError("config must be a JSON object", args.config)
    report = harness.run_suite(cfg)
    if args.junit:
        Path(args.junit).write_text(harness.junit_xml(report))
    return report, EXIT_OK if report["passed"] else EXIT_FALSIFIED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out, code = args.func(args)
    except TetraError as exc:
        out = {"error": type(exc).__name__, "message": str(exc)}
        out.update(exc.details())
        code = exc.exit_code
    except (ValueError, OSError) as exc:
        out, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_USAGE
    sys.stdout.write(dumps(out, args.pretty))
    return code


if __name__ == "__main__":
    sys.exit(main())

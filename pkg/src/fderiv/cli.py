"""Command-line front end: ``fderiv <verb> ...``.

Expressions use the prefix form (``add(pow(z,2),1)``, ``im``, ``const(0,-1)``).
Paths and families accept inline JSON, a JSON file, or (families only) a
builtin name.  Output is JSON on stdout unless ``--format csv``; ``--out``
additionally writes ``report.json`` and ``report.csv`` into a directory.

Exit codes: 0 success, 1 a check or expectation failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path as FsPath

from . import algebra as alg
from . import composition as comp
from . import derivatives as dv
from . import expr as ex
from . import families as fam
from . import integrate as integ
from . import paths as P
from . import scenarios as sc
from .errors import FDerivError, ScenarioError


class UsageError(Exception):
    pass


def _load_json(text: str):
    p = FsPath(text)
    try:
        if p.suffix == ".json" and p.exists():
            return json.loads(p.read_text(encoding="utf-8"))
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot read JSON from {text!r}: {exc}") from exc


def load_family(text: str) -> fam.PathFamily:
    if text in fam.BUILTIN:
        return fam.builtin(text)
    return fam.PathFamily.from_json(_load_json(text))


def load_path(text: str) -> P.Path:
    doc = _load_json(text)
    if isinstance(doc, list):
        return P.Polyline([complex(*v) for v in doc])
    return P.from_json(doc)


def _pair(f: str, g: str | None) -> dv.DerivPair:
    return dv.holomorphic_pair(f) if g is None else dv.DerivPair(f, g)


def _probe(text: str) -> dv.DerivPair:
    f, sep, g = text.partition(":")
    return _pair(f, g if sep else None)


def _seq_from_args(f: str, order: int) -> ex.DerivSequence:
    return ex.holo_derivatives(ex.parse(f), order)


def _algseq(args) -> alg.AlgebraSeq:
    if args.values:
        return alg.AlgebraSeq.explicit([v.strip() for v in args.values.split(",")])
    return alg.AlgebraSeq.factorial_power(args.p)


# ---------------------------------------------------------------------------
# verbs; each returns (payload dict, csv rows, exit code)


def cmd_integrate(args):
    f = ex.parse(args.expr)
    path = load_path(args.path)
    out = {"expr": ex.to_prefix(f)}
    if args.route in ("seg", "both"):
        out["seg"] = integ.integrate_segmentwise(f, path, allow_pullback=args.allow_pullback)
    if args.route in ("rs", "both"):
        out["rs"] = integ.integrate_rs(f, path, tol=args.tol if args.tol else integ.RS_TOL)
    if args.route == "both":
        out["route_gap"] = abs(out["seg"] - out["rs"])
    rows = [{"route": k, "re": v.real, "im": v.imag} for k, v in out.items() if isinstance(v, complex)]
    return out, rows, 0


def _report_rows(rep: dv.CheckReport, pair):
    return [{"pair": str(pair), "verdict": rep.verdict, "max_residual": rep.max_residual,
             "witness": json.dumps(rep.witness, sort_keys=True) if rep.witness else ""}]


def cmd_check_deriv(args):
    pair = _pair(args.f, args.g)
    rep = dv.check_family_derivative(pair, load_family(args.family), args.mesh_depth, args.tol)
    return {"pair": str(pair), **rep.to_dict()}, _report_rows(rep, pair), 0 if rep.passed else 1


def cmd_compat(args):
    phi = _pair(args.phi, args.phi_deriv)
    fam_g = load_family(args.fam_g) if args.fam_g else None
    verdicts = comp.compatibility_check(phi, load_family(args.family), [_probe(p) for p in args.probe],
                                        args.mesh_depth, args.tol, fam_g)
    rows = [{"generator": v.generator, "status": v.status, "image_length": v.image_length, "residual": v.residual}
            for v in verdicts]
    code = 1 if any(v.status == "incompatible" for v in verdicts) else 0
    return {"phi": str(phi), "generators": rows}, rows, code


def cmd_chain(args):
    f = _pair(args.f, args.g)
    phi = _pair(args.phi, args.phi_deriv)
    pair, rep = comp.chain_family_check(f, phi, load_family(args.family), args.mesh_depth, args.tol)
    return {"pair": str(pair), **rep.to_dict()}, _report_rows(rep, pair), 0 if rep.passed else 1


def cmd_fdb(args):
    if args.f and args.phi:
        f_seq = _seq_from_args(args.f, args.k)
        phi_seq = _seq_from_args(args.phi, args.k)
        e = comp.fdb_apply(f_seq, phi_seq, args.k)
        return {"k": args.k, "derivative": ex.to_prefix(e)}, [{"k": args.k, "derivative": ex.to_prefix(e)}], 0
    terms = comp.fdb_terms(args.k)
    rows = [{"i": t.i, "a": " ".join(map(str, t.a)), "coeff": t.coeff, "contribution": str(t.contribution)}
            for t in terms]
    out = {"k": args.k, "n_terms": len(terms), "bell": comp.bell_number(args.k)}
    if args.table:
        out["terms"] = rows
    return out, rows, 0


def cmd_algseq(args):
    M = _algseq(args)
    if args.action == "check":
        res = alg.is_algebra_sequence(M, args.n)
        out = {"status": res.status, "witness": res.witness, "tight": res.tight, "checked": res.checked}
        return out, [out], 0 if res.status == "pass" else 1
    if args.action == "d":
        est = alg.d_estimate(M, args.n)
        rows = [{"n": n, "value": v} for n, v in est.values]
        return {"verdict": est.verdict, "last": est.last, "values": rows}, rows, 0
    rows = []
    for n in range(1, args.n + 1):
        row = {"n": n, "ratio": alg.hom_ratio(M, n)}
        exact = alg.hom_ratio_exact(M, n)
        if exact is not None:
            row["ratio_pow_s"], row["s"] = str(exact[0]), exact[1]
        rows.append(row)
    return {"ratios": rows}, rows, 0


def cmd_norm(args):
    seq = _seq_from_args(args.f, args.n)
    family = load_family(args.family)
    if args.p or args.values:
        total, last = alg.dd_norm(seq, family, _algseq(args), args.n)
        out = {"norm": total, "last_term": last}
    else:
        out = {"norm": dv.dn_norm(seq, family, args.n)}
    return out, [out], 0


def cmd_hom(args):
    M = _algseq(args)
    phi = _seq_from_args(args.phi, max(args.n_terms, 1))
    family = load_family(args.family)
    if args.action == "check":
        v = alg.hom_condition(phi, family, M, args.n)
        out = {"condition": v.condition, "sup_derivative": v.sup_derivative, "reasons": list(v.reasons)}
        return out, [{"condition": v.condition, "sup_derivative": v.sup_derivative}], 0
    fam_y = load_family(args.fam_y) if args.fam_y else family
    tests = [_seq_from_args(t, args.n_terms) for t in args.test]
    rows = alg.hom_norm_probe(phi, family, fam_y, M, tests, args.n_terms)
    return {"rows": rows}, rows, 0


def cmd_repro(args):
    overrides = {"tol": args.tol, "mesh_depth": args.mesh_depth_set}
    result = sc.run_scenario(args.scenario, overrides, out_dir=args.out)
    args.out = None  # already written by the runner
    if args.format == "csv":
        sys.stdout.write(result.report_csv())
        return None, None, result.exit_code
    sys.stdout.write(result.report_json())
    if not result.passed:
        print(f"expectation failed: {result.report['first_failure']}", file=sys.stderr)
    return None, None, result.exit_code


def cmd_list(args):
    rows = []
    for name in sc.bundled_names():
        doc = sc.load_document(name)
        rows.append({"name": name, "description": doc.get("description", "")})
    return {"scenarios": rows}, rows, 0


# ---------------------------------------------------------------------------


def _add_seq_args(p):
    p.add_argument("--p", default="3/2", help="exponent of M_n = (n!)^p (default 3/2)")
    p.add_argument("--values", help="explicit comma-separated M_0, M_1, ... instead of --p")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="check tolerance")
    common.add_argument("--mesh-depth", type=int, default=None, help="dyadic subpath mesh depth")
    common.add_argument("--out", help="directory for report.json and report.csv")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="fderiv", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("integrate", parents=[common], help="contour integral along a path")
    p.add_argument("expr")
    p.add_argument("path", help="path JSON, a .json file, or a list of [re, im] vertices")
    p.add_argument("--route", choices=("seg", "rs", "both"), default="both")
    p.add_argument("--allow-pullback", action="store_true")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("check-deriv", parents=[common], help="check a derivative pair on a family")
    p.add_argument("f")
    p.add_argument("g", nargs="?", help="candidate derivative (default: symbolic f')")
    p.add_argument("--family", required=True)
    p.set_defaults(func=cmd_check_deriv)

    p = sub.add_parser("compat", parents=[common], help="falsifiable compatibility test for phi")
    p.add_argument("phi")
    p.add_argument("--phi-deriv")
    p.add_argument("--family", required=True)
    p.add_argument("--fam-g", help="family the probes must be derivative pairs on")
    p.add_argument("--probe", action="append", required=True, help="f or f:g (repeatable)")
    p.set_defaults(func=cmd_compat)

    p = sub.add_parser("chain", parents=[common], help="build and check the chain pair")
    p.add_argument("f")
    p.add_argument("phi")
    p.add_argument("--g", help="derivative of f (default: symbolic)")
    p.add_argument("--phi-deriv")
    p.add_argument("--family", required=True)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("fdb", parents=[common], help="Faa di Bruno coefficients or derivatives")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--table", action="store_true", help="include every term")
    p.add_argument("--f", help="outer function; with --phi prints (f o phi)^(k)")
    p.add_argument("--phi")
    p.set_defaults(func=cmd_fdb)

    p = sub.add_parser("algseq", parents=[common], help="algebra-sequence checks")
    p.add_argument("action", choices=("check", "d", "ratio"))
    p.add_argument("--n", type=int, default=40)
    _add_seq_args(p)
    p.set_defaults(func=cmd_algseq)

    p = sub.add_parser("norm", parents=[common], help="truncated derivative norms")
    p.add_argument("f")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--family", required=True)
    p.add_argument("--p", default=None, help="weight by (n!)^p instead of n!")
    p.add_argument("--values")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("hom", parents=[common], help="composition homomorphism conditions")
    p.add_argument("action", choices=("check", "probe"))
    p.add_argument("phi")
    p.add_argument("--family", required=True)
    p.add_argument("--fam-y")
    p.add_argument("--n", type=int, default=100, help="ratio prefix length")
    p.add_argument("--n-terms", type=int, default=4, help="derivative order used by probe")
    p.add_argument("--test", action="append", default=[], help="test function f (repeatable)")
    _add_seq_args(p)
    p.set_defaults(func=cmd_hom)

    p = sub.add_parser("repro", parents=[common], help="run a bundled scenario or scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("list-scenarios", parents=[common], help="list bundled scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def _csv_text(rows) -> str:
    rows = [sc.round15(r) for r in rows]
    keys = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.mesh_depth_set = args.mesh_depth
    if args.mesh_depth is None:
        args.mesh_depth = dv.MESH_DEPTH
    if args.tol is None and args.verb not in ("integrate", "repro"):
        args.tol = dv.CHECK_TOL
    try:
        payload, rows, code = args.func(args)
    except (ScenarioError, UsageError, FDerivError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if payload is None:
        return code
    text_json = json.dumps(sc.round15(payload), indent=2, sort_keys=True) + "\n"
    text_csv = _csv_text(rows)
    sys.stdout.write(text_csv if args.format == "csv" else text_json)
    if args.out:
        out = FsPath(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text_json, encoding="utf-8")
        (out / "report.csv").write_text(text_csv, encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())

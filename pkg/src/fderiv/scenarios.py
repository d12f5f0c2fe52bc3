"""Scenario files: declarative pipelines with expectations.

A scenario is one JSON document with the sections ``paths``, ``families``,
``exprs``, ``pairs``, ``sequences``, ``pipeline`` and ``expectations``.
Each pipeline step runs one operation and publishes flat metrics under its
``id``; expectations compare ``"<step>.<metric>"`` against a value.

Reports are deterministic: steps run in declaration order, keys are sorted
and floats are written with 15 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path as FsPath

import numpy as np

from . import algebra as alg
from . import composition as comp
from . import derivatives as dv
from . import expr as ex
from . import families as fam
from . import integrate as integ
from . import paths as P
from .errors import FDerivError, ScenarioError

FACTORIES = {
    "horizontal_segments": fam.horizontal_segments,
    "vertical_segments": fam.vertical_segments,
    "grid_segments": fam.grid_segments,
    "rectangle_edges": fam.rectangle_edges,
    "interval": fam.interval_family,
}


def bundled_names() -> list[str]:
    root = resources.files("fderiv") / "scenario_data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_document(source) -> dict:
    """Read a scenario by bundled name or file path."""
    path = FsPath(str(source))
    try:
        if path.suffix == ".json" and path.exists():
            text = path.read_text(encoding="utf-8")
        elif str(source) in bundled_names():
            text = (resources.files("fderiv") / "scenario_data" / f"{source}.json").read_text(encoding="utf-8")
        else:
            raise ScenarioError(f"no scenario file or bundled scenario named {source!r}")
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {source!r} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# number formatting


def round15(x):
    """Round floats (recursively) to 15 significant digits for output."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.15g}")
    if isinstance(x, complex):
        return [round15(x.real), round15(x.imag)]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): round15(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [round15(v) for v in x]
    return x


def fmt15(x) -> str:
    if isinstance(x, float):
        return f"{x:.15g}"
    return "" if x is None else str(x)


# ---------------------------------------------------------------------------
# the object table


class Scenario:
    """A parsed scenario with named objects resolved lazily."""

    def __init__(self, doc: dict):
        if not isinstance(doc, dict) or "pipeline" not in doc:
            raise ScenarioError("scenario must be a JSON object with a 'pipeline' list")
        self.doc = doc
        self.name = doc.get("name", "scenario")
        self.settings = {"tol": dv.CHECK_TOL, "mesh_depth": dv.MESH_DEPTH, **doc.get("settings", {})}
        self._cache = {}
        try:
            self.paths = {k: P.from_json(v) for k, v in doc.get("paths", {}).items()}
            self.exprs = {k: self._expr_doc(v) for k, v in doc.get("exprs", {}).items()}
            self.families = {k: self._family(k, v) for k, v in doc.get("families", {}).items()}
            self.pairs = {k: self._pair(v) for k, v in doc.get("pairs", {}).items()}
            self.sequences = {k: self._sequence(v) for k, v in doc.get("sequences", {}).items()}
        except ScenarioError:
            raise
        except (FDerivError, KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"cannot build objects of {self.name!r}: {exc}") from exc
        self.pipeline = list(doc["pipeline"])
        self.expectations = list(doc.get("expectations", []))
        ids = [s.get("id") for s in self.pipeline]
        if None in ids or len(set(ids)) != len(ids):
            raise ScenarioError("every pipeline step needs a unique 'id'")

    # -- builders
    def _expr_doc(self, v):
        return ex.from_json(v)

    def expr(self, ref) -> ex.FuncExpr:
        if isinstance(ref, str) and ref in getattr(self, "exprs", {}):
            return self.exprs[ref]
        return ex.from_json(ref)

    def path(self, ref) -> P.Path:
        if isinstance(ref, str):
            if ref not in self.paths:
                raise ScenarioError(f"unknown path {ref!r}")
            return self.paths[ref]
        return P.from_json(ref)

    def _family(self, name, v):
        if "builtin" in v:
            return fam.builtin(v["builtin"])
        if "factory" in v:
            try:
                factory = FACTORIES[v["factory"]]
            except KeyError:
                raise ScenarioError(f"unknown family factory {v['factory']!r}") from None
            return factory(**v.get("args", {}), name=v.get("name", name))
        gens = tuple(self.path(g) if isinstance(g, str) else P.from_json(g) for g in v["generators"])
        return fam.PathFamily(gens, v.get("name", name), v.get("closed_under_subpaths", True))

    def family(self, ref) -> fam.PathFamily:
        if ref in self.families:
            return self.families[ref]
        try:
            return fam.builtin(ref)
        except KeyError as exc:
            raise ScenarioError(str(exc)) from None

    def _pair(self, v):
        if "holomorphic" in v:
            f = self.expr(v["holomorphic"])
            return dv.DerivPair(f, ex.holo_derivative(f), "holomorphic")
        return dv.DerivPair(self.expr(v["f"]), self.expr(v["g"]), v.get("provenance", "declared"))

    def pair(self, ref) -> dv.DerivPair:
        if isinstance(ref, str):
            if ref not in self.pairs:
                raise ScenarioError(f"unknown pair {ref!r}")
            return self.pairs[ref]
        return self._pair(ref)

    def _sequence(self, v):
        if isinstance(v, list):
            return ex.DerivSequence([self.expr(t) for t in v])
        if isinstance(v, dict) and "holomorphic" in v:
            return ex.holo_derivatives(self.expr(v["holomorphic"]), int(v["order"]))
        if isinstance(v, dict) and "kind" in v:
            return alg.AlgebraSeq.from_json(v)
        raise ScenarioError(f"cannot read sequence {v!r}")

    def sequence(self, ref):
        if isinstance(ref, str):
            if ref not in self.sequences:
                raise ScenarioError(f"unknown sequence {ref!r}")
            return self.sequences[ref]
        return self._sequence(ref)


# ---------------------------------------------------------------------------
# pipeline operations; each returns (metrics, csv rows)


def _opt(step, sc, key):
    return step.get(key, sc.settings[key])


def _per_generator(pair, family, mesh_depth, tol):
    reports = [dv.check_gamma_derivative(pair, g, mesh_depth, tol, path_id=i) for i, g in enumerate(family.generators)]
    lengths = [P.length(g) for g in family.generators]
    return reports, lengths


def op_check_family(sc, step):
    pair = sc.pair(step["pair"])
    family = sc.family(step["family"])
    reports, lengths = _per_generator(pair, family, _opt(step, sc, "mesh_depth"), _opt(step, sc, "tol"))
    merged = dv.merge_reports(reports)
    metrics = merged.to_dict()
    metrics["max_residual_per_length"] = max(r.max_residual / ell for r, ell in zip(reports, lengths))
    row = {"pair": str(pair), "verdict": merged.verdict, "max_residual": merged.max_residual, "witness": merged.witness}
    return metrics, [row]


def op_chain_check(sc, step):
    pair = comp.chain_pair(sc.pair(step["f"]), sc.pair(step["phi"]))
    family = sc.family(step["family"])
    reports, lengths = _per_generator(pair, family, _opt(step, sc, "mesh_depth"), _opt(step, sc, "tol"))
    merged = dv.merge_reports(reports)
    metrics = merged.to_dict()
    metrics["chain_pair"] = str(pair)
    metrics["max_residual_per_length"] = max(r.max_residual / ell for r, ell in zip(reports, lengths))
    row = {"pair": str(pair), "verdict": merged.verdict, "max_residual": merged.max_residual, "witness": merged.witness}
    return metrics, [row]


def op_pgen_reject(sc, step):
    pairs = [sc.pair(p) for p in step["pairs"]]
    family = sc.family(step["family"])
    rows, gaps, n_rej = [], [], 0
    for i, g in enumerate(family.generators):
        v = dv.pgen_reject(pairs, g, _opt(step, sc, "mesh_depth"), _opt(step, sc, "tol"), path_id=i)
        res = v.report.max_residual if v.report else None
        if v.rejected:
            n_rej += 1
            gaps.append(abs(res - P.length(g)))
        rows.append({"pair": str(pairs[v.pair_index]) if v.rejected else "", "verdict": v.status,
                     "max_residual": res, "witness": v.report.witness if v.rejected else None})
    metrics = {"n_generators": len(family), "n_rejected": n_rej, "max_gap_to_length": max(gaps) if gaps else None}
    return metrics, rows


def op_compat(sc, step):
    phi = sc.pair(step["phi"])
    family = sc.family(step["family"])
    probes = [sc.pair(p) for p in step["probes"]]
    fam_g = sc.family(step["fam_g"]) if "fam_g" in step else None
    verdicts = comp.compatibility_check(phi, family, probes, _opt(step, sc, "mesh_depth"), _opt(step, sc, "tol"), fam_g)
    counts = {s: sum(v.status == s for v in verdicts) for s in ("constant", "consistent", "incompatible")}
    gaps = [abs(v.residual - v.image_length) for v in verdicts if v.status == "incompatible"]
    residuals = [v.residual for v in verdicts if v.residual is not None]
    metrics = {
        "n_generators": len(verdicts),
        **{f"n_{k}": n for k, n in counts.items()},
        "statuses": [v.status for v in verdicts],
        "max_residual": max(residuals) if residuals else None,
        "max_gap_to_length": max(gaps) if gaps else None,
    }
    rows = [{"pair": str(phi), "verdict": v.status, "max_residual": v.residual,
             "witness": v.pgen.report.witness if v.status == "incompatible" else None} for v in verdicts]
    return metrics, rows


def op_fdb_oracle(sc, step):
    """fdb_apply against iterated symbolic differentiation at random points."""
    f = sc.expr(step["f"])
    phi = sc.expr(step["phi"])
    k_max = int(step["k_max"])
    rng = np.random.default_rng(step.get("seed", 0))
    pts = rng.uniform(-1, 1, step.get("points", 50)) + 1j * rng.uniform(-1, 1, step.get("points", 50))
    f_seq = ex.holo_derivatives(f, k_max)
    phi_seq = ex.holo_derivatives(phi, k_max)
    oracle = ex.mk_compose(f, phi)
    worst = 0.0
    for k in range(1, k_max + 1):
        oracle = ex.holo_derivative(oracle)
        want = ex.evaluate(oracle, pts)
        got = ex.evaluate(comp.fdb_apply(f_seq, phi_seq, k), pts)
        scale = max(float(np.max(np.abs(want))), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(got - want))) / scale)
    return {"k_max": k_max, "max_rel_error": worst}, []


def op_fdb_table(sc, step):
    k = int(step["k"])
    terms = comp.fdb_terms(k)
    bell = sum(t.contribution for t in terms)
    table = [{"i": t.i, "a": list(t.a), "coeff": t.coeff, "contribution": str(t.contribution)} for t in terms]
    return {"k": k, "n_terms": len(terms), "bell": int(bell), "terms": table}, []


def op_integrate(sc, step):
    f = sc.expr(step["expr"])
    path = sc.path(step["path"])
    route = step.get("route", "both")
    metrics = {}
    if route in ("seg", "both"):
        metrics["seg"] = integ.integrate_segmentwise(f, path, allow_pullback=step.get("allow_pullback", False))
    if route in ("rs", "both"):
        metrics["rs"] = integ.integrate_rs(f, path)
    if route == "both":
        metrics["route_gap"] = abs(metrics["seg"] - metrics["rs"])
    for key in ("seg", "rs"):
        if key in metrics:
            metrics[f"{key}_re"], metrics[f"{key}_im"] = metrics[key].real, metrics[key].imag
    return metrics, []


def op_quotient(sc, step):
    family = sc.family(step["family"])
    pair = dv.quotient_pair(sc.pair(step["f"]), sc.pair(step["g"]), family)
    rep = dv.check_family_derivative(pair, family, _opt(step, sc, "mesh_depth"), _opt(step, sc, "tol"))
    metrics = rep.to_dict()
    metrics["quotient_pair"] = str(pair)
    via = comp.chain_pair(dv.holomorphic_pair("div(1,z)"), sc.pair(step["g"]))
    via = dv.product_pair(sc.pair(step["f"]), via)
    t = np.linspace(0, 1, 50)
    gap = 0.0
    for g in family.generators:
        z = g.evaluate(t)
        for a, b in ((pair.f, via.f), (pair.g, via.g)):
            gap = max(gap, float(np.max(np.abs(ex.evaluate(a, z) - ex.evaluate(b, z)))))
    metrics["chain_route_gap"] = gap
    return metrics, [{"pair": str(pair), "verdict": rep.verdict, "max_residual": rep.max_residual, "witness": rep.witness}]


def op_algseq_check(sc, step):
    M = sc.sequence(step["seq"])
    res = alg.is_algebra_sequence(M, int(step["N"]))
    return {"status": res.status, "witness": res.witness, "tight": res.tight, "checked": res.checked}, []


def op_d_estimate(sc, step):
    M = sc.sequence(step["seq"])
    est = alg.d_estimate(M, int(step["n_max"]))
    return {"verdict": est.verdict, "last": est.last, "values": [v for _, v in est.values]}, []


def op_hom_ratio(sc, step):
    M = sc.sequence(step["seq"])
    n_max = int(step["n_max"])
    ratios = [alg.hom_ratio(M, n) for n in range(1, n_max + 1)]
    metrics = {"max_ratio": max(ratios), "ratio_at_n_max": ratios[-1], "tail_increasing": ratios[-1] > ratios[-2]}
    if M.kind == "factorial_power":
        metrics["exponent"] = str(2 - M.p)
        gap = 0.0
        for n in range(1, n_max + 1):
            R, s = alg.hom_ratio_exact(M, n)
            gap = max(gap, abs(ratios[n - 1] ** s - float(R)) / float(R))
        metrics["exact_float_gap"] = gap
    return metrics, []


def op_hom_condition(sc, step):
    verdict = alg.hom_condition(
        sc.sequence(step["phi"]), sc.family(step["family"]), sc.sequence(step["seq"]), int(step.get("n_max", 100))
    )
    return {"condition": verdict.condition, "sup_derivative": verdict.sup_derivative, "reasons": list(verdict.reasons)}, []


def op_hom_probe(sc, step):
    phi = sc.sequence(step["phi"])
    M = sc.sequence(step["seq"])
    tests = [sc.sequence(t) for t in step["tests"]]
    fam_x, fam_y = sc.family(step["fam_x"]), sc.family(step["fam_y"])
    table = []
    for N in step["N"]:
        rows = alg.hom_norm_probe(phi.padded(N), fam_x, fam_y, M, [t.padded(N) for t in tests], N)
        table.append([r["ratio"] for r in rows])
    maxima = [max(r) for r in table]
    return {"ratios": table, "max_ratio": max(maxima),
            "nondecreasing_in_N": all(b >= a for a, b in zip(maxima, maxima[1:]))}, []


def op_norm(sc, step):
    seq = sc.sequence(step["seq"])
    family = sc.family(step["family"])
    N = int(step["N"])
    if "M" in step:
        total, last = alg.dd_norm(seq.padded(N), family, sc.sequence(step["M"]), N)
        return {"norm": total, "last_term": last}, []
    return {"norm": dv.dn_norm(seq.padded(N), family, N)}, []


OPS = {
    "check_family": op_check_family,
    "chain_check": op_chain_check,
    "pgen_reject": op_pgen_reject,
    "compat": op_compat,
    "fdb_oracle": op_fdb_oracle,
    "fdb_table": op_fdb_table,
    "integrate": op_integrate,
    "quotient": op_quotient,
    "algseq_check": op_algseq_check,
    "d_estimate": op_d_estimate,
    "hom_ratio": op_hom_ratio,
    "hom_condition": op_hom_condition,
    "hom_probe": op_hom_probe,
    "norm": op_norm,
}


# ---------------------------------------------------------------------------
# expectations


def _compare(observed, cmp, value, tol):
    if cmp == "==":
        return observed == value
    if cmp == "!=":
        return observed != value
    if observed is None:
        return False
    if cmp == "<":
        return observed < value
    if cmp == "<=":
        return observed <= value
    if cmp == ">":
        return observed > value
    if cmp == ">=":
        return observed >= value
    if cmp == "approx":
        return abs(observed - value) <= tol
    if cmp == "in":
        return observed in value
    raise ScenarioError(f"unknown comparator {cmp!r}")


@dataclass
class ScenarioResult:
    report: dict
    rows: list
    exit_code: int

    @property
    def passed(self) -> bool:
        return self.exit_code == 0

    def report_json(self) -> str:
        return json.dumps(self.report, indent=2, sort_keys=True) + "\n"

    def report_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario", "step", "pair", "verdict", "max_residual", "witness"])
        for r in self.rows:
            witness = json.dumps(round15(r["witness"]), sort_keys=True) if r.get("witness") else ""
            w.writerow([r["scenario"], r["step"], r.get("pair", ""), r.get("verdict", ""),
                        fmt15(r.get("max_residual")), witness])
        return buf.getvalue()

    def write(self, out_dir) -> None:
        out = FsPath(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.report_json(), encoding="utf-8")
        (out / "report.csv").write_text(self.report_csv(), encoding="utf-8")


def run_scenario(source, overrides: dict | None = None, out_dir=None) -> ScenarioResult:
    """Run a bundled scenario (by name), a scenario file, or an in-memory dict.

    ``overrides`` replaces entries of the scenario's ``settings`` (``tol``,
    ``mesh_depth``).  Parse problems raise :class:`ScenarioError`; failing
    expectations give ``exit_code == 1``.
    """
    doc = source if isinstance(source, dict) else load_document(source)
    sc = Scenario(doc)
    if overrides:
        sc.settings.update({k: v for k, v in overrides.items() if v is not None})
    steps, metrics_by_id, rows = [], {}, []
    for step in sc.pipeline:
        op = step.get("op")
        if op not in OPS:
            raise ScenarioError(f"step {step['id']!r}: unknown op {op!r}")
        try:
            metrics, step_rows = OPS[op](sc, step)
        except KeyError as exc:
            raise ScenarioError(f"step {step['id']!r} is missing field {exc}") from exc
        metrics = round15(metrics)
        metrics_by_id[step["id"]] = metrics
        steps.append({"id": step["id"], "op": op, "metrics": metrics})
        for r in step_rows:
            rows.append({"scenario": sc.name, "step": step["id"], **r})
    results, first_failure = [], None
    for e in sc.expectations:
        try:
            step_id, key = e["metric"].split(".", 1)
            observed = metrics_by_id[step_id].get(key)
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"bad expectation {e!r}") from exc
        ok = bool(_compare(observed, e.get("cmp", "=="), e.get("value"), e.get("tol", 0.0)))
        results.append({**e, "observed": observed, "ok": ok})
        if not ok and first_failure is None:
            first_failure = e["metric"]
    report = {
        "scenario": sc.name,
        "description": sc.doc.get("description", ""),
        "settings": round15(sc.settings),
        "steps": steps,
        "expectations": round15(results),
        "passed": first_failure is None,
        "first_failure": first_failure,
    }
    result = ScenarioResult(report, rows, 0 if first_failure is None else 1)
    if out_dir is not None:
        result.write(out_dir)
    return result

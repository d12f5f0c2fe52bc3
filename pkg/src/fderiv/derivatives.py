"""Verification and construction of F-derivative pairs.

A pair ``(f, g)`` asserts that ``g`` is an F-derivative of ``f``: for every
path in the family, ``int_gamma g dz = f(gamma+) - f(gamma-)``.  Checks mesh
each generator dyadically (standing in for closure under subpaths) and
evaluate the integral with the Riemann-Stieltjes route.

A failing check is a sound certificate (up to the integration tolerance);
a passing check is only "no counterexample at this mesh".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import expr as ex
from . import paths as P
from .errors import LengthMismatch, PoleOnSet
from .families import PathFamily
from .integrate import RS_MAX_DEPTH, PathSampler, integrate_rs

CHECK_TOL = 1e-6
MESH_DEPTH = 3
SAMPLES = 257
EPS_POLE = 1e-8


@dataclass(frozen=True)
class DerivPair:
    f: ex.FuncExpr
    g: ex.FuncExpr
    provenance: str = "declared"

    def __post_init__(self):
        for name in ("f", "g"):
            v = getattr(self, name)
            if isinstance(v, str):
                v = ex.parse(v)
            object.__setattr__(self, name, ex.as_expr(v))

    def __str__(self):
        return f"({self.f}, {self.g})"

    def simplified(self) -> "DerivPair":
        return replace(self, f=ex.simplify(self.f), g=ex.simplify(self.g))


def holomorphic_pair(f) -> DerivPair:
    """``(f, f')`` with the symbolic complex derivative."""
    f = ex.parse(f) if isinstance(f, str) else ex.as_expr(f)
    return DerivPair(f, ex.holo_derivative(f), "holomorphic")


@dataclass(frozen=True)
class CheckReport:
    """Result of a derivative check.

    ``witness`` (only on failure) holds the generator index, the parameter
    interval of the worst subpath and its residual, which equals
    ``max_residual``.
    """

    verdict: str
    max_residual: float
    witness: dict | None
    paths_checked: int
    subpaths_checked: int
    tol: float
    mesh_depth: int
    rs_tol: float
    worst: dict | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_residual": self.max_residual,
            "witness": self.witness,
            "paths_checked": self.paths_checked,
            "subpaths_checked": self.subpaths_checked,
            "tol": self.tol,
            "mesh_depth": self.mesh_depth,
            "rs_tol": self.rs_tol,
        }


def _dyadic_intervals(depth):
    for d in range(depth + 1):
        n = 2**d
        for j in range(n):
            yield j / n, (j + 1) / n


def check_gamma_derivative(
    pair: DerivPair,
    path: P.Path,
    mesh_depth: int = MESH_DEPTH,
    tol: float = CHECK_TOL,
    rs_tol: float | None = None,
    path_id: int = 0,
) -> CheckReport:
    """Is ``pair.g`` the gamma-derivative of ``pair.f`` on ``path``?

    Every dyadic subinterval down to ``mesh_depth`` (and the whole path) gets
    the residual ``|int_sigma g dz - (f(sigma+) - f(sigma-))|``.  Passes iff
    all residuals are below ``tol``.  ``rs_tol`` defaults to ``tol / 10``.
    """
    rs_tol = tol / 10 if rs_tol is None else rs_tol
    worst = None
    count = 0
    sampler = PathSampler(path)
    for lo, hi in _dyadic_intervals(mesh_depth):
        integral = integrate_rs(pair.g, path, rs_tol, RS_MAX_DEPTH, lo=lo, hi=hi, sampler=sampler)
        ends = sampler(np.array([lo, hi]))
        fa, fb = ex.evaluate(pair.f, ends)
        residual = float(abs(integral - (fb - fa)))
        count += 1
        if worst is None or residual > worst["residual"]:
            worst = {"path": path_id, "interval": [lo, hi], "residual": residual}
    ok = worst["residual"] < tol
    return CheckReport(
        verdict="pass" if ok else "fail",
        max_residual=worst["residual"],
        witness=None if ok else worst,
        paths_checked=1,
        subpaths_checked=count,
        tol=tol,
        mesh_depth=mesh_depth,
        rs_tol=rs_tol,
        worst=worst,
    )


def merge_reports(reports) -> CheckReport:
    """Fold per-path reports: max residual wins, counts add up."""
    reports = list(reports)
    top = max(reports, key=lambda r: r.max_residual)
    failed = any(not r.passed for r in reports)
    return CheckReport(
        verdict="fail" if failed else "pass",
        max_residual=top.max_residual,
        witness=top.worst if failed else None,
        paths_checked=sum(r.paths_checked for r in reports),
        subpaths_checked=sum(r.subpaths_checked for r in reports),
        tol=top.tol,
        mesh_depth=top.mesh_depth,
        rs_tol=top.rs_tol,
        worst=top.worst,
    )


def check_family_derivative(
    pair: DerivPair,
    family: PathFamily,
    mesh_depth: int = MESH_DEPTH,
    tol: float = CHECK_TOL,
    rs_tol: float | None = None,
) -> CheckReport:
    """:func:`check_gamma_derivative` over every generator of ``family``."""
    return merge_reports(
        check_gamma_derivative(pair, g, mesh_depth, tol, rs_tol, path_id=i) for i, g in enumerate(family.generators)
    )


@dataclass(frozen=True)
class PgenVerdict:
    """``rejected`` certifies that the path is outside pgen(S).

    ``consistent`` says nothing stronger than "no pair in S failed".
    """

    status: str
    pair_index: int | None = None
    report: CheckReport | None = None

    @property
    def rejected(self) -> bool:
        return self.status == "rejected"


def pgen_reject(
    pairs,
    path: P.Path,
    mesh_depth: int = MESH_DEPTH,
    tol: float = CHECK_TOL,
    rs_tol: float | None = None,
    path_id: int = 0,
) -> PgenVerdict:
    last = None
    for i, pair in enumerate(pairs):
        report = check_gamma_derivative(pair, path, mesh_depth, tol, rs_tol, path_id)
        if not report.passed:
            return PgenVerdict("rejected", i, report)
        last = report
    return PgenVerdict("consistent", None, last)


# ---------------------------------------------------------------------------
# algebraic constructions


def product_pair(p1: DerivPair, p2: DerivPair) -> DerivPair:
    """``(f1 f2, f1 g2 + g1 f2)``."""
    f = ex.mk_mul(p1.f, p2.f)
    g = ex.mk_add(ex.mk_mul(p1.f, p2.g), ex.mk_mul(p1.g, p2.f))
    return DerivPair(ex.simplify(f), ex.simplify(g), "product")


def linear_pair(pairs, coeffs) -> DerivPair:
    """Componentwise ``sum c_k (f_k, g_k)``."""
    pairs, coeffs = list(pairs), list(coeffs)
    if len(pairs) != len(coeffs):
        raise LengthMismatch(f"{len(pairs)} pairs but {len(coeffs)} coefficients")
    f: ex.FuncExpr = ex.ZERO
    g: ex.FuncExpr = ex.ZERO
    for c, p in zip(coeffs, pairs):
        f = ex.mk_add(f, ex.mk_mul(ex.Const(c), ex.simplify(p.f)))
        g = ex.mk_add(g, ex.mk_mul(ex.Const(c), ex.simplify(p.g)))
    return DerivPair(f, g, "linear")


def min_modulus(e: ex.FuncExpr, family, samples: int = SAMPLES) -> float:
    t = np.linspace(0.0, 1.0, samples)
    return min(float(np.min(np.abs(ex.evaluate(e, g.evaluate(t))))) for g in family.generators)


def quotient_pair(
    pf: DerivPair,
    pg: DerivPair,
    family: PathFamily,
    samples: int = SAMPLES,
    eps_pole: float = EPS_POLE,
) -> DerivPair:
    """``(f/g, (g f' - f g') / g^2)``, refusing when ``g`` nearly vanishes on the set.

    Raises
    ------
    PoleOnSet
        If the sampled minimum of ``|g|`` is at most ``eps_pole``.
    """
    m = min_modulus(pg.f, family, samples)
    if m <= eps_pole:
        raise PoleOnSet(f"min |g| on sampled family is {m:.3g} <= {eps_pole:g}")
    f = ex.mk_div(pf.f, pg.f)
    num = ex.mk_sub(ex.mk_mul(pg.f, pf.g), ex.mk_mul(pf.f, pg.g))
    g = ex.mk_div(num, ex.mk_pow(pg.f, 2))
    return DerivPair(ex.simplify(f), ex.simplify(g), "quotient")


# ---------------------------------------------------------------------------
# norms and regularity


def dn_norm(seq: ex.DerivSequence, family: PathFamily, n: int, samples: int = SAMPLES) -> float:
    """Lower estimate of ``sum_{k<=n} |f^(k)|_X / k!``."""
    seq.require(n)
    return sum(ex.sup_on_paths(seq[k], family, samples) / math.factorial(k) for k in range(n + 1))


@dataclass(frozen=True)
class Unreachable:
    """No path in the family runs from ``source`` to ``target``."""

    source: complex
    target: complex


def regularity_constant(
    family: PathFamily,
    x: complex,
    targets,
    tol: float = 1e-9,
    samples: int = 1025,
):
    """Estimate the F-regularity constant at ``x``.

    For each target ``y`` the shortest subpath (of a generator, sampled on
    ``samples`` parameters plus breakpoints) running from within ``tol`` of
    ``x`` to within ``tol`` of ``y`` is measured; the result is the largest
    ``length / |x - y|``.  Returns :class:`Unreachable` for the first target
    no subpath reaches.
    """
    x = complex(x)
    targets = [complex(y) for y in targets]
    if not targets:
        raise ValueError("need at least one target")
    if any(y == x for y in targets):
        raise ValueError("targets must differ from x")
    grids = []
    for g in family.generators:
        t = np.union1d(np.linspace(0.0, 1.0, samples), g.breakpoints())
        grids.append((g, t, g.evaluate(t)))
    worst = 0.0
    for y in targets:
        best = math.inf
        for g, t, pts in grids:
            at_x = np.flatnonzero(np.abs(pts - x) <= tol)
            at_y = np.flatnonzero(np.abs(pts - y) <= tol)
            for iy in at_y:
                before = at_x[at_x < iy]
                if before.size:
                    best = min(best, P.total_variation(g, t[before[-1]], t[iy]))
        if math.isinf(best):
            return Unreachable(x, y)
        worst = max(worst, best / abs(x - y))
    return worst

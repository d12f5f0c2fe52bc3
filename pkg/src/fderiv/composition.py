"""Composition: image paths, compatibility, the chain rule and Faa di Bruno.

``chain_pair`` only *builds* the candidate derivative of ``f o phi``; it does
not check compatibility.  Validity always comes from an explicit family
check, which is what lets the incompatible example fail visibly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import expr as ex
from . import paths as P
from .derivatives import (
    CHECK_TOL,
    MESH_DEPTH,
    SAMPLES,
    DerivPair,
    PgenVerdict,
    check_family_derivative,
    pgen_reject,
)
from .families import PathFamily


@dataclass(frozen=True)
class LengthReport:
    """``length <= sup|phi'| * base_length`` within ``tol``."""

    length: float
    base_length: float
    sup_derivative: float
    bound: float
    holds: bool


def compose_path(
    phi: DerivPair,
    path: P.Path,
    samples: int = SAMPLES,
    tol: float = P.DEFAULT_TOL,
) -> tuple[P.Mapped, LengthReport]:
    """The image path ``phi.f o path`` and its length bound via ``phi.g``."""
    image = P.Mapped(path, phi.f)
    ell = P.length(image, tol)
    base = P.length(path, tol)
    sup = ex.sup_on_paths(phi.g, [path], samples)
    bound = sup * base
    return image, LengthReport(ell, base, sup, bound, ell <= bound + tol)


@dataclass(frozen=True)
class CompatVerdict:
    """Per-generator outcome: ``constant``, ``consistent`` or ``incompatible``."""

    generator: int
    status: str
    image_length: float
    pgen: PgenVerdict | None = None

    @property
    def residual(self) -> float | None:
        if self.pgen is None or self.pgen.report is None:
            return None
        return self.pgen.report.max_residual


def compatibility_check(
    phi: DerivPair,
    fam_f: PathFamily,
    probes,
    mesh_depth: int = MESH_DEPTH,
    tol: float = CHECK_TOL,
    fam_g: PathFamily | None = None,
    eps_const: float = P.DEFAULT_EPS_CONST,
) -> list[CompatVerdict]:
    """Falsifiable test of F-G-compatibility of ``phi``.

    For each generator of ``fam_f`` the image path is either (numerically)
    constant, or its path-length parametrisation is run against the probe
    pairs with :func:`pgen_reject`.  ``incompatible`` is a certificate;
    ``consistent`` is evidence only, since the probe set is finite.

    When ``fam_g`` is given, each probe is first checked on it and a
    ``ValueError`` is raised if one fails (a probe that is not a G-pair
    proves nothing).
    """
    probes = list(probes)
    if fam_g is not None:
        for i, pr in enumerate(probes):
            rep = check_family_derivative(pr, fam_g, mesh_depth, tol)
            if not rep.passed:
                raise ValueError(f"probe {i} {pr} is not a derivative pair on {fam_g.name!r}")
    out = []
    for i, gamma in enumerate(fam_f.generators):
        image = P.Mapped(gamma, phi.f)
        if P.image_diameter(image) < eps_const:
            out.append(CompatVerdict(i, "constant", 0.0))
            continue
        pl = P.arc_length_param(image, eps_const)
        verdict = pgen_reject(probes, pl, mesh_depth, tol, path_id=i)
        status = "incompatible" if verdict.rejected else "consistent"
        out.append(CompatVerdict(i, status, pl.length, verdict))
    return out


def chain_pair(f: DerivPair, phi: DerivPair) -> DerivPair:
    """``(f o phi, (f' o phi) * phi')`` -- unchecked."""
    return DerivPair(
        ex.mk_compose(f.f, phi.f),
        ex.mk_mul(ex.mk_compose(f.g, phi.f), phi.g),
        "chain",
    )


# ---------------------------------------------------------------------------
# Faa di Bruno


@dataclass(frozen=True)
class FdBTerm:
    """One multi-index ``a = (a_1, ..., a_k)`` of the order-``k`` formula.

    ``coeff = k! / (a_1! ... a_k!)`` multiplies ``prod (phi^(j) / j!)^a_j``;
    ``contribution`` folds the ``1/j!`` factors in, giving the integer
    multiplier of ``prod (phi^(j))^a_j``.
    """

    k: int
    i: int
    a: tuple
    coeff: int

    @property
    def inner_powers(self) -> tuple:
        return self.a

    @property
    def contribution(self) -> Fraction:
        den = 1
        for j, aj in enumerate(self.a, start=1):
            den *= math.factorial(j) ** aj
        return Fraction(self.coeff, den)


def _multi_indices(k):
    """All (a_1..a_k) with sum j*a_j = k, built from a_k down to a_1."""
    a = [0] * k

    def rec(j, remaining):
        if j == 0:
            if remaining == 0:
                yield tuple(a)
            return
        for aj in range(remaining // j, -1, -1):
            a[j - 1] = aj
            yield from rec(j - 1, remaining - j * aj)
        a[j - 1] = 0

    yield from rec(k, k)


@lru_cache(maxsize=None)
def _fdb_terms_cached(k):
    terms = []
    kf = math.factorial(k)
    for a in _multi_indices(k):
        den = 1
        for aj in a:
            den *= math.factorial(aj)
        terms.append(FdBTerm(k, sum(a), a, kf // den))
    terms.sort(key=lambda t: (t.i, tuple(-x for x in t.a)))
    return tuple(terms)


def fdb_terms(k: int) -> list[FdBTerm]:
    """Every term of the order-``k`` Faa di Bruno formula, grouped by ``i``."""
    if k < 1:
        raise ValueError("order must be at least 1")
    return list(_fdb_terms_cached(k))


def bell_number(k: int) -> int:
    """Sum of all integer contributions at order ``k`` (equals the Bell number)."""
    total = sum(t.contribution for t in fdb_terms(k))
    assert total.denominator == 1
    return int(total)


def fdb_apply(f_seq: ex.DerivSequence, phi_seq: ex.DerivSequence, k: int) -> ex.FuncExpr:
    """Expression for ``(f o phi)^(k)`` from the two derivative sequences."""
    f_seq.require(k)
    phi_seq.require(k)
    phi = phi_seq[0]
    if k == 0:
        return ex.mk_compose(f_seq[0], phi)
    by_i: dict[int, ex.FuncExpr] = {}
    for term in fdb_terms(k):
        c = term.contribution
        prod: ex.FuncExpr = ex.Const(float(c))
        for j, aj in enumerate(term.a, start=1):
            if aj:
                prod = ex.mk_mul(prod, ex.mk_pow(phi_seq[j], aj))
        by_i[term.i] = ex.mk_add(by_i.get(term.i, ex.ZERO), prod)
    total: ex.FuncExpr = ex.ZERO
    for i in sorted(by_i):
        total = ex.mk_add(total, ex.mk_mul(ex.mk_compose(f_seq[i], phi), by_i[i]))
    return total


def fdb_sequence(f_seq: ex.DerivSequence, phi_seq: ex.DerivSequence, n: int) -> ex.DerivSequence:
    """``[(f o phi), (f o phi)', ..., (f o phi)^(n)]``."""
    return ex.DerivSequence([fdb_apply(f_seq, phi_seq, k) for k in range(n + 1)])


def chain_family_check(
    f: DerivPair,
    phi: DerivPair,
    family: PathFamily,
    mesh_depth: int = MESH_DEPTH,
    tol: float = CHECK_TOL,
):
    """Build the chain pair and check it on ``family``."""
    pair = chain_pair(f, phi)
    return pair, check_family_derivative(pair, family, mesh_depth, tol)

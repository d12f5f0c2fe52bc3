"""Algebra sequences, Dales-Davie type norms and composition homomorphisms.

Limits (``d(M)``, limsups, boundedness) are never claimed: each estimator
returns the finite prefix it looked at together with a trend verdict.
Binomial inequalities for ``M_n = (n!)**p`` with rational ``p = r/s`` are
decided exactly by raising both sides to the power ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import expr as ex
from .composition import fdb_sequence
from .families import PathFamily

GUARD = 1e-12
SAMPLES = 257


def _exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return None


@dataclass(frozen=True)
class AlgebraSeq:
    """A positive sequence ``(M_n)`` with ``M_0 = 1``.

    Build one with :meth:`factorial_power`, :meth:`explicit` or
    :meth:`from_logs`.
    """

    kind: str
    p: Fraction | None = None
    values: tuple = ()
    log_values: tuple = ()

    @classmethod
    def factorial_power(cls, p) -> "AlgebraSeq":
        p = Fraction(p)
        if p <= 0:
            raise ValueError("exponent must be positive")
        return cls("factorial_power", p=p)

    @classmethod
    def explicit(cls, values) -> "AlgebraSeq":
        vals = []
        for v in values:
            e = _exact(v)
            vals.append(e if e is not None else float(v))
        if not vals or vals[0] != 1:
            raise ValueError("an algebra sequence starts with M_0 = 1")
        if any(v <= 0 for v in vals):
            raise ValueError("terms must be positive")
        return cls("explicit", values=tuple(vals))

    @classmethod
    def from_function(cls, fn, n_max: int) -> "AlgebraSeq":
        """Tabulate ``fn(0..n_max)``; integer/Fraction outputs stay exact."""
        return cls.explicit([fn(n) for n in range(n_max + 1)])

    @classmethod
    def from_logs(cls, log_values) -> "AlgebraSeq":
        logs = tuple(float(v) for v in log_values)
        if not logs or logs[0] != 0.0:
            raise ValueError("log M_0 must be 0")
        return cls("log", log_values=logs)

    @property
    def exact(self) -> bool:
        if self.kind == "factorial_power":
            return True
        if self.kind == "explicit":
            return all(isinstance(v, Fraction) for v in self.values)
        return False

    @property
    def available(self) -> int | None:
        """Largest index available, ``None`` when unbounded."""
        if self.kind == "explicit":
            return len(self.values) - 1
        if self.kind == "log":
            return len(self.log_values) - 1
        return None

    def _need(self, n):
        top = self.available
        if top is not None and n > top:
            raise IndexError(f"sequence only tabulated up to n={top}, need {n}")

    def log(self, n: int) -> float:
        self._need(n)
        if self.kind == "factorial_power":
            return float(self.p) * math.lgamma(n + 1)
        if self.kind == "explicit":
            v = self.values[n]
            if isinstance(v, Fraction):
                return math.log(v.numerator) - math.log(v.denominator)
            return math.log(v)
        return self.log_values[n]

    def __getitem__(self, n: int) -> float:
        if self.kind == "explicit":
            self._need(n)
            return float(self.values[n])
        return math.exp(self.log(n))

    def to_json(self) -> dict:
        if self.kind == "factorial_power":
            return {"kind": "factorial_power", "p": str(self.p)}
        if self.kind == "explicit":
            return {"kind": "explicit", "values": [str(v) if isinstance(v, Fraction) else v for v in self.values]}
        return {"kind": "log", "log_values": list(self.log_values)}

    @classmethod
    def from_json(cls, doc: dict) -> "AlgebraSeq":
        kind = doc["kind"]
        if kind == "factorial_power":
            return cls.factorial_power(Fraction(str(doc["p"])))
        if kind == "explicit":
            return cls.explicit(doc["values"])
        if kind == "log":
            return cls.from_logs(doc["log_values"])
        raise ValueError(f"unknown algebra sequence kind {kind!r}")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeqCheck:
    status: str  # pass | fail | indeterminate
    witness: tuple | None = None
    tight: bool = False  # equality held for every (j, k)
    checked: int = 0

    def __bool__(self):
        return self.status == "pass"


def is_algebra_sequence(M: AlgebraSeq, N: int, guard: float = GUARD) -> SeqCheck:
    """Check ``C(j+k, j) <= M_{j+k} / (M_j M_k)`` for all ``j + k <= N``.

    Exact for factorial powers and for explicit integer/rational tables; the
    float path reports ``indeterminate`` when the log gap is within ``guard``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    M._need(N)
    first_unsure = None
    tight = True
    checked = 0
    if M.kind == "factorial_power":
        r, s = M.p.numerator, M.p.denominator
    for n in range(N + 1):
        for j in range(n + 1):
            k = n - j
            c = math.comb(n, j)
            checked += 1
            if M.kind == "factorial_power":
                # ratio = C**p, so compare C**s with C**r
                lhs, rhs = c**s, c**r
                if lhs > rhs:
                    return SeqCheck("fail", (j, k), False, checked)
                tight &= lhs == rhs
            elif M.exact:
                ratio = M.values[n] / (M.values[j] * M.values[k])
                if c > ratio:
                    return SeqCheck("fail", (j, k), False, checked)
                tight &= c == ratio
            else:
                gap = (M.log(n) - M.log(j) - M.log(k)) - math.log(c)
                band = guard * max(1.0, math.log(c))
                if gap < -band:
                    return SeqCheck("fail", (j, k), False, checked)
                if gap <= band:
                    first_unsure = first_unsure or (j, k)
                else:
                    tight = False
    if first_unsure is not None:
        return SeqCheck("indeterminate", first_unsure, False, checked)
    return SeqCheck("pass", None, tight, checked)


def _last_quarter(values):
    q = max(2, len(values) // 4)
    return values[-q:]


def _nonincreasing(vals, rel=1e-12):
    return all(b <= a + rel * max(abs(a), 1.0) for a, b in zip(vals, vals[1:]))


def _strictly_decreasing(vals):
    return all(b < a for a, b in zip(vals, vals[1:]))


def _strictly_increasing(vals):
    return all(b > a for a, b in zip(vals, vals[1:]))


@dataclass(frozen=True)
class DEstimate:
    values: list  # (n, (n!/M_n)**(1/n))
    verdict: str  # "->0" | "bounded-away" | "inconclusive"

    @property
    def last(self) -> float:
        return self.values[-1][1]


def d_estimate(
    M: AlgebraSeq,
    n_max: int,
    zero_threshold: float = 0.5,
    floor: float = 0.1,
    spread: float = 0.05,
) -> DEstimate:
    """Prefix of ``(n!/M_n)**(1/n)`` for ``n = 1..n_max`` plus a trend verdict.

    ``->0`` when the last quarter strictly decreases and ends below
    ``zero_threshold``; ``bounded-away`` when the last quarter stays above
    ``floor`` with relative spread at most ``spread``.  The verdict is a
    heuristic on finite data, not a limit.
    """
    if n_max < 5:
        raise ValueError("n_max must be at least 5")
    values = [(n, math.exp((math.lgamma(n + 1) - M.log(n)) / n)) for n in range(1, n_max + 1)]
    tail = [v for _, v in _last_quarter(values)]
    if _strictly_decreasing(tail) and tail[-1] < zero_threshold:
        verdict = "->0"
    elif min(tail) > floor and (max(tail) - min(tail)) <= spread * max(tail):
        verdict = "bounded-away"
    else:
        verdict = "inconclusive"
    return DEstimate(values, verdict)


def dd_norm(
    seq: ex.DerivSequence,
    family: PathFamily,
    M: AlgebraSeq,
    N: int,
    samples: int = SAMPLES,
) -> tuple[float, float]:
    """Truncated ``sum_{j<=N} |f^(j)|_X / M_j`` and its last term."""
    seq.require(N)
    terms = [ex.sup_on_paths(seq[j], family, samples) / M[j] for j in range(N + 1)]
    return math.fsum(terms), terms[-1]


@dataclass(frozen=True)
class AnalyticEstimate:
    terms: list  # (k, (|phi^(k)| / k!)**(1/k))
    verdict: str  # bounded | growing | inconclusive


def f_analytic_estimate(
    phi_seq: ex.DerivSequence,
    family: PathFamily,
    k_max: int,
    cap: float = 1e6,
    samples: int = SAMPLES,
) -> AnalyticEstimate:
    """Prefix of ``(|phi^(k)|_X / k!)**(1/k)`` with a trend verdict.

    ``bounded`` if the last quarter is nonincreasing, ``growing`` if it
    strictly increases, otherwise ``bounded`` when every term is below
    ``cap`` and ``inconclusive`` beyond that.
    """
    phi_seq.require(k_max)
    terms = []
    for k in range(1, k_max + 1):
        sup = ex.sup_on_paths(phi_seq[k], family, samples)
        terms.append((k, (sup / math.factorial(k)) ** (1.0 / k)))
    tail = [v for _, v in _last_quarter(terms)]
    if _nonincreasing(tail):
        verdict = "bounded"
    elif _strictly_increasing(tail):
        verdict = "growing"
    elif max(v for _, v in terms) < cap:
        verdict = "bounded"
    else:
        verdict = "inconclusive"
    return AnalyticEstimate(terms, verdict)


def hom_ratio(M: AlgebraSeq, n: int) -> float:
    """``n**2 * M_{n-1} / M_n`` in floating point."""
    return math.exp(2 * math.log(n) + M.log(n - 1) - M.log(n))


def hom_ratio_exact(M: AlgebraSeq, n: int):
    """``(R, s)`` with ``ratio**s == R`` exactly, or ``None`` for float data.

    For ``M_n = (n!)**(r/s)`` the ratio is ``n**(2 - r/s)``, so
    ``R = n**(2s - r)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if M.kind == "factorial_power":
        r, s = M.p.numerator, M.p.denominator
        return Fraction(n ** (2 * s)) / Fraction(n**r), s
    if M.exact:
        M._need(n)
        return Fraction(n * n) * M.values[n - 1] / M.values[n], 1
    return None


@dataclass(frozen=True)
class HomVerdict:
    """Which sufficient condition holds: ``condA``, ``condB`` or ``none``.

    ``none`` does not mean there is no homomorphism.
    """

    condition: str
    sup_derivative: float
    ratios: list  # (n, n^2 M_{n-1} / M_n)
    reasons: tuple = ()


def hom_condition(
    phi_seq: ex.DerivSequence,
    family: PathFamily,
    M: AlgebraSeq,
    n_max: int = 100,
    margin: float = 1e-9,
    bound_cap: float = 1e6,
    samples: int = SAMPLES,
) -> HomVerdict:
    phi_seq.require(1)
    sup = ex.sup_on_paths(phi_seq[1], family, samples)
    ratios = [(n, hom_ratio(M, n)) for n in range(1, n_max + 1)]
    if sup < 1 - margin:
        return HomVerdict("condA", sup, ratios)
    reasons = [f"sup|phi'| = {sup:.15g} is not < 1"]
    if sup > 1 + margin:
        reasons.append(f"sup|phi'| = {sup:.15g} exceeds 1")
        return HomVerdict("none", sup, ratios, tuple(reasons))
    vals = [r for _, r in ratios]
    if max(vals) > bound_cap:
        reasons.append(f"n^2 M_(n-1)/M_n reaches {max(vals):.15g} > cap {bound_cap:g}")
    elif not _nonincreasing(_last_quarter(vals)):
        reasons.append("n^2 M_(n-1)/M_n is still increasing in the tail")
    else:
        return HomVerdict("condB", sup, ratios)
    return HomVerdict("none", sup, ratios, tuple(reasons))


def hom_norm_probe(
    phi_seq: ex.DerivSequence,
    fam_x: PathFamily,
    fam_y: PathFamily,
    M: AlgebraSeq,
    test_fs,
    N: int,
    samples: int = SAMPLES,
) -> list[dict]:
    """Ratios ``||f o phi|| / ||f||`` of truncated norms, one row per test function.

    Derivatives of ``f o phi`` come from :func:`fdb_apply`.
    """
    phi_seq.require(N)
    rows = []
    for idx, f_seq in enumerate(test_fs):
        f_seq.require(N)
        comp = fdb_sequence(f_seq, phi_seq, N)
        norm_f, _ = dd_norm(f_seq, fam_y, M, N, samples)
        norm_c, _ = dd_norm(comp, fam_x, M, N, samples)
        rows.append({"f": idx, "N": N, "norm_f": norm_f, "norm_composite": norm_c, "ratio": norm_c / norm_f})
    return rows

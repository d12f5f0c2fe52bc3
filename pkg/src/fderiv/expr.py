"""Expression trees for continuous functions on plane sets.

Nodes are immutable dataclasses.  Evaluation is vectorised over numpy arrays
of complex points, so a single call can sample a function along a whole path.

The holomorphic fragment (everything except ``conj``, ``re`` and ``im``) has a
symbolic derivative, :func:`holo_derivative`.  Derivatives of the
non-holomorphic atoms depend on the chosen family of paths and are supplied
by the caller as a :class:`DerivSequence`.

>>> z = Var()
>>> evaluate(z * z, 1 + 1j)
2j
>>> holo_derivative(z ** 3)
Mul(left=Const(value=(3+0j)), right=Pow(base=Var(), n=2))
"""

from __future__ import annotations

import numbers
import re as _re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DivisionByZero, ExprParseError, NotHolomorphic, OrderTooLow


class FuncExpr:
    """Base class of all expression nodes."""

    __slots__ = ()

    # arithmetic sugar; builds raw (unsimplified) trees
    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Mul(Const(-1), self)

    def __pow__(self, n):
        if not isinstance(n, numbers.Integral):
            raise TypeError("only nonnegative integer powers are supported")
        return Pow(self, int(n))

    def __call__(self, arg):
        """Compose with another expression, or evaluate at points."""
        if isinstance(arg, FuncExpr):
            return Compose(self, arg)
        return evaluate(self, arg)

    def __str__(self):
        return to_prefix(self)

    @property
    def is_holomorphic(self) -> bool:
        return not any(isinstance(n, (Conj, Re, Im)) for n in walk(self))


@dataclass(frozen=True, repr=True)
class Var(FuncExpr):
    """The coordinate function z."""


@dataclass(frozen=True)
class Conj(FuncExpr):
    """Complex conjugate of z."""


@dataclass(frozen=True)
class Re(FuncExpr):
    pass


@dataclass(frozen=True)
class Im(FuncExpr):
    pass


@dataclass(frozen=True)
class Const(FuncExpr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Add(FuncExpr):
    left: FuncExpr
    right: FuncExpr


@dataclass(frozen=True)
class Sub(FuncExpr):
    left: FuncExpr
    right: FuncExpr


@dataclass(frozen=True)
class Mul(FuncExpr):
    left: FuncExpr
    right: FuncExpr


@dataclass(frozen=True)
class Div(FuncExpr):
    left: FuncExpr
    right: FuncExpr


@dataclass(frozen=True)
class Pow(FuncExpr):
    base: FuncExpr
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"Pow exponent must be a nonnegative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class Compose(FuncExpr):
    """``outer(inner(z))``."""

    outer: FuncExpr
    inner: FuncExpr


ZERO = Const(0)
ONE = Const(1)
Z = Var()

_BINARY = (Add, Sub, Mul, Div)


def as_expr(value) -> FuncExpr:
    if isinstance(value, FuncExpr):
        return value
    if isinstance(value, numbers.Number):
        return Const(complex(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def children(e: FuncExpr) -> tuple:
    if isinstance(e, _BINARY):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Compose):
        return (e.outer, e.inner)
    return ()


def walk(e: FuncExpr):
    """Yield every node of ``e`` (preorder)."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def size(e: FuncExpr) -> int:
    return sum(1 for _ in walk(e))


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: FuncExpr, z):
    """Evaluate ``e`` at a complex point or at an array of points.

    Scalars in, Python ``complex`` out; arrays in, complex arrays of the same
    shape out.

    Raises
    ------
    DivisionByZero
        If any denominator vanishes exactly at one of the points.
    """
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        out = _eval(e, zz)
    out = np.broadcast_to(out, zz.shape)
    if scalar:
        return complex(out)
    return np.array(out, dtype=complex)


def _eval(e, z):
    if isinstance(e, Var):
        return z
    if isinstance(e, Const):
        return np.full(z.shape, e.value, dtype=complex)
    if isinstance(e, Conj):
        return np.conj(z)
    if isinstance(e, Re):
        return z.real.astype(complex)
    if isinstance(e, Im):
        return z.imag.astype(complex)
    if isinstance(e, Add):
        return _eval(e.left, z) + _eval(e.right, z)
    if isinstance(e, Sub):
        return _eval(e.left, z) - _eval(e.right, z)
    if isinstance(e, Mul):
        return _eval(e.left, z) * _eval(e.right, z)
    if isinstance(e, Div):
        den = _eval(e.right, z)
        bad = den == 0
        if np.any(bad):
            point = complex(z[bad].flat[0]) if z.ndim else complex(z)
            raise DivisionByZero(e, point)
        return _eval(e.left, z) / den
    if isinstance(e, Pow):
        return _ipow(_eval(e.base, z), e.n)
    if isinstance(e, Compose):
        return _eval(e.outer, np.asarray(_eval(e.inner, z)))
    raise TypeError(f"unknown expression node {e!r}")


def _ipow(base, n):
    # square-and-multiply: same rounding for scalars and arrays
    base = np.asarray(base)
    out = np.ones_like(base)
    while n:
        if n & 1:
            out = out * base
        n >>= 1
        if n:
            base = base * base
    return out


# ---------------------------------------------------------------------------
# constant folding and light algebraic cleanup


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def _split_coeff(e):
    """Write ``e`` as ``c * rest`` with ``c`` a constant."""
    if isinstance(e, Mul) and isinstance(e.left, Const):
        return e.left.value, e.right
    return 1 + 0j, e


def _scaled(c, rest):
    return mk_mul(Const(c), rest)


def mk_add(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(b) and not _is_const(a):
        a, b = b, a
    ca, ra = _split_coeff(a)
    cb, rb = _split_coeff(b)
    if ra == rb and not _is_const(ra):
        return _scaled(ca + cb, ra)
    return Add(a, b)


def mk_sub(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return mk_mul(Const(-1), b)
    if a == b:
        return ZERO
    ca, ra = _split_coeff(a)
    cb, rb = _split_coeff(b)
    if ra == rb and not _is_const(ra):
        return _scaled(ca - cb, ra)
    return Sub(a, b)


def _pow_parts(e):
    if isinstance(e, Pow):
        return e.base, e.n
    return e, 1


def mk_mul(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(b):
        a, b = b, a
    if _is_const(a):
        if a.value == 0:
            return ZERO
        if a.value == 1:
            return b
        if isinstance(b, Mul) and _is_const(b.left):
            return mk_mul(Const(a.value * b.left.value), b.right)
        return Mul(a, b)
    # pull constants to the front
    if isinstance(b, Mul) and _is_const(b.left):
        return mk_mul(b.left, mk_mul(a, b.right))
    if isinstance(a, Mul) and _is_const(a.left):
        return mk_mul(a.left, mk_mul(a.right, b))
    ba, na = _pow_parts(a)
    bb, nb = _pow_parts(b)
    if ba == bb:
        return mk_pow(ba, na + nb)
    return Mul(a, b)


def mk_div(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    if _is_const(b) and b.value != 0:
        return mk_mul(Const(1 / b.value), a)
    if _is_const(a, 0):
        return ZERO
    if a == b:
        return ONE
    # cancel a common power: (c * u**m) / u**n
    c, rest = _split_coeff(a)
    ba, na = _pow_parts(rest)
    bb, nb = _pow_parts(b)
    if ba == bb and not _is_const(ba):
        if na >= nb:
            return _scaled(c, mk_pow(ba, na - nb))
        return Div(Const(c), mk_pow(bb, nb - na))
    return Div(a, b)


def mk_pow(base: FuncExpr, n: int) -> FuncExpr:
    if n == 0:
        return ONE
    if n == 1:
        return base
    if _is_const(base):
        return Const(base.value**n)
    if isinstance(base, Pow):
        return mk_pow(base.base, base.n * n)
    return Pow(base, n)


def mk_compose(outer: FuncExpr, inner: FuncExpr) -> FuncExpr:
    if isinstance(inner, Var) or _is_const(outer):
        return outer
    if isinstance(outer, Var):
        return inner
    if _is_const(inner) and outer.is_holomorphic:
        # cheap to fold; also right for conj/re/im but keep those visible
        return Const(evaluate(outer, inner.value))
    return Compose(outer, inner)


def simplify(e: FuncExpr) -> FuncExpr:
    """Constant folding plus a handful of local rewrites (no expansion)."""
    if isinstance(e, Add):
        return mk_add(simplify(e.left), simplify(e.right))
    if isinstance(e, Sub):
        return mk_sub(simplify(e.left), simplify(e.right))
    if isinstance(e, Mul):
        return mk_mul(simplify(e.left), simplify(e.right))
    if isinstance(e, Div):
        return mk_div(simplify(e.left), simplify(e.right))
    if isinstance(e, Pow):
        return mk_pow(simplify(e.base), e.n)
    if isinstance(e, Compose):
        return mk_compose(simplify(e.outer), simplify(e.inner))
    return e


# ---------------------------------------------------------------------------
# symbolic derivative (holomorphic fragment)


def holo_derivative(e: FuncExpr) -> FuncExpr:
    """Complex derivative of a holomorphic expression.

    Raises
    ------
    NotHolomorphic
        If ``e`` contains ``conj``, ``re`` or ``im``.
    """
    return simplify(_d(e))


def _d(e):
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, (Conj, Re, Im)):
        raise NotHolomorphic(e)
    if isinstance(e, Add):
        return mk_add(_d(e.left), _d(e.right))
    if isinstance(e, Sub):
        return mk_sub(_d(e.left), _d(e.right))
    if isinstance(e, Mul):
        u, v = e.left, e.right
        return mk_add(mk_mul(_d(u), v), mk_mul(u, _d(v)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        if _is_const(u):
            return mk_div(mk_mul(Const(-u.value), _d(v)), mk_pow(v, 2))
        num = mk_sub(mk_mul(_d(u), v), mk_mul(u, _d(v)))
        return mk_div(num, mk_pow(v, 2))
    if isinstance(e, Pow):
        if e.n == 0:
            return ZERO
        return mk_mul(mk_mul(Const(e.n), mk_pow(e.base, e.n - 1)), _d(e.base))
    if isinstance(e, Compose):
        return mk_mul(mk_compose(_d(e.outer), e.inner), _d(e.inner))
    raise TypeError(f"unknown expression node {e!r}")


def holo_derivatives(e: FuncExpr, order: int) -> "DerivSequence":
    """``[e, e', ..., e^(order)]`` by repeated symbolic differentiation."""
    terms = [e]
    for _ in range(order):
        terms.append(holo_derivative(terms[-1]))
    return DerivSequence(terms)


# ---------------------------------------------------------------------------
# derivative sequences


@dataclass(frozen=True)
class DerivSequence:
    """Successive (asserted) F-derivatives ``[f, f^(1), ..., f^(n)]``."""

    terms: tuple

    def __init__(self, terms: Iterable):
        terms = tuple(as_expr(t) if not isinstance(t, str) else parse(t) for t in terms)
        if not terms:
            raise ValueError("a derivative sequence needs at least f itself")
        object.__setattr__(self, "terms", terms)

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def __getitem__(self, k):
        return self.terms[k]

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def require(self, n: int) -> None:
        if self.order < n:
            raise OrderTooLow(f"sequence has order {self.order}, need {n}")

    def padded(self, n: int) -> "DerivSequence":
        """Extend with zeros up to order ``n`` (for polynomial data)."""
        return DerivSequence(self.terms + (ZERO,) * max(0, n - self.order))


# ---------------------------------------------------------------------------
# sampled sup norm


def sup_on_paths(e: FuncExpr, family, samples: int = 257) -> float:
    """Lower estimate of ``|e|_X`` from samples along the family's generators.

    ``family`` is anything with a ``generators`` attribute, or a plain list of
    paths.  Each generator is sampled at ``samples`` equispaced parameters.
    """
    paths = getattr(family, "generators", family)
    if not paths:
        raise ValueError("family has no generators")
    t = np.linspace(0.0, 1.0, samples)
    best = 0.0
    for p in paths:
        vals = evaluate(e, p.evaluate(t))
        best = max(best, float(np.max(np.abs(vals))))
    return best


# ---------------------------------------------------------------------------
# JSON and the prefix string form

_ATOMS = {"z": Var, "w": Var, "conj": Conj, "re": Re, "im": Im}
_ATOM_NAMES = {Var: "z", Conj: "conj", Re: "re", Im: "im"}
_BIN_NAMES = {Add: "add", Sub: "sub", Mul: "mul", Div: "div"}
_BIN_CLASSES = {v: k for k, v in _BIN_NAMES.items()}


def to_json(e: FuncExpr) -> dict:
    if type(e) in _ATOM_NAMES:
        return {"op": _ATOM_NAMES[type(e)]}
    if isinstance(e, Const):
        return {"op": "const", "value": [e.value.real, e.value.imag]}
    if type(e) in _BIN_NAMES:
        return {"op": _BIN_NAMES[type(e)], "args": [to_json(e.left), to_json(e.right)]}
    if isinstance(e, Pow):
        return {"op": "pow", "args": [to_json(e.base)], "n": e.n}
    if isinstance(e, Compose):
        return {"op": "compose", "args": [to_json(e.outer), to_json(e.inner)]}
    raise TypeError(f"unknown expression node {e!r}")


def from_json(doc) -> FuncExpr:
    if isinstance(doc, str):
        return parse(doc)
    if isinstance(doc, (int, float)):
        return Const(doc)
    try:
        op = doc["op"]
        if op in _ATOMS:
            return _ATOMS[op]()
        if op == "const":
            re_, im_ = doc["value"]
            return Const(complex(float(re_), float(im_)))
        args = [from_json(a) for a in doc["args"]]
        if op in _BIN_CLASSES:
            left, right = args
            return _BIN_CLASSES[op](left, right)
        if op == "pow":
            (base,) = args
            return Pow(base, int(doc["n"]))
        if op == "compose":
            outer, inner = args
            return Compose(outer, inner)
    except (KeyError, TypeError, ValueError) as exc:
        raise ExprParseError(f"bad expression document {doc!r}: {exc}") from exc
    raise ExprParseError(f"unknown op {op!r}")


def _fmt_num(x: float) -> str:
    return repr(float(x))


def to_prefix(e: FuncExpr) -> str:
    """Compact prefix form, e.g. ``mul(z,pow(z,2))``; inverse of :func:`parse`."""
    if type(e) in _ATOM_NAMES:
        return _ATOM_NAMES[type(e)]
    if isinstance(e, Const):
        if e.value.imag == 0:
            return _fmt_num(e.value.real)
        return f"const({_fmt_num(e.value.real)},{_fmt_num(e.value.imag)})"
    if type(e) in _BIN_NAMES:
        return f"{_BIN_NAMES[type(e)]}({to_prefix(e.left)},{to_prefix(e.right)})"
    if isinstance(e, Pow):
        return f"pow({to_prefix(e.base)},{e.n})"
    if isinstance(e, Compose):
        return f"compose({to_prefix(e.outer)},{to_prefix(e.inner)})"
    raise TypeError(f"unknown expression node {e!r}")


_TOKEN = _re.compile(r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<punct>[(),]))")


def _tokenize(text):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprParseError(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse(text: str) -> FuncExpr:
    """Parse the prefix string form.

    Grammar: atoms ``z`` (alias ``w``), ``conj``, ``re``, ``im``, ``i``, real
    literals; calls ``add(a,b,...)``, ``sub(a,b)``, ``mul(a,b,...)``,
    ``div(a,b)``, ``neg(a)``, ``pow(a,n)``, ``const(re,im)``,
    ``compose(outer,inner)``.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def expect(value):
        nonlocal pos
        kind, tok = peek()
        if tok != value:
            raise ExprParseError(f"expected {value!r}, got {tok!r} in {text!r}")
        pos += 1

    def args():
        expect("(")
        out = [node()]
        while peek()[1] == ",":
            expect(",")
            out.append(node())
        expect(")")
        return out

    def node():
        nonlocal pos
        kind, tok = peek()
        if kind is None:
            raise ExprParseError(f"unexpected end of input in {text!r}")
        pos += 1
        if kind == "num":
            return Const(float(tok))
        if kind != "name":
            raise ExprParseError(f"unexpected {tok!r} in {text!r}")
        name = tok.lower()
        if name in _ATOMS and peek()[1] != "(":
            return _ATOMS[name]()
        if name == "i" and peek()[1] != "(":
            return Const(1j)
        a = args()
        if name == "const":
            if len(a) != 2 or not all(isinstance(x, Const) for x in a):
                raise ExprParseError("const takes two real literals")
            return Const(complex(a[0].value.real, a[1].value.real))
        if name in ("add", "mul") and len(a) >= 2:
            cls = Add if name == "add" else Mul
            acc = a[0]
            for x in a[1:]:
                acc = cls(acc, x)
            return acc
        if name in ("sub", "div") and len(a) == 2:
            return _BIN_CLASSES[name](*a)
        if name == "neg" and len(a) == 1:
            return Mul(Const(-1), a[0])
        if name == "pow" and len(a) == 2:
            n = a[1]
            if not (isinstance(n, Const) and n.value.imag == 0 and n.value.real == int(n.value.real)):
                raise ExprParseError("pow exponent must be an integer literal")
            if n.value.real < 0:
                raise ExprParseError("pow exponent must be nonnegative")
            return Pow(a[0], int(n.value.real))
        if name == "compose" and len(a) == 2:
            return Compose(*a)
        if name in _ATOMS and len(a) == 1:
            return Compose(_ATOMS[name](), a[0])
        raise ExprParseError(f"bad call {name}/{len(a)} in {text!r}")

    result = node()
    if pos != len(tokens):
        raise ExprParseError(f"trailing input in {text!r}")
    return result


def polynomial(coeffs: Sequence[complex]) -> FuncExpr:
    """``sum(c_k z**k)`` as a (simplified) expression; ``coeffs[0]`` is the constant."""
    acc: FuncExpr = ZERO
    for k, c in enumerate(coeffs):
        if c:
            acc = mk_add(acc, mk_mul(Const(c), mk_pow(Z, k)))
    return acc


"""F-differentiation on path families in the complex plane.

Paths, function expressions, two integration routes, derivative-pair
checks, composition and Faa di Bruno, and algebra-sequence estimators.
"""

from . import algebra, composition, derivatives, expr, families, integrate, paths
from .derivatives import DerivPair, check_family_derivative, check_gamma_derivative, holomorphic_pair
from .expr import DerivSequence, evaluate, parse
from .families import PathFamily
from .integrate import integrate_rs, integrate_segmentwise
from .paths import Polyline, segment, total_variation

__version__ = "0.1.0"

__all__ = [
    "algebra",
    "composition",
    "derivatives",
    "expr",
    "families",
    "integrate",
    "paths",
    "DerivPair",
    "DerivSequence",
    "PathFamily",
    "Polyline",
    "check_family_derivative",
    "check_gamma_derivative",
    "evaluate",
    "holomorphic_pair",
    "integrate_rs",
    "integrate_segmentwise",
    "parse",
    "segment",
    "total_variation",
]

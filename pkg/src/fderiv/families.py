"""Finite stand-ins for effective collections of paths.

A :class:`PathFamily` is a list of generator paths.  Closure under subpaths
is not materialised; checks realise it by dyadic meshing of each generator.
Density of the union of images in the underlying set is documentation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import paths as P
from .errors import InvalidPath


@dataclass(frozen=True)
class PathFamily:
    generators: tuple
    name: str = "family"
    closed_under_subpaths: bool = True
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a path family needs at least one generator")
        object.__setattr__(self, "generators", gens)
        if self.validate:
            for i, g in enumerate(gens):
                verdict = P.is_admissible(g)
                if not verdict:
                    raise InvalidPath(f"generator {i} of {self.name!r} is not admissible: {verdict.status}")

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generators": [g.to_json() for g in self.generators],
            "closed_under_subpaths": self.closed_under_subpaths,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PathFamily":
        return cls(
            tuple(P.from_json(g) for g in doc["generators"]),
            name=doc.get("name", "family"),
            closed_under_subpaths=doc.get("closed_under_subpaths", True),
        )


def horizontal_segments(x0=0.0, x1=1.0, heights=(0.0, 0.5, 1.0), name=None) -> PathFamily:
    gens = [P.segment(complex(x0, y), complex(x1, y)) for y in heights]
    return PathFamily(tuple(gens), name or "horizontal")


def vertical_segments(y0=0.0, y1=1.0, abscissae=(0.0, 0.5, 1.0), name=None) -> PathFamily:
    gens = [P.segment(complex(x, y0), complex(x, y1)) for x in abscissae]
    return PathFamily(tuple(gens), name or "vertical")


def grid_segments(x0=0.0, x1=1.0, y0=0.0, y1=1.0, lines=3, name=None) -> PathFamily:
    """Horizontal and vertical segments along ``lines`` equispaced grid lines each way."""
    ys = np.linspace(y0, y1, lines)
    xs = np.linspace(x0, x1, lines)
    h = horizontal_segments(x0, x1, ys).generators
    v = vertical_segments(y0, y1, xs).generators
    return PathFamily(h + v, name or "grid")


def rectangle_edges(x0=0.0, x1=1.0, y0=0.0, y1=1.0, name=None) -> PathFamily:
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    gens = [P.segment(corners[k], corners[(k + 1) % 4]) for k in range(4)]
    return PathFamily(tuple(gens), name or "edges")


def interval_family(a=0.0, b=1.0, name=None) -> PathFamily:
    """The real interval [a, b] as a single generator."""
    return PathFamily((P.segment(complex(a), complex(b)),), name or "interval")


BUILTIN = {
    "unit-square-horizontal": lambda: horizontal_segments(name="unit-square-horizontal"),
    "unit-square-vertical": lambda: vertical_segments(name="unit-square-vertical"),
    "unit-square-grid": lambda: grid_segments(name="unit-square-grid"),
    "unit-square-edges": lambda: rectangle_edges(name="unit-square-edges"),
    "shifted-square-grid": lambda: grid_segments(1.0, 2.0, 0.0, 1.0, name="shifted-square-grid"),
    "unit-interval": lambda: interval_family(name="unit-interval"),
}


def builtin(name: str) -> PathFamily:
    try:
        return BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown builtin family {name!r}; known: {sorted(BUILTIN)}") from None

import sys
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fderiv import expr as ex
from fderiv import paths as P

settings.register_profile(
    "fderiv",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fderiv")

coord = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, coord, coord)


def _separated(vs, gap=1e-2):
    return all(abs(a - b) > gap for a, b in zip(vs, vs[1:]))


polyline_vertices = st.lists(cplx, min_size=2, max_size=6).filter(_separated)
polylines = polyline_vertices.map(P.Polyline)
poly_coeffs = st.lists(cplx, min_size=1, max_size=4)
polynomials = poly_coeffs.map(ex.polynomial)


@pytest.fixture
def square():
    return P.Polyline([0, 1, 1 + 1j, 1j, 0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_SESSION_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        ok, line = mod.RESULTS[number]
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {line}")
    elapsed = time.perf_counter() - _SESSION_START
    tr.write_line(f"suite wall time {elapsed:.1f} s ({'PASS' if elapsed < 60 else 'FAIL'} vs 60 s budget)")

"""Integrating over an image path two ways.

For ``phi(z) = z**2`` and ``gamma = [0, 1]`` the image path is ``t -> t**2``.
The pullback route integrates ``f(phi) phi'`` over ``gamma`` with Gauss-Legendre;
the direct route runs a Riemann-Stieltjes sum on the image itself.
"""

# %%
import numpy as np

from fderiv import expr as ex
from fderiv import paths as P
from fderiv.integrate import integrate_rs, integrate_segmentwise

image = P.Mapped(P.segment(0, 1), ex.parse("pow(z,2)"))
print("pullback:", integrate_segmentwise(ex.Z, image, allow_pullback=True))
print("direct RS:", integrate_rs(ex.Z, image))

# %% Arc-length reparametrisation leaves the integral unchanged.
curve = P.Mapped(P.segment(-1, 1), ex.parse("add(pow(z,3),mul(const(0,1),z))"))
f = ex.parse("add(pow(z,2),mul(const(0,1),z))")
for label, path in (("gamma", curve), ("gamma^pl", P.arc_length_param(curve)), ("gamma^no", P.normalised(curve))):
    print(f"{label:9} {integrate_rs(f, path):.9f}")

# %% The ML bound on a closed square: the integral of z is 0, of conj(z) is 2i.
square = P.Polyline([0, 1, 1 + 1j, 1j, 0])
t = np.linspace(0, 1, 1001)
for text in ("z", "conj"):
    e = ex.parse(text)
    value = integrate_segmentwise(e, square)
    bound = np.max(np.abs(ex.evaluate(e, square.evaluate(t)))) * P.length(square)
    print(f"{text:5} integral {value:.12f}   |.| <= {bound:.4f}")

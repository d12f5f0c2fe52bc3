"""Im on the unit square: one function, two derivatives.

On horizontal segments ``Im`` is constant, so ``0`` is an F-derivative.
On vertical segments ``Im(x + iy) = y`` changes at unit rate along ``i dy``,
so the derivative is ``-i``.  Which pair is "right" depends on the family.
"""

# %%
from fderiv import DerivPair, check_family_derivative
from fderiv import composition as comp
from fderiv import derivatives as dv
from fderiv import families as fam

horiz = fam.horizontal_segments(heights=(0.0, 0.5, 1.0))
vert = fam.vertical_segments(abscissae=(0.0, 0.5, 1.0))

im_h = DerivPair("im", "0")
im_v = DerivPair("im", "const(0,-1)")

# %% Each pair passes on its own family and fails on the other.
for name, pair in (("(Im, 0)", im_h), ("(Im, -i)", im_v)):
    for fname, family in (("horizontal", horiz), ("vertical", vert)):
        rep = check_family_derivative(pair, family)
        print(f"{name:9} on {fname:10}: {rep.verdict:4}  max residual {rep.max_residual:.3g}")

# %% pgen: the vertical pair certifies that horizontal generators are excluded.
for g in horiz:
    v = dv.pgen_reject([im_v], g)
    print(f"{g!r:50} {v.status:10} residual {v.report.max_residual:.6f}")

# %% The identity is not compatible between the two families,
# so composing (Im, -i) with it gives a wrong chain-rule pair on horizontals.
verdicts = comp.compatibility_check(DerivPair("z", "1"), horiz, [im_v], fam_g=vert)
print([v.status for v in verdicts])
pair, rep = comp.chain_family_check(im_v, DerivPair("z", "1"), horiz)
print("naive chain:", rep.verdict, "residual", rep.max_residual)

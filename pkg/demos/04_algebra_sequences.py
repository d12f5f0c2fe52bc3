"""Weights for Dales-Davie type algebras and composition homomorphisms.

``M_n = (n!)**(3/2)`` is an algebra sequence that forces non-analytic
functions (``d(M) = 0``), yet ``n**2 M_(n-1) / M_n = sqrt(n)`` is unbounded.
So the map ``phi(z) = (1 + z**2) / 2`` on ``[0, 1]``, whose derivative reaches
modulus 1, meets neither sufficient condition for composition to be bounded.
"""

# %%
from fractions import Fraction

from fderiv import algebra as alg
from fderiv import expr as ex
from fderiv import families as fam

M = alg.AlgebraSeq.factorial_power(Fraction(3, 2))
print("algebra sequence up to N=40:", alg.is_algebra_sequence(M, 40).status)
print("constant sequence:", alg.is_algebra_sequence(alg.AlgebraSeq.explicit([1] * 6), 5))

# %%
est = alg.d_estimate(M, 60)
print("d estimate at n=60:", est.last, est.verdict)
print("ratio at n = 4, 25, 100:", [alg.hom_ratio(M, n) for n in (4, 25, 100)])

# %%
unit = fam.interval_family()
phi = ex.DerivSequence(["div(add(1,pow(z,2)),2)", "z", "1"])
half = ex.DerivSequence(["mul(0.5,z)", "0.5"])
for name, seq in (("(1+z^2)/2", phi), ("z/2", half)):
    v = alg.hom_condition(seq, unit, M)
    print(f"{name:10} sup|phi'| = {v.sup_derivative:.3f}  condition {v.condition}  {'; '.join(v.reasons)}")

# %% Truncated norm ratios for f = z^8 grow with the truncation order.
test = ex.holo_derivatives(ex.parse("pow(z,8)"), 8)
for N in (2, 4, 8):
    row = alg.hom_norm_probe(phi.padded(N), unit, unit, M, [test], N)[0]
    print(f"N={N}  ||f o phi|| / ||f|| = {row['ratio']:.4f}")

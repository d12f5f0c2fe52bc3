"""Higher derivatives of a composite from the Faa di Bruno table."""

# %%
import numpy as np

from fderiv import composition as comp
from fderiv import expr as ex

for t in comp.fdb_terms(4):
    print(f"i={t.i}  a={t.a}  coefficient={t.coeff}  contribution={t.contribution}")
print("Bell numbers:", [comp.bell_number(k) for k in range(1, 11)])

# %% Compare with iterated symbolic differentiation of f(phi(z)).
f = ex.parse("add(pow(z,5),mul(const(0,2),pow(z,2)))")
phi = ex.parse("add(pow(z,2),mul(0.5,z))")
k = 5
via_table = comp.fdb_apply(ex.holo_derivatives(f, k), ex.holo_derivatives(phi, k), k)
iterated = ex.mk_compose(f, phi)
for _ in range(k):
    iterated = ex.holo_derivative(iterated)
z = np.array([0.3 + 0.2j, -0.5 + 0.1j, 0.9j])
print(ex.evaluate(via_table, z))
print(ex.evaluate(iterated, z))

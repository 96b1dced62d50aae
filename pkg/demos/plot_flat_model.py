"""
The flat model and its invariants
=================================

Build the pair z_y = z_x^2/4, z_xxx = 0, check that it is in the class,
and read off the Levi form from the standard coframe.
"""

# %%
# Every invariant of the flat model vanishes structurally, i.e. it
# simplifies to the literal zero without any random sampling.
from paracr.invariants import classify
from paracr.forms import levi_form
from paracr.scenarios import flat_model

sys_ = flat_model()
report = classify(sys_)
for name in ("W", "M", "N", "Z"):
    inv = getattr(report, name)
    print(name, "=", inv.expr, "->", inv.verdict.status.value)
print("flat:", report.flat)

# %%
# The Levi form has rank one: only the first row survives.
L = levi_form(sys_)
for row in L.matrix:
    print([str(e) for e in row])
print("det L =", L.det)

# %%
# Perturbing H away from zero breaks integrability, and the verdict carries
# a witness point that can be replayed.
from paracr.jet import PdeSystem, integrability_residual
from paracr.identity import is_zero
from paracr.evaluate import evaluate

bad = PdeSystem.parse("p^2/4", "p")
res = integrability_residual(bad)
v = is_zero(res)
print(v.status.value, "value", v.value, "replayed", evaluate(res, v.witness))

"""
The z_y = f(z_x) family
=======================

For every profile f with f'' nonzero the mixed invariant and the Chern
invariant vanish, while W is a nonzero multiple of the Monge invariant.
"""

# %%
# Take f = p^4.  H is forced by integrability.
from paracr.expr import Var, add, mul, power
from paracr.identity import is_zero
from paracr.invariants import chern, mixed_N, monge_B, wunschmann
from paracr.scenarios import f_family
from paracr.simplify import simplify

sys_ = f_family("p^4")
print("H =", sys_.H)
print("N =", simplify(mixed_N(sys_)), " Z =", simplify(chern(sys_.H)))
print("W =", simplify(wunschmann(sys_)))

# %%
# W - 2 r^3 B vanishes, also for an opaque profile.
opaque = f_family("f")
gap = add(wunschmann(opaque), mul(-2, power(Var("r"), 3), monge_B(opaque.G)))
print(is_zero(gap).status.value)

# %%
# The whole battery, including the change to (X, Y, P, Q, q) coordinates and
# the geodesic check on the solution curves, in one call.
from paracr.scenarios import run_example_suite

rep = run_example_suite("f")
print("passed:", rep.passed)
print("pullback after rescaling:", [v.status.value for v in rep.pullback_match])

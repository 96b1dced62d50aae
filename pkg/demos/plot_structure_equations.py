"""
Flatness of abstract structure equations
========================================

Load a structure-equation fixture, zero its coefficients and confirm
that d^2 = 0 and that the connection is flat.
"""

# %%
from paracr.eds import (
    classify_residuals,
    connection_curvature,
    connection_mutations,
    flat_specialize,
    load_connection,
    load_system,
)

sys_ = load_system("sysendu")
flat = flat_specialize(sys_, sys_.coefficients)
print(classify_residuals(flat.d_squared_residuals()))

# %%
# With generic coefficients d^2 does not close: the derivative
# coefficients carry no differentials of their own.
print(classify_residuals(sys_.d_squared_residuals()))

# %%
ode = load_system("ode10")
flat_ode = flat_specialize(ode, ode.coefficients)
w = load_connection(system=flat_ode)
K = connection_curvature(w)
print("curvature zero:", all(e.is_zero for row in K for e in row))

# %%
# Flip one sign anywhere in the connection and the curvature notices.
mutation, mutated = next(iter(connection_mutations(w)))
K = connection_curvature(mutated)
print(mutation, "->", sum(not e.is_zero for row in K for e in row), "nonzero entries")

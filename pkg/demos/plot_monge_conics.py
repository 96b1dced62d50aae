"""
Conics and the Monge expression
===============================

Eliminating the six coefficients of a conic through G(p) gives a 6x6
determinant which factors through the Monge expression.
"""

# %%
from fractions import Fraction

from paracr import parse
from paracr.invariants import monge
from paracr.monge import conic_fit, elimination_determinant
from paracr.simplify import simplify

for text in ("p^5", "1/p", "3*p^2 - p + 1"):
    G = parse(text)
    print(f"{text:>14}:  det = {simplify(elimination_determinant(G))}   M = {simplify(monge(G))}")

# %%
# Sampling a parabola at rational points recovers the conic exactly.
samples = [(Fraction(k), Fraction(k * k, 4)) for k in range(-3, 4)]
fit = conic_fit(samples)
print([str(c) for c in fit.coeffs], fit.exact)

# %%
# Floating samples of a quintic do not lie on any conic.
fit = conic_fit([(k / 3, (k / 3) ** 5) for k in range(1, 12)])
print("residual", fit.residual)

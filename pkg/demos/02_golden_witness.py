"""
Building a nested-interval witness
==================================

Why phi^2 is exceptional for the squares, one ingredient at a time: the
approximation margin of phi, the empty window around 0, the values piling up
in the wider window, and finally the exact nested intervals.
"""

import json
from fractions import Fraction

from projlab.classifier import build_exceptional_witness
from projlab.diophantine import L_alpha_points, ba_margin, cf_expand, convergents, accumulation_values
from projlab.exact import PHI, PHI_SQUARED
from projlab.generators import GeneratorSpec, materialize
from projlab.geometry import Window

# %%
# Golden ratio: all partial quotients equal one, and m * dist(m phi, Z) stays
# bounded away from zero.  The minimum is taken at m = 1; the tail hovers at 1/sqrt 5.
print("partial quotients:", cf_expand(PHI).head(10))
print("convergents:", [str(c) for c in convergents(cf_expand(PHI), 8)])
m = ba_margin(PHI, 2000)
print(f"margin over m <= 2000: {m.margin:.6f} at m = {m.argmin}")

# %%
# Factoring phi^2 m^2 - n^2 = (m phi - n)(m phi + n) turns that margin into a
# gap around zero.  Scan every m up to 2000 for values in (-0.647, 0.647).
Q = Window(Fraction(-647, 1000), Fraction(647, 1000))
print("values in Q:", L_alpha_points(PHI_SQUARED, 2000, Q))

# %%
# Good approximations m phi ~ n (the Fibonacci pairs) push values into the
# wider window |v| < 2 phi + 1 again and again.
for v in accumulation_values(PHI, 10**4)[:8]:
    print(f"  m={v.m:>5}  n={v.n:>5}  value={float(v.value):+.6f}")

# %%
# The witness rescales P and Q around each chosen point; the ratio of |Q_k| to
# |J_k| does not move, and beta sits inside every P_k, all in exact arithmetic.
P = Window(Fraction(-1059, 250), Fraction(1059, 250))
ts = materialize(GeneratorSpec.squares("l_alpha"), 10**5)
w = build_exceptional_witness([ts], PHI_SQUARED, P, Q)
print(f"witness length {len(w)}, constant ratio {w.ratio}")
print(json.dumps(w.to_json()["steps"][:2], indent=1))

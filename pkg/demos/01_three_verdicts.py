"""
Three directions, three verdicts
================================

A walk through the classifier on three point sets where the answer is known
by hand: half-integer images of the lattice, the dense orbit {n + k sqrt 2},
and the set of squares looked at along phi squared.
"""

from fractions import Fraction

from projlab.classifier import ClassifierParams, RadiiSchedule, classify_direction
from projlab.exact import PHI_SQUARED, SQRT2
from projlab.generators import GeneratorSpec
from projlab.sequences import SequenceSpec


def show(label, c):
    print(f"{label:>28}: {c.verdict}")
    for row in c.stats["per_radius"]:
        print(f"{'':>30}R={row['radius']:>9.0f}  count={row['count']:>6}  distinct={row['distinct']:>6}  "
              f"max_gap={row['max_gap']:.4f}  min_gap={row['min_gap']}")


# %%
# Slope 1/2 on the integer lattice sends every point to a half integer, so the
# image inside [-10, 10] freezes at 41 values once the radius is large enough.
c = classify_direction(GeneratorSpec.lattice(), Fraction(1, 2), RadiiSchedule(10, 4, 4), ClassifierParams(T=10))
show("lattice, beta = 1/2", c)

# %%
# Rows at heights k = 1, 2, ... seen along slope sqrt 2 give n + k sqrt 2, which
# fills [-1, 1] ever more finely as k grows: the largest gap keeps shrinking.
rows = GeneratorSpec.product(SequenceSpec.arithmetic(1))
show("rows k, beta = sqrt 2", classify_direction(rows, SQRT2, RadiiSchedule(100, 4, 5), ClassifierParams(T=1)))

# %%
# The squares, with the first coordinate negated, project to phi^2 m^2 - n^2.
# Near zero nothing ever lands (the golden ratio is badly approximable), yet the
# wider window keeps collecting values: an exceptional direction.
sq = GeneratorSpec.squares("l_alpha")
params = ClassifierParams.from_json({"T": "1059/250", "rho": 1.1, "extra_windows": [["-647/1000", "647/1000"]]})
c = classify_direction(sq, PHI_SQUARED, RadiiSchedule(100, 16, 4), params)
show("squares, beta = phi^2", c)
print(f"{'':>30}P = {c.P}, empty Q = {c.Q}")

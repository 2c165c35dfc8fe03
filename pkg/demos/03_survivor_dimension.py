"""
Survivor sets and box counting
==============================

Directions beta whose orbit {beta r_k} avoids a fixed window form a large set
when r_k grows geometrically and a thin one when r_k = k.  Box counting at
dyadic scales makes the difference visible; the log-log table is written as
CSV for plotting elsewhere.
"""

from fractions import Fraction
from pathlib import Path

from projlab.dimension import box_dim_estimate, cantor_union, dyadic_scales, survivors_nd
from projlab.geometry import Window
from projlab.sequences import SequenceSpec

out = Path("demo-out")
out.mkdir(exist_ok=True)

# %%
# Calibrate on the middle-thirds Cantor set first.
cal = box_dim_estimate(cantor_union(8), [Fraction(1, 3**j) for j in range(2, 9)])
print(f"Cantor level 8: slope {cal.slope:.4f}")

# %%
# Survivors of the window (1/32, 9/32) on a grid of 2^14 boxes.
target = Window(Fraction(1, 32), Fraction(9, 32))
for label, seq, K in [("2^k", SequenceSpec.geometric(2), 10), ("k", SequenceSpec.arithmetic(1), 1000)]:
    ds = survivors_nd(seq, K, target, 14)
    rep = box_dim_estimate(ds, dyadic_scales(1, 14), label=f"box-dimension estimate at depth K={K}")
    print(f"r_k = {label:>3}, K = {K:>4}: {len(ds):>4} intervals, measure {float(ds.measure()):.5f}, "
          f"slope {rep.slope:.3f}")
    (out / f"survivors_{label.replace('^', '')}.csv").write_text(rep.to_csv())

# %%
# Longer prefixes only remove boxes.
seq = SequenceSpec.geometric(2)
print("measure by depth:", [round(float(survivors_nd(seq, K, target, 14).measure()), 5) for K in (4, 6, 8, 10)])

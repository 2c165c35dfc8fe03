import math
from fractions import Fraction

import numpy as np
import pytest

from projlab.dimension import (DimensionError, DirectionSet, box_count, box_dim_estimate, cantor_union,
                               dyadic_scales, survivors_nd)
from projlab.geometry import Window
from projlab.sequences import SequenceError, SequenceSpec


def covered(ds, n):
    """Indices of the width-1/n grid boxes covered by an interval union aligned to that grid."""
    out = set()
    for w in ds.members:
        out.update(range(int(w.lo * n), int(w.hi * n)))
    return out


def test_cantor_slope():
    rep = box_dim_estimate(cantor_union(8), [Fraction(1, 3**j) for j in range(2, 9)])
    assert rep.counts == [2**j for j in range(2, 9)]
    assert abs(rep.slope - math.log(2) / math.log(3)) <= 0.05


def test_full_interval_slope():
    rep = box_dim_estimate(DirectionSet.intervals([(0, 1)]), dyadic_scales(1, 12))
    assert abs(rep.slope - 1) <= 0.02
    assert rep.counts == [2**j for j in range(1, 13)]


def test_isolated_points_slope():
    pts = np.random.default_rng(3).uniform(0, 1, 100)
    rep = box_dim_estimate(DirectionSet.points(pts), dyadic_scales(1, 30))
    assert rep.slope <= 0.1 and rep.counts[-1] == 100


def test_counts_monotone_and_bounded():
    ds = survivors_nd(SequenceSpec.geometric(2), 10, Window(Fraction(1, 32), Fraction(9, 32)), 14)
    scales = dyadic_scales(1, 14)
    rep = box_dim_estimate(ds, scales)
    assert rep.counts == sorted(rep.counts)  # scales run coarse to fine
    for w, n in zip(rep.scales, rep.counts):
        assert n <= math.ceil(1 / w)


def test_affine_invariance():
    base = cantor_union(6)
    doubled = DirectionSet.intervals([(2 * w.lo, 2 * w.hi) for w in base.members], ambient=(0, 2))
    sc = [Fraction(1, 3**j) for j in range(1, 7)]
    a = box_dim_estimate(base, sc)
    b = box_dim_estimate(doubled, [2 * s for s in sc])
    assert a.counts == b.counts and a.slope == pytest.approx(b.slope, abs=1e-12)


def test_survivor_examples():
    two = survivors_nd(SequenceSpec.geometric(2), 8, Window(Fraction(1, 2), Fraction(3, 4)), 14)
    assert not two.empty
    lin = survivors_nd(SequenceSpec.arithmetic(1), 1000, Window(Fraction(3, 8), Fraction(5, 8)), 14)
    assert lin.measure() <= Fraction(16, 2**14)
    assert survivors_nd(SequenceSpec.arithmetic(1), 10, Window(0, 1), 10).empty


def test_survivors_against_direct_orbit():
    target = Window(Fraction(1, 2), Fraction(3, 4))
    ds = survivors_nd(SequenceSpec.geometric(2), 8, target, 10)
    got = covered(ds, 2**10)
    want = {i for i in range(2**10)
            if all(not target.contains((Fraction(2 * i + 1, 2**11) * 2**k) % 1) for k in range(1, 9))}
    assert got == want


def test_survivors_antitone():
    seq = SequenceSpec.geometric(3)
    n = 2**12
    t1 = Window(Fraction(1, 4), Fraction(1, 2))
    t2 = Window(Fraction(1, 4), Fraction(5, 8))
    small_k = covered(survivors_nd(seq, 5, t1, 12), n)
    big_k = covered(survivors_nd(seq, 9, t1, 12), n)
    wide = covered(survivors_nd(seq, 9, t2, 12), n)
    assert big_k <= small_k and wide <= big_k


def test_errors_and_degenerate():
    with pytest.raises(DimensionError):
        survivors_nd(SequenceSpec.geometric(2), 3, Window(0, Fraction(1, 2)), 8)
    with pytest.raises(SequenceError):
        survivors_nd(SequenceSpec.explicit([1, 3, 2, 5, 6]), 5, Window(0, Fraction(1, 2)), 8)
    with pytest.raises(DimensionError):
        DirectionSet.intervals([(0, Fraction(1, 2)), (Fraction(1, 4), 1)])
    rep = box_dim_estimate(DirectionSet.intervals([]), dyadic_scales(1, 6))
    assert rep.degenerate and rep.slope == 0
    assert rep.to_json()["label"].startswith("box-dimension estimate")
    assert box_dim_estimate(cantor_union(3), dyadic_scales(1, 4)).to_csv().startswith("log_inv_w,log_N")

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from projlab.generators import (GeneratorError, GeneratorSpec, ResourceCapError, keyed_uniform, materialize,
                                materialize_strip, pair_slope_set, syndetic_check)
from projlab.sequences import SequenceError, SequenceSpec


def as_set(ts):
    return {tuple(p) for p in ts.points.tolist()}


def brute_powers(a, R, signs=((1, 1), (1, -1), (-1, 1), (-1, -1))):
    out = set()
    top = int(R ** (1 / a)) + 2
    for m in range(1, top):
        for n in range(1, top):
            for s1, s2 in signs:
                p = (s1 * float(m) ** a, s2 * float(n) ** a)
                if p[0] ** 2 + p[1] ** 2 <= R * R:
                    out.add(p)
    return out


def test_squares_small_radius():
    # (4,4) has norm sqrt(32) > 5, so only three points remain
    assert as_set(materialize(GeneratorSpec.squares(), 5)) == {(1, 1), (1, 4), (4, 1)}
    assert as_set(materialize(GeneratorSpec.squares("l_alpha"), 5)) == {(-1, 1), (-1, 4), (-4, 1)}


def test_lattice_and_product_examples():
    assert as_set(materialize(GeneratorSpec.lattice(), 1)) == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    got = as_set(materialize(GeneratorSpec.product(SequenceSpec.geometric(2)), 4))
    assert got == {(n, 2) for n in range(-3, 4)} | {(0, 4)}


@pytest.mark.parametrize("R", [1, 2.5, 7, 13.7])
def test_lattice_brute_force(R):
    want = {(i, j) for i in range(-15, 16) for j in range(-15, 16) if i * i + j * j <= R * R}
    assert as_set(materialize(GeneratorSpec.lattice(), R)) == want


@pytest.mark.parametrize("a", [1.5, 2, 3, 0.7])
def test_signed_powers_brute_force(a):
    # np.power and ** may differ in the last ulp for fractional exponents
    rnd = lambda s: {(round(x, 9), round(y, 9)) for x, y in s}
    assert rnd(as_set(materialize(GeneratorSpec.powers(a), 30))) == rnd(brute_powers(a, 30))


def test_product_brute_force():
    rseq = SequenceSpec.polynomial(2)
    want = {(n, k * k) for k in range(1, 10) for n in range(-40, 41) if n * n + k**4 <= 40 * 40}
    assert as_set(materialize(GeneratorSpec.product(rseq), 40)) == want


def test_jittered_displacements_bounded():
    ts = materialize(GeneratorSpec.jittered(0.4, 3), 12)
    base = np.round(ts.points)
    assert np.all(np.hypot(*(ts.points - base).T) <= 0.4 + 1e-12)
    assert len(np.unique(base, axis=0)) == len(ts)


def test_explicit_dedup_and_exact():
    ts = materialize(GeneratorSpec.explicit([[0, 0], [1, 1], [0, 0], ["1/2", 3]]), 10)
    assert len(ts) == 3
    assert ts.exact is not None


SPECS = [
    GeneratorSpec.lattice(),
    GeneratorSpec.squares(),
    GeneratorSpec.squares("l_alpha"),
    GeneratorSpec.powers(1.5),
    GeneratorSpec.powers(3),
    GeneratorSpec.product(SequenceSpec.geometric(2)),
    GeneratorSpec.product(SequenceSpec.arithmetic(1)),
    GeneratorSpec.jittered(0.4, 7),
    GeneratorSpec.polar(SequenceSpec.arithmetic(1), 5),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_monotone_deterministic_bounded(spec):
    small, big = materialize(spec, 20), materialize(spec, 45)
    assert as_set(small) <= as_set(big)
    assert np.array_equal(materialize(spec, 45).points, big.points)
    assert np.all(big.points[:, 0] ** 2 + big.points[:, 1] ** 2 <= 45**2)
    assert len(as_set(big)) == len(big)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SPECS), st.floats(0, 2 * math.pi, exclude_max=True), st.floats(-5, 5), st.floats(0, 6))
def test_strip_agrees_with_ball(spec, angle, lo, width):
    R = 40
    hi = lo + width
    full = materialize(spec, R)
    v = full.points[:, 0] * math.cos(angle) + full.points[:, 1] * math.sin(angle)
    want = as_set(full) & {tuple(p) for p in full.points[(v >= lo) & (v <= hi)].tolist()}
    assert as_set(materialize_strip(spec, R, angle, lo, hi)) == want


def test_keyed_uniform_is_pointwise():
    i = np.arange(10, dtype=np.int64)
    a = keyed_uniform(1, i, i * 2)
    b = keyed_uniform(1, i[3:5], i[3:5] * 2)
    assert np.array_equal(a[3:5], b)
    assert np.all((a >= 0) & (a < 1))
    assert not np.array_equal(a, keyed_uniform(2, i, i * 2))


def test_validation():
    with pytest.raises(GeneratorError):
        GeneratorSpec.powers(0)
    with pytest.raises(GeneratorError):
        GeneratorSpec("jittered_lattice", {"jitter_bound": -1}, 1)
    with pytest.raises(GeneratorError):
        GeneratorSpec("integer_lattice", {}, 3)
    with pytest.raises(GeneratorError):
        GeneratorSpec("random_polar", {"rseq": SequenceSpec.arithmetic(1)})
    with pytest.raises(SequenceError):
        GeneratorSpec.product(SequenceSpec.explicit([1, 3, 2, 4, 5, 6, 7, 8]))
    with pytest.raises(GeneratorError):
        materialize(GeneratorSpec.lattice(), 0)
    with pytest.raises(ResourceCapError):
        materialize(GeneratorSpec.polar(SequenceSpec.arithmetic(1), 1, k_max=10), 100)


def test_json_round_trip():
    for spec in SPECS:
        assert GeneratorSpec.from_json(spec.to_json()) == spec
    with pytest.raises(GeneratorError):
        GeneratorSpec.from_json({"kind": "integer_lattice", "extra": 1})


def test_pair_slope_set_examples():
    ex = lambda pts: materialize(GeneratorSpec.explicit(pts), 10)
    assert pair_slope_set(ex([[0, 0], [1, 1]])) == [-1]
    assert pair_slope_set(ex([[0, 0], [2, 0]])) == []
    # M0 at R=5 is {(1,1),(1,4),(4,1)}: the pair with equal x2 contributes nothing
    assert pair_slope_set(materialize(GeneratorSpec.squares(), 5)) == [0, 1]
    pts = [(1, 1), (1, 4), (4, 1), (4, 4)]
    got = pair_slope_set(ex([list(p) for p in pts]))
    assert got == [-1, 0, 1]
    for beta in got:
        vals = [Fraction(p[0]) + beta * p[1] for p in pts]
        assert len(set(vals)) < len(vals)


def test_syndetic_check():
    est = syndetic_check(materialize(GeneratorSpec.lattice(), 8), 5, 0.1)
    assert abs(est - math.sqrt(2) / 2) <= 0.1
    est = syndetic_check(materialize(GeneratorSpec.jittered(0.25, 2), 8), 5, 0.1)
    assert est <= math.sqrt(2) / 2 + 0.25 + 0.1
    grow = [syndetic_check(materialize(GeneratorSpec.squares(), 4 * r), r, 0.25) for r in (5, 10, 20)]
    assert grow[0] < grow[1] < grow[2]
    with pytest.raises(GeneratorError):
        syndetic_check(materialize(GeneratorSpec.lattice(), 5), 5, 0.1)

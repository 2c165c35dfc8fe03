import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from projlab.exact import PHI
from projlab.generators import GeneratorSpec, materialize
from projlab.geometry import (Direction, Point2, TruncatedSet, VerticalDirectionError, Window,
                              exact_psi_numerators, phi_psi_consistency, project_phi, project_psi,
                              project_truncated)


def ts_of(points):
    return TruncatedSet(np.array(points, dtype=float), 100.0, "test")


def test_phi_examples():
    assert project_phi(Point2.of(1, 0), Direction.from_angle(0)) == 1
    assert project_phi(Point2.of(0, 1), Direction.from_angle(math.pi / 2)) == pytest.approx(1, abs=1e-15)
    assert project_phi(Point2.of(3, 4), Direction.from_angle(math.pi)) == pytest.approx(-3, abs=1e-15)


def test_psi_examples_exact():
    assert project_psi(Point2.of(3, 4), 2) == 11
    assert project_psi(Point2.of(5, 7), 0) == 5
    assert project_psi(Point2.of(1, 1), -1) == 0
    v = project_psi(Point2.of(1, 3), Fraction(1, 3))
    assert v == 2 and isinstance(v, Fraction)
    with pytest.raises(VerticalDirectionError):
        project_psi(Point2.of(1, 1), Direction.from_angle(math.pi / 2))


def test_consistency_examples():
    assert phi_psi_consistency(Point2.of(1, 0), Direction.from_angle(0)) == 0
    assert phi_psi_consistency(Point2.of(2, 3), Direction.from_angle(math.pi / 4)) <= 1e-12 * (1 + math.sqrt(13))
    p = Point2.of(10**6, 10**6)
    assert phi_psi_consistency(p, Direction.from_angle(1.0)) <= 1e-12 * (1 + p.norm)
    with pytest.raises(VerticalDirectionError):
        phi_psi_consistency(p, Direction.from_angle(math.pi / 2))


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(0, 2 * math.pi, exclude_max=True))
def test_consistency_property(x1, x2, a):
    d = Direction.from_angle(a)
    if d.vertical:
        return
    p = Point2(x1, x2)
    assert phi_psi_consistency(p, d) <= 1e-12 * (1 + p.norm)


def test_direction_invariants():
    d = Direction.from_slope(PHI)
    assert 0 <= d.angle < 2 * math.pi and d.exactness == "quadratic-irrational"
    assert Direction.from_slope(-1).angle == pytest.approx(7 * math.pi / 4)
    assert Direction.from_angle(-math.pi / 2).vertical
    with pytest.raises(ValueError):
        Direction(1.0, 5.0)
    with pytest.raises(ValueError):
        Direction(7.0, None)


def test_window():
    w = Window("1/3", "1/2")
    assert w.width == Fraction(1, 6)
    assert w.contains(Fraction(2, 5)) and not w.contains(Fraction(1, 3))
    assert Window(1, 2).contains(PHI)
    assert Window.from_json(w.to_json()) == w
    with pytest.raises(ValueError):
        Window(1, 1)


def test_point_exact_view():
    with pytest.raises(ValueError):
        Point2(1.0, 2.0, (Fraction(1), Fraction(3)))
    with pytest.raises(ValueError):
        Point2(float("nan"), 0.0)


def test_project_truncated_examples():
    assert project_truncated(ts_of([(0, 0), (1, 0), (2, 0)]), Direction.from_angle(0)).tolist() == [0, 1, 2]
    assert project_truncated(ts_of([(1, 2), (3, 4)]), Direction.from_slope(1), "psi").tolist() == [3, 7]
    # M0 at R=10 has eight points: (4,9) and (9,4) have norm sqrt(97) <= 10
    m0 = materialize(GeneratorSpec.squares(), 10)
    vals = project_truncated(m0, Direction.from_slope(1), "psi", exact=True)
    assert vals == [2, 5, 5, 8, 10, 10, 13, 13]
    with pytest.raises(ValueError):
        project_truncated(ts_of([]), Direction.from_angle(0))
    with pytest.raises(VerticalDirectionError):
        project_truncated(m0, Direction.from_angle(math.pi / 2), "psi")


@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=1, max_size=30),
       st.floats(0, 2 * math.pi, exclude_max=True))
def test_project_truncated_is_sorted_permutation(pts, a):
    ts = ts_of(pts)
    d = Direction.from_angle(a)
    got = project_truncated(ts, d)
    assert np.all(np.diff(got) >= 0)
    assert np.array_equal(np.sort([project_phi(Point2.of(*p), d) for p in pts]), got)


def test_exact_psi_numerators():
    ex = np.array([[1, 2], [3, -4]], dtype=np.int64)
    num, q = exact_psi_numerators(ex, Fraction(2, 3))
    assert q == 3 and num.tolist() == [3 + 4, 9 - 8]
    assert exact_psi_numerators(np.array([[2**61, 1]], dtype=np.int64), Fraction(1, 3)) is None


def test_restrict_matches_materialize():
    big = materialize(GeneratorSpec.lattice(), 20)
    small = big.restrict(7.5)
    assert np.array_equal(small.points, materialize(GeneratorSpec.lattice(), 7.5).points)
    with pytest.raises(ValueError):
        small.restrict(8)

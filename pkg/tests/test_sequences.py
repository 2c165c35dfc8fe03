import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from projlab.sequences import SequenceError, SequenceSpec, analyze_sequence, harmonic_partial


def test_geometric_report():
    rep = analyze_sequence(SequenceSpec.geometric(2), 30)
    assert rep.min_tail_ratio == 2
    assert rep.harmonic_partial < 1


def test_linear_report():
    K = 10**6
    rep = analyze_sequence(SequenceSpec.arithmetic(1), K, [10, 100, 1000, K])
    assert rep.max_tail_gap == 1
    assert rep.min_tail_ratio == Fraction(K, K - 1)
    assert abs(rep.harmonic_partial - (math.log(K) + 0.5772156649)) < 0.01
    # H_N / ln N = 1 + gamma / ln N + ... falls toward 1
    vals = list(rep.dvoretzky.values())
    assert all(v > 1 for v in vals) and vals == sorted(vals, reverse=True)
    assert rep.dvoretzky_monotone is False


def test_square_report():
    K = 10**4
    rep = analyze_sequence(SequenceSpec.polynomial(2), K)
    assert rep.harmonic_partial <= math.pi**2 / 6
    assert abs(rep.harmonic_partial - (math.pi**2 / 6 - 1 / K)) < 1e-4


def test_report_json_labels_depth():
    js = analyze_sequence(SequenceSpec.polynomial(2), 16, [2, 4, 8]).to_json()
    assert js["prefix_length"] == 16 and "K=16" in js["label"]
    assert set(js["dvoretzky_value"]) == {"2", "4", "8"}


@given(st.integers(1, 50), st.integers(1, 5))
def test_count_le_matches_terms(R, e):
    s = SequenceSpec.polynomial(e)
    n = s.count_le(R)
    assert all(s.term(k) <= R for k in range(1, n + 1))
    assert s.term(n + 1) > R


@pytest.mark.parametrize("spec", [SequenceSpec.geometric(Fraction(3, 2)), SequenceSpec.arithmetic(Fraction(1, 3), 2),
                                  SequenceSpec.polynomial(1.5), SequenceSpec.explicit([1, 2, 5, 9])])
def test_prefix_matches_term(spec):
    assert spec.prefix(4) == [spec.term(k) for k in range(1, 5)]
    assert SequenceSpec.from_json(spec.to_json()) == spec


def test_rejects_bad_sequences():
    with pytest.raises(SequenceError):
        SequenceSpec.explicit([1, 1, 2]).prefix(3)
    with pytest.raises(SequenceError):
        SequenceSpec.geometric(1)
    with pytest.raises(SequenceError):
        SequenceSpec.explicit([1, 2]).prefix(5)
    with pytest.raises(SequenceError):
        analyze_sequence(SequenceSpec.arithmetic(1), 4)
    with pytest.raises(SequenceError):
        analyze_sequence(SequenceSpec.arithmetic(1), 20, [8, 4])
    with pytest.raises(SequenceError):
        SequenceSpec.make("fibonacci")


def test_harmonic_partial():
    assert harmonic_partial(SequenceSpec.arithmetic(1), 4) == pytest.approx(25 / 12)

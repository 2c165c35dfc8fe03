import numpy as np
import pytest

from projlab.classifier import ClassifierParams, RadiiSchedule
from projlab.generators import ResourceCapError
from projlab.random_polar import (PolarError, PolarProcessSpec, dichotomy_experiment, random_directions,
                                  sample_process)
from projlab.sequences import SequenceSpec


def test_norms_are_the_radii():
    spec = PolarProcessSpec(SequenceSpec.arithmetic(1), 17)
    ts = sample_process(spec, 10)
    assert len(ts) == 10
    assert np.allclose(np.sort(np.hypot(*ts.points.T)), np.arange(1, 11), atol=1e-12)
    assert len(sample_process(PolarProcessSpec(SequenceSpec.polynomial(2), 17), 100)) == 10


@pytest.mark.parametrize("seed", [0, 1, 2, 99])
def test_prefix_property(seed):
    spec = PolarProcessSpec(SequenceSpec.arithmetic(1), seed)
    big = sample_process(spec, 50).points
    for R in (1, 5, 13, 49.5):
        small = sample_process(spec, R).points
        assert np.array_equal(small, big[:len(small)])


def test_errors():
    spec = PolarProcessSpec(SequenceSpec.arithmetic(1), 1, K_max=5)
    with pytest.raises(ResourceCapError):
        sample_process(spec, 10)
    with pytest.raises(PolarError):
        sample_process(spec, 0)
    with pytest.raises(PolarError):
        dichotomy_experiment(spec, 0, RadiiSchedule(10, 2, 3))


def test_directions_uniform_and_deterministic():
    d = random_directions(500, 4)
    ang = np.array([x.angle for x in d])
    assert np.all((ang >= 0) & (ang < np.pi))
    assert [x.angle for x in random_directions(500, 4)] == ang.tolist()
    assert abs(np.mean(ang) - np.pi / 2) < 0.15


def test_small_dichotomy_report():
    spec = PolarProcessSpec(SequenceSpec.polynomial(2), 5)
    sched = RadiiSchedule(100, 4, 3)
    params = ClassifierParams(T=10, form="phi")
    rep = dichotomy_experiment(spec, 30, sched, params)
    assert sum(rep.counts.values()) == 30
    assert rep.dense_frac + rep.disc_frac + rep.exc_frac + rep.und_frac == 1
    again = dichotomy_experiment(spec, 30, sched, params)
    assert rep.to_json() == again.to_json() and rep.to_csv() == again.to_csv()
    assert len(rep.to_csv().strip().splitlines()) == 31

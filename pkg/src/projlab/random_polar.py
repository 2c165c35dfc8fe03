"""Random polar point processes x_k = r_k (cos a_k, sin a_k) and the Monte Carlo
experiment comparing convergent and divergent sums of 1/r_k."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classifier import (DENSE, DISCRETE, EXCEPTIONAL, UNDETERMINED, ClassifierParams, RadiiSchedule,
                         classify_direction)
from .generators import GeneratorSpec, ResourceCapError, keyed_uniform, materialize
from .geometry import Direction, TruncatedSet
from .sequences import SequenceSpec

VERDICTS = (DENSE, DISCRETE, EXCEPTIONAL, UNDETERMINED)


class PolarError(ValueError):
    pass


@dataclass(frozen=True)
class PolarProcessSpec:
    rseq: SequenceSpec
    seed: int
    K_max: int = 20_000_000

    def generator(self) -> GeneratorSpec:
        return GeneratorSpec.polar(self.rseq, self.seed, self.K_max)

    def to_json(self) -> dict:
        return {"rseq": self.rseq.to_json(), "seed": self.seed, "K_max": self.K_max}


def sample_process(spec: PolarProcessSpec, R: float) -> TruncatedSet:
    """The points with r_k <= R, in order of k; raises ResourceCapError past K_max."""
    if not R > 0:
        raise PolarError("radius must be positive")
    return materialize(spec.generator(), R)


def random_directions(n: int, seed: int) -> list[Direction]:
    """n directions with angles uniform on [0, pi), keyed by (seed, index); vertical is skipped."""
    out = []
    i = 0
    while len(out) < n:
        a = math.pi * float(keyed_uniform(seed, np.array([i], dtype=np.int64), stream=11)[0])
        i += 1
        if abs(a - math.pi / 2) < 1e-15:
            continue
        out.append(Direction.from_angle(a))
    return out


@dataclass
class DichotomyReport:
    counts: dict
    n_directions: int
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def fraction(self, verdict: str) -> Fraction:
        return Fraction(self.counts.get(verdict, 0), self.n_directions)

    @property
    def dense_frac(self) -> Fraction:
        return self.fraction(DENSE)

    @property
    def disc_frac(self) -> Fraction:
        return self.fraction(DISCRETE)

    @property
    def exc_frac(self) -> Fraction:
        return self.fraction(EXCEPTIONAL)

    @property
    def und_frac(self) -> Fraction:
        return self.fraction(UNDETERMINED) + self.fraction("Error")

    def to_json(self) -> dict:
        return {
            "n_directions": self.n_directions,
            "counts": dict(sorted(self.counts.items())),
            "dense_frac": str(self.dense_frac),
            "disc_frac": str(self.disc_frac),
            "exc_frac": str(self.exc_frac),
            "und_frac": str(self.und_frac),
            "errors": self.errors,
        }

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)


CSV_FIELDS = ["index", "angle", "beta", "verdict", "count", "distinct", "max_gap", "min_gap"]


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n", extrasaction="ignore")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def classify_many(gen: GeneratorSpec, directions: list[Direction], sched: RadiiSchedule,
                  params: ClassifierParams):
    """Classify each direction; errors are recorded per row instead of aborting the batch."""
    rows, results, errors = [], [], []
    for i, d in enumerate(directions):
        try:
            c = classify_direction(gen, d, sched, params)
        except (ResourceCapError, ValueError) as exc:
            errors.append({"index": i, "error": type(exc).__name__, "message": str(exc)})
            rows.append({"index": i, "angle": d.angle, "beta": _beta(d), "verdict": "Error",
                         "count": "", "distinct": "", "max_gap": "", "min_gap": ""})
            results.append(None)
            continue
        last = c.stats["per_radius"][-1]
        rows.append({"index": i, "angle": d.angle, "beta": _beta(d), "verdict": c.verdict,
                     "count": last["count"], "distinct": last["distinct"],
                     "max_gap": last["max_gap"], "min_gap": last["min_gap"]})
        results.append(c)
    return rows, results, errors


def _beta(d: Direction):
    return "inf" if d.vertical else d.slope


def dichotomy_experiment(spec: PolarProcessSpec, n_directions: int, sched: RadiiSchedule,
                         params: ClassifierParams = ClassifierParams(form="phi"),
                         direction_seed: int | None = None) -> DichotomyReport:
    """Verdict fractions over uniformly random directions for one polar process."""
    if n_directions < 30:
        raise PolarError("n_directions must be at least 30")
    dirs = random_directions(n_directions, spec.seed if direction_seed is None else direction_seed)
    rows, _, errors = classify_many(spec.generator(), dirs, sched, params)
    counts: dict[str, int] = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    return DichotomyReport(counts, n_directions, rows, errors)

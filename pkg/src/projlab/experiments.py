"""Experiment configs, task runners, canonical report files and bundled recipes.

A config names a task.  ``sweep`` classifies a family of directions for one or
more generators; the other tasks run the exact and statistical checks that do not
fit the sweep shape (identities, survivor sets, metric properties, ...).  Every
run produces ``report.json`` (canonical, deterministic), ``rows.csv`` and
``telemetry.json`` (wall clock and point counts, which are not deterministic).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import diophantine as dio
from .classifier import (DENSE, DISCRETE, EXCEPTIONAL, UNDETERMINED, ClassifierParams, RadiiSchedule,
                         WitnessError, WitnessInvariantError, build_exceptional_witness, classify_direction, pboundedness_evidence)
from .dimension import DirectionSet, box_dim_estimate, cantor_union, dyadic_scales, survivors_nd
from .exact import QuadraticIrrational, is_exact, parse_rational, parse_scalar, rational_str, scalar_to_json
from .generators import GeneratorSpec, ResourceCapError, keyed_uniform, materialize, materialize_strip
from .geometry import Direction, TruncatedSet, Window, phi_values, psi_values
from .metric import hausdorff, nearest_distances, separated_subset
from .random_polar import random_directions
from .sequences import SequenceSpec, analyze_sequence

FORMAT_VERSION = "1"
OUTPUT_ENV = "PROJLAB_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists every offending field."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class InvariantViolation(RuntimeError):
    """A check that must hold by construction failed."""


# -- canonical JSON ------------------------------------------------------------------------

def canonical(obj):
    """Plain JSON data: rationals as "p/q", inf as "inf", numpy scalars unwrapped."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, QuadraticIrrational):
        return obj.to_json()
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if hasattr(obj, "to_json"):
        return canonical(obj.to_json())
    return obj


def canonical_dumps(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


# -- direction sources ---------------------------------------------------------------------

DIRECTION_KINDS = ("explicit", "uniform_random", "diophantine_special")


@dataclass(frozen=True)
class DirectionSource:
    """explicit slopes / angles, n uniform random angles, or named constants."""

    kind: str
    values: tuple = ()
    n: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DIRECTION_KINDS:
            raise ConfigError([f"direction_source.kind: unknown {self.kind!r}"])
        if self.kind == "uniform_random" and self.n < 1:
            raise ConfigError(["direction_source.n: must be positive"])
        if self.kind != "uniform_random" and not self.values:
            raise ConfigError(["direction_source.values: empty"])
        for v in self.values:
            _parse_direction(v)

    def directions(self) -> list[tuple[str, Direction]]:
        if self.kind == "uniform_random":
            return [(f"random[{i}]", d) for i, d in enumerate(random_directions(self.n, self.seed))]
        return [(_label(v), _parse_direction(v)) for v in self.values]

    def __len__(self) -> int:
        return self.n if self.kind == "uniform_random" else len(self.values)

    def to_json(self) -> dict:
        if self.kind == "uniform_random":
            return {"kind": self.kind, "n": self.n, "seed": self.seed}
        return {"kind": self.kind, "values": list(self.values)}

    @classmethod
    def from_json(cls, obj: dict) -> "DirectionSource":
        if not isinstance(obj, dict):
            raise ConfigError(["direction_source: must be an object"])
        extra = set(obj) - {"kind", "values", "n", "seed"}
        if extra:
            raise ConfigError([f"direction_source: unexpected fields {sorted(extra)}"])
        vals = tuple(_freeze(v) for v in obj.get("values", ()))
        return cls(obj.get("kind", ""), vals, int(obj.get("n", 0)), int(obj.get("seed", 0)))


def _freeze(v):
    return tuple(sorted(v.items())) if isinstance(v, dict) else v


def _label(v) -> str:
    if isinstance(v, tuple):
        return ",".join(f"{k}={x}" for k, x in v)
    return str(v)


def _parse_direction(v) -> Direction:
    """A slope (number, "p/q", named constant) or {"angle": radians}."""
    if isinstance(v, tuple):
        d = dict(v)
        if set(d) != {"angle"}:
            raise ConfigError([f"direction {v!r}: only {{'angle': ...}} objects are accepted"])
        return Direction.from_angle(float(d["angle"]))
    try:
        return Direction.from_slope(parse_scalar(v))
    except (ValueError, TypeError) as exc:
        raise ConfigError([f"direction {v!r}: {exc}"]) from None


def _dir_json(v):
    return dict(v) if isinstance(v, tuple) else v


# -- config ---------------------------------------------------------------------------------

TASK_PARAMS = {
    "sweep": {"witness", "cases", "witness_min_length", "expect"},
    "stability": {"generator2", "J"},
    "projection_identity": {"n", "seed", "max_norm"},
    "factorization_identity": {"m_max", "n_alpha", "seed", "alpha_max"},
    "empty_window": {"beta", "M", "scale"},
    "window_accumulation": {"beta", "m_limit", "min_values"},
    "box_dim_calibration": {"cantor_level", "cantor_scales", "interval_scales", "n_points", "point_scales", "seed"},
    "survivors": {"cases", "target", "grid_depth", "scales"},
    "metric_properties": {"n_triples", "seed", "separation", "jitter", "lattice_radius", "cross_checks"},
    "sequence": {"rseq", "K", "N_schedule"},
    "determinism": {"recipes"},
}
NEEDS_GENERATOR = ("sweep", "stability")
NEEDS_DIRECTIONS = ("sweep", "stability")


@dataclass
class ExperimentConfig:
    name: str
    task: str = "sweep"
    generator: Optional[GeneratorSpec] = None
    direction_source: Optional[DirectionSource] = None
    schedule: RadiiSchedule = field(default_factory=RadiiSchedule)
    classifier: ClassifierParams = field(default_factory=ClassifierParams)
    outputs: Optional[str] = None
    task_params: dict = field(default_factory=dict)

    FIELDS = ("name", "task", "generator", "direction_source", "schedule", "classifier", "outputs", "task_params")

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "task": self.task,
            "generator": self.generator.to_json() if self.generator else None,
            "direction_source": self.direction_source.to_json() if self.direction_source else None,
            "schedule": self.schedule.to_json(),
            "classifier": self.classifier.to_json(),
            "outputs": self.outputs,
            "task_params": self.task_params,
        }
        if out["direction_source"] and "values" in out["direction_source"]:
            out["direction_source"]["values"] = [_dir_json(v) for v in out["direction_source"]["values"]]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        """Validate everything up front and report all problems together."""
        problems: list[str] = []
        if not isinstance(obj, dict):
            raise ConfigError(["config must be a JSON object"])
        extra = set(obj) - set(cls.FIELDS)
        if extra:
            problems.append(f"unexpected fields {sorted(extra)}")
        kw: dict[str, Any] = {}
        name = obj.get("name")
        if not isinstance(name, str) or not name:
            problems.append("name: required non-empty string")
        kw["name"] = name
        task = obj.get("task", "sweep")
        if task not in TASK_PARAMS:
            problems.append(f"task: unknown {task!r}")
        kw["task"] = task

        def attempt(key, fn):
            try:
                kw[key] = fn()
            except ConfigError as exc:
                problems.extend(f"{key}: {p}" for p in exc.problems)
            except (ValueError, TypeError, KeyError, ResourceCapError) as exc:
                problems.append(f"{key}: {exc}")

        if obj.get("generator") is not None:
            attempt("generator", lambda: GeneratorSpec.from_json(obj["generator"]))
        if obj.get("direction_source") is not None:
            attempt("direction_source", lambda: DirectionSource.from_json(obj["direction_source"]))
        if "schedule" in obj:
            attempt("schedule", lambda: RadiiSchedule.from_json(obj["schedule"]))
        if "classifier" in obj:
            attempt("classifier", lambda: ClassifierParams.from_json(obj["classifier"]))
        outputs = obj.get("outputs")
        if outputs is not None and not isinstance(outputs, str):
            problems.append("outputs: must be a path string or null")
        kw["outputs"] = outputs
        tp = obj.get("task_params", {})
        if not isinstance(tp, dict):
            problems.append("task_params: must be an object")
            tp = {}
        elif task in TASK_PARAMS:
            bad = set(tp) - TASK_PARAMS[task]
            if bad:
                problems.append(f"task_params: unexpected for {task}: {sorted(bad)}")
        kw["task_params"] = tp
        if task in NEEDS_GENERATOR and obj.get("generator") is None and not tp.get("cases"):
            problems.append(f"generator: required for task {task}")
        if task in NEEDS_DIRECTIONS and obj.get("direction_source") is None:
            problems.append(f"direction_source: required for task {task}")
        if task in TASK_PARAMS and not problems:
            try:
                _validate_task_params(task, tp)
            except ConfigError as exc:
                problems.extend(exc.problems)
            except (ValueError, TypeError, KeyError) as exc:
                problems.append(f"task_params: {exc}")
        if not problems and task == "sweep":
            cls_params = kw.get("classifier", ClassifierParams())
            if cls_params.form == "psi":
                for label, d in kw["direction_source"].directions() if kw["direction_source"].kind != "uniform_random" else []:
                    if d.vertical:
                        problems.append(f"direction_source: {label} is vertical; use form phi")
        if problems:
            raise ConfigError(problems)
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"{path}: not valid JSON ({exc})"]) from None
        return cls.from_json(obj)

    def output_dir(self) -> Path:
        if self.outputs:
            return Path(self.outputs)
        return Path(os.environ.get(OUTPUT_ENV, "projlab-out")) / self.name


def _validate_task_params(task: str, tp: dict) -> None:
    """Parse the structured task parameters once so bad values fail before any work."""
    if task == "sweep":
        labels = []
        for c in tp.get("cases", []):
            if set(c) - {"label", "generator"} or "generator" not in c:
                raise ConfigError(["task_params.cases: each case needs label and generator only"])
            GeneratorSpec.from_json(c["generator"])
            labels.append(c.get("label"))
        labels = labels or ["main"]
        for label, mins in tp.get("expect", {}).items():
            if label not in labels:
                raise ConfigError([f"task_params.expect: unknown case {label!r}"])
            bad = set(mins) - {"dense_frac", "disc_frac", "exc_frac", "und_frac"}
            if bad:
                raise ConfigError([f"task_params.expect: unknown fractions {sorted(bad)}"])
            for v in mins.values():
                parse_rational(v)
    elif task == "stability":
        if "generator2" not in tp:
            raise ConfigError(["task_params.generator2: required"])
        GeneratorSpec.from_json(tp["generator2"])
        if "J" in tp:
            Window.from_json(tp["J"])
    elif task == "survivors":
        for c in tp.get("cases", []):
            SequenceSpec.from_json(c["rseq"])
            if int(c["K"]) < 4:
                raise ConfigError(["task_params.cases: K must be at least 4"])
        Window.from_json(tp["target"])
    elif task == "sequence":
        SequenceSpec.from_json(tp["rseq"])
    elif task == "empty_window":
        parse_scalar(tp.get("beta", "phi"))
    elif task == "window_accumulation":
        parse_scalar(tp.get("beta", "phi"))
    elif task == "determinism":
        for name in tp.get("recipes", []):
            if name not in list_recipes():
                raise ConfigError([f"task_params.recipes: unknown recipe {name!r}"])


# -- reports ---------------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    data: dict
    rows: list[dict]
    csv_fields: list[str]
    telemetry: dict
    paths: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.data.get("passed"))

    @property
    def failure(self) -> Optional[dict]:
        return self.data.get("failure")

    def report_json(self) -> str:
        return canonical_dumps(self.data)

    def rows_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=self.csv_fields, lineterminator="\n", extrasaction="ignore")
        wr.writeheader()
        for r in self.rows:
            wr.writerow({k: _csv_cell(r.get(k, "")) for k in self.csv_fields})
        return buf.getvalue()


def _csv_cell(v):
    v = canonical(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return v


def write_report(report: ExperimentReport, outdir: Path) -> dict:
    """Single writer: all files are produced after the run has finished."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"report": outdir / "report.json", "rows": outdir / "rows.csv", "telemetry": outdir / "telemetry.json"}
    paths["report"].write_text(report.report_json())
    paths["rows"].write_text(report.rows_csv())
    paths["telemetry"].write_text(canonical_dumps({"format_version": FORMAT_VERSION, **report.telemetry}))
    report.paths = {k: str(v) for k, v in paths.items()}
    return report.paths


# -- tasks -------------------------------------------------------------------------------------

@dataclass
class TaskResult:
    rows: list[dict]
    csv_fields: list[str]
    summary: dict
    checks: dict
    witnesses: list = field(default_factory=list)
    points: int = 0


SWEEP_FIELDS = ["case", "index", "direction", "angle", "beta", "verdict", "count", "distinct", "max_gap",
                "min_gap", "in_pair_slope_set", "conflict"]


def _fractions(counts: dict, n: int) -> dict:
    out = {}
    for key, v in (("dense_frac", DENSE), ("disc_frac", DISCRETE), ("exc_frac", EXCEPTIONAL),
                   ("und_frac", UNDETERMINED)):
        c = counts.get(v, 0) + (counts.get("Error", 0) if v == UNDETERMINED else 0)
        out[key] = Fraction(c, n) if n else Fraction(0)
    return out


def _witness_for(gen: GeneratorSpec, d: Direction, cls, cfg: ExperimentConfig, min_length: int):
    P, Q = cls.P, cls.Q
    R = cfg.schedule.radii[-1]
    c = abs(math.cos(d.angle))
    slack = 1e-9 * (1 + float(P.hi) - float(P.lo))
    ts = materialize_strip(gen, R, d.angle, float(P.lo) * c - slack, float(P.hi) * c + slack)
    beta = d.exact_slope if d.exact_slope is not None else d.slope
    return build_exceptional_witness([ts], beta, P, Q, min_length=min_length)


def task_sweep(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    cases = [(c.get("label", f"case{i}"), GeneratorSpec.from_json(c["generator"]))
             for i, c in enumerate(tp.get("cases", []))]
    if not cases:
        cases = [("main", cfg.generator)]
    dirs = cfg.direction_source.directions()
    rows, witnesses, errors = [], [], []
    summary: dict[str, Any] = {"cases": {}}
    points = 0
    for label, gen in cases:
        counts: dict[str, int] = {}
        for i, (dlabel, d) in enumerate(dirs):
            base = {"case": label, "index": i, "direction": dlabel, "angle": d.angle,
                    "beta": "inf" if d.vertical else d.slope}
            try:
                c = classify_direction(gen, d, cfg.schedule, cfg.classifier)
            except ResourceCapError as exc:
                errors.append({"case": label, "index": i, "error": "ResourceCapError", "message": str(exc),
                               "partial": exc.partial})
                rows.append({**base, "verdict": "Error"})
                counts["Error"] = counts.get("Error", 0) + 1
                continue
            except ValueError as exc:
                errors.append({"case": label, "index": i, "error": type(exc).__name__, "message": str(exc)})
                rows.append({**base, "verdict": "Error"})
                counts["Error"] = counts.get("Error", 0) + 1
                continue
            last = c.stats["per_radius"][-1]
            points += c.stats["strip_points"]
            rows.append({**base, "verdict": c.verdict, "count": last["count"], "distinct": last["distinct"],
                         "max_gap": last["max_gap"], "min_gap": last["min_gap"],
                         "in_pair_slope_set": c.stats["in_pair_slope_set"], "conflict": c.stats["conflict"],
                         "classification": c.to_json()})
            counts[c.verdict] = counts.get(c.verdict, 0) + 1
            if c.verdict == EXCEPTIONAL and tp.get("witness"):
                try:
                    w = _witness_for(gen, d, c, cfg, int(tp.get("witness_min_length", 3)))
                    witnesses.append({"case": label, "index": i, "direction": dlabel, "witness": w.to_json()})
                except WitnessInvariantError as exc:
                    raise InvariantViolation(str(exc)) from exc
                except WitnessError as exc:
                    errors.append({"case": label, "index": i, "error": "WitnessError", "message": str(exc)})
        summary["cases"][label] = {"counts": dict(sorted(counts.items())), "n_directions": len(dirs),
                                   **_fractions(counts, len(dirs))}
    summary["errors"] = errors
    checks = {"no_errors": not errors}
    if tp.get("witness"):
        checks["witness_found"] = bool(witnesses)
    # expect: {case label: {fraction name: minimum}}
    for label, mins in sorted(tp.get("expect", {}).items()):
        for key, lo in sorted(mins.items()):
            checks[f"{label}:{key}>={lo}"] = summary["cases"][label][key] >= parse_rational(lo)
    return TaskResult(rows, SWEEP_FIELDS, summary, checks, witnesses, points)


def stability_experiment(gen1: GeneratorSpec, gen2: GeneratorSpec, directions: list[Direction],
                         sched: RadiiSchedule, J: Window = Window(-1, 1), hausdorff_cap: int = 2_000_000) -> dict:
    """Compare P-boundedness verdicts of two generators direction by direction.

    Hausdorff distances between the truncations are estimated at each radius of the
    schedule; a clearly growing sequence raises the ``hausdorff_growing`` warning.
    """
    hd = []
    for R in sched.radii:
        a, b = materialize(gen1, R), materialize(gen2, R)
        if len(a) + len(b) > hausdorff_cap:
            break
        hd.append({"radius": R, "hausdorff": hausdorff(a, b) if len(a) and len(b) else math.inf})
    vals = [h["hausdorff"] for h in hd]
    growing = (len(vals) >= 2 and all(y >= x for x, y in zip(vals, vals[1:]))
               and vals[-1] >= 2 * max(vals[0], 1e-12))
    rows, agree = [], 0
    for i, d in enumerate(directions):
        e1 = pboundedness_evidence(gen1, d, J, sched)
        e2 = pboundedness_evidence(gen2, d, J, sched)
        same = e1.verdict == e2.verdict
        agree += same
        rows.append({"index": i, "angle": d.angle, "verdict1": e1.verdict, "verdict2": e2.verdict, "agree": same,
                     "max_norm1": e1.max_norms[-1], "max_norm2": e2.max_norms[-1]})
    n = len(directions)
    return {
        "rows": rows,
        "agreement": Fraction(agree, n) if n else Fraction(1),
        "hausdorff": hd,
        "hausdorff_growing": growing,
        "J": J.to_json(),
    }


STABILITY_FIELDS = ["index", "angle", "verdict1", "verdict2", "agree", "max_norm1", "max_norm2"]


def task_stability(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    gen2 = GeneratorSpec.from_json(tp["generator2"])
    J = Window.from_json(tp["J"]) if "J" in tp else Window(-1, 1)
    dirs = [d for _, d in cfg.direction_source.directions()]
    res = stability_experiment(cfg.generator, gen2, dirs, cfg.schedule, J)
    summary = {k: v for k, v in res.items() if k != "rows"}
    summary["warnings"] = ["hausdorff_growing"] if res["hausdorff_growing"] else []
    return TaskResult(res["rows"], STABILITY_FIELDS, summary, {"full_agreement": res["agreement"] == 1})


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def task_projection_identity(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    n, seed, max_norm = int(tp.get("n", 100_000)), int(tp.get("seed", 0)), float(tp.get("max_norm", 1e6))
    rng = _rng(seed)
    radius = max_norm ** rng.random(n)  # log-uniform norms in [1, max_norm]
    theta = rng.uniform(0, 2 * math.pi, n)
    pts = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
    alpha = rng.uniform(-math.pi / 2, math.pi / 2, n)
    alpha = alpha[np.abs(alpha) < math.pi / 2]
    pts = pts[: len(alpha)]
    phi = pts[:, 0] * np.cos(alpha) + pts[:, 1] * np.sin(alpha)
    psi = pts[:, 0] + np.tan(alpha) * pts[:, 1]
    scaled = np.abs(phi - np.cos(alpha) * psi) / (1.0 + np.hypot(pts[:, 0], pts[:, 1]))
    worst = float(scaled.max())
    summary = {"pairs": len(alpha), "max_scaled_residual": worst, "tolerance": 1e-12}
    rows = [{"quantile": q, "scaled_residual": float(np.quantile(scaled, q))} for q in (0.5, 0.9, 0.99, 1.0)]
    return TaskResult(rows, ["quantile", "scaled_residual"], summary, {"identity_holds": worst <= 1e-12})


def task_factorization_identity(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    m_max, n_alpha = int(tp.get("m_max", 200)), int(tp.get("n_alpha", 100))
    rng = _rng(int(tp.get("seed", 0)))
    alphas = rng.uniform(0, float(tp.get("alpha_max", 10.0)), n_alpha)
    alphas = np.where(alphas > 0, alphas, 1.0)
    rows = [{"alpha": float(a), "max_relative_residual": dio.factorization_residuals(float(a), m_max)}
            for a in alphas]
    worst = max(r["max_relative_residual"] for r in rows)
    summary = {"m_max": m_max, "n_alpha": n_alpha, "max_relative_residual": worst, "tolerance": 1e-10}
    return TaskResult(rows, ["alpha", "max_relative_residual"], summary, {"identity_holds": worst <= 1e-10})


def task_empty_window(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    beta = parse_scalar(tp.get("beta", "phi"))
    M = int(tp.get("M", 500))
    scale = parse_rational(tp.get("scale", "9/10"))
    margin = dio.ba_margin(beta, M)
    alpha = beta * beta
    half = margin.margin * float(scale) * float(beta)
    # round outward: if the slightly larger rational window is empty, so is the true one
    outer = Fraction(math.ceil(half * 10**12), 10**12)
    inner = Window(-outer, outer)
    pts = dio.L_alpha_points(alpha, M, inner)
    rows = [{"value": p.value, "m": p.m, "n": p.n} for p in pts]
    summary = {"beta": scalar_to_json(beta), "alpha": scalar_to_json(alpha), "M": M,
               "ba_margin": margin.to_json(), "half_width": half,
               "window": inner.to_json(), "hits": len(pts)}
    return TaskResult(rows, ["value", "m", "n"], summary, {"window_empty": not pts})


def task_window_accumulation(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    beta = parse_scalar(tp.get("beta", "phi"))
    m_limit = int(tp.get("m_limit", 10_000))
    need = int(tp.get("min_values", 10))
    vals = dio.accumulation_values(beta, m_limit)
    bound = float(2 * beta + 1)
    inside = [v for v in vals if abs(float(v.value)) < bound]
    rows = [{"value": v.value, "m": v.m, "n": v.n} for v in inside]
    summary = {"beta": scalar_to_json(beta), "m_limit": m_limit, "values_in_window": len(inside),
               "window_half_width": bound}
    return TaskResult(rows, ["value", "m", "n"], summary, {"enough_values": len(inside) >= need})


def _scale_list(spec, base: int) -> list[Fraction]:
    lo, hi = spec
    return [Fraction(1, base**j) for j in range(int(lo), int(hi) + 1)]


def task_box_dim_calibration(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    level = int(tp.get("cantor_level", 8))
    cantor = box_dim_estimate(cantor_union(level), _scale_list(tp.get("cantor_scales", [2, level]), 3))
    full = box_dim_estimate(DirectionSet.intervals([(0, 1)]), _scale_list(tp.get("interval_scales", [1, 12]), 2))
    rng = _rng(int(tp.get("seed", 0)))
    pts = DirectionSet.points(rng.random(int(tp.get("n_points", 100))))
    iso = box_dim_estimate(pts, [float(s) for s in _scale_list(tp.get("point_scales", [4, 24]), 2)])
    target = math.log(2) / math.log(3)
    rows = [{"case": "cantor", "slope": cantor.slope, "residual": cantor.residual},
            {"case": "interval", "slope": full.slope, "residual": full.residual},
            {"case": "isolated_points", "slope": iso.slope, "residual": iso.residual}]
    summary = {"cantor": cantor.to_json(), "interval": full.to_json(), "isolated_points": iso.to_json(),
               "cantor_target": target}
    checks = {"cantor": abs(cantor.slope - target) <= 0.05, "interval": abs(full.slope - 1) <= 0.02,
              "isolated_points": iso.slope <= 0.1}
    return TaskResult(rows, ["case", "slope", "residual"], summary, checks)


def task_survivors(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    target = Window.from_json(tp["target"])
    depth = int(tp.get("grid_depth", 14))
    scales = dyadic_scales(*tp.get("scales", [1, depth]))
    rows, summary, checks = [], {"target": target.to_json(), "grid_depth": depth, "cases": {}}, {}
    for c in tp["cases"]:
        rseq = SequenceSpec.from_json(c["rseq"])
        K = int(c["K"])
        ds = survivors_nd(rseq, K, target, depth)
        rep = box_dim_estimate(ds, scales, label=f"box-dimension estimate at depth K={K}")
        label = c.get("label", rseq.kind)
        rows.append({"case": label, "K": K, "intervals": len(ds), "measure": ds.measure(), "slope": rep.slope,
                     "residual": rep.residual})
        summary["cases"][label] = {"rseq": rseq.to_json(), "K": K, "report": rep.to_json(),
                                   "intervals": len(ds), "measure": ds.measure()}
        if "min_slope" in c:
            checks[f"{label}_min_slope"] = rep.slope >= float(c["min_slope"])
        if "max_slope" in c:
            checks[f"{label}_max_slope"] = rep.slope <= float(c["max_slope"])
    return TaskResult(rows, ["case", "K", "intervals", "measure", "slope", "residual"], summary, checks)


def task_metric_properties(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    rng = _rng(int(tp.get("seed", 0)))
    n = int(tp.get("n_triples", 1000))
    sym = ident = tri = True
    worst_tri = 0.0
    for _ in range(n):
        A, B, C = (rng.uniform(-10, 10, (int(rng.integers(1, 40)), 2)) for _ in range(3))
        ab, ba = hausdorff(A, B), hausdorff(B, A)
        sym &= ab == ba
        ident &= hausdorff(A, A) == 0.0 and (ab > 0 or np.array_equal(np.unique(A, axis=0), np.unique(B, axis=0)))
        excess = hausdorff(A, C) - (ab + hausdorff(B, C))
        worst_tri = max(worst_tri, excess)
        tri &= excess <= 1e-12
    # brute force and tree agree
    worst_cross = 0.0
    for _ in range(int(tp.get("cross_checks", 20))):
        A = rng.uniform(-50, 50, (int(rng.integers(1, 500)), 2))
        B = rng.uniform(-50, 50, (int(rng.integers(1, 500)), 2))
        worst_cross = max(worst_cross, float(np.max(np.abs(nearest_distances(A, B, "brute")
                                                           - nearest_distances(A, B, "tree")))))
    # separated subsets of a jittered lattice, checked pairwise and exhaustively
    s = float(tp.get("separation", 1.0))
    jit = GeneratorSpec.jittered(float(tp.get("jitter", 0.4)), int(tp.get("seed", 0)))
    A = materialize(jit, float(tp.get("lattice_radius", 15))).points
    S = separated_subset(A, s)
    diff = S[:, None, :] - S[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    sep = float(dist.min()) if len(S) > 1 else math.inf
    cover = float(np.max(np.min(np.hypot(A[:, None, 0] - S[None, :, 0], A[:, None, 1] - S[None, :, 1]), axis=1)))
    rows = [{"check": "symmetry", "ok": sym}, {"check": "identity", "ok": ident},
            {"check": "triangle", "ok": tri, "worst": worst_tri},
            {"check": "brute_vs_tree", "ok": worst_cross <= 1e-12, "worst": worst_cross},
            {"check": "separation", "ok": sep >= s, "worst": sep},
            {"check": "covering", "ok": cover < s, "worst": cover}]
    summary = {"n_triples": n, "separated_subset_size": len(S), "source_size": len(A)}
    checks = {r["check"]: r["ok"] for r in rows}
    return TaskResult(rows, ["check", "ok", "worst"], summary, checks)


def task_sequence(cfg: ExperimentConfig) -> TaskResult:
    tp = cfg.task_params
    rep = analyze_sequence(SequenceSpec.from_json(tp["rseq"]), int(tp["K"]), tp.get("N_schedule", []))
    js = rep.to_json()
    rows = [{"N": int(k), "dvoretzky_value": v} for k, v in js["dvoretzky_value"].items()]
    return TaskResult(rows, ["N", "dvoretzky_value"], js, {})


def task_determinism(cfg: ExperimentConfig) -> TaskResult:
    rows = []
    for name in cfg.task_params.get("recipes", []):
        a = run_experiment(load_recipe(name), write=False).report_json()
        b = run_experiment(load_recipe(name), write=False).report_json()
        rows.append({"recipe": name, "identical": a == b, "bytes": len(a)})
    return TaskResult(rows, ["recipe", "identical", "bytes"], {"recipes": len(rows)},
                      {"all_identical": all(r["identical"] for r in rows)})


TASKS: dict[str, Callable[[ExperimentConfig], TaskResult]] = {
    "sweep": task_sweep,
    "stability": task_stability,
    "projection_identity": task_projection_identity,
    "factorization_identity": task_factorization_identity,
    "empty_window": task_empty_window,
    "window_accumulation": task_window_accumulation,
    "box_dim_calibration": task_box_dim_calibration,
    "survivors": task_survivors,
    "metric_properties": task_metric_properties,
    "sequence": task_sequence,
    "determinism": task_determinism,
}


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentReport:
    """Run the configured task, assemble the canonical report and (optionally) write the files."""
    t0 = time.perf_counter()
    failure = None
    try:
        res = TASKS[config.task](config)
    except ResourceCapError as exc:
        failure = {"kind": "resource_cap", "message": str(exc), "partial": exc.partial}
        res = TaskResult([], ["index"], {}, {})
    data = {
        "format_version": FORMAT_VERSION,
        "name": config.name,
        "task": config.task,
        "config": config.to_json(),
        "summary": res.summary,
        "rows": res.rows,
        "witnesses": res.witnesses,
        "checks": res.checks,
        "passed": failure is None and all(res.checks.values()),
        "failure": failure,
    }
    data = canonical(data)
    telemetry = {"name": config.name, "wall_clock_s": time.perf_counter() - t0, "strip_points": res.points}
    rows = [{k: v for k, v in r.items() if k != "classification"} for r in data["rows"]]
    report = ExperimentReport(data, rows, res.csv_fields, telemetry)
    if write:
        write_report(report, config.output_dir())
    return report


# -- bundled recipes ----------------------------------------------------------------------------

def list_recipes() -> list[str]:
    root = resources.files("projlab") / "recipes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def recipe_json(name: str) -> dict:
    path = resources.files("projlab") / "recipes" / f"{name}.json"
    if not path.is_file():
        raise ConfigError([f"unknown recipe {name!r}; available: {', '.join(list_recipes())}"])
    return json.loads(path.read_text())


def load_recipe(name: str, outputs: Optional[str] = None) -> ExperimentConfig:
    obj = recipe_json(name)
    if outputs is not None:
        obj["outputs"] = outputs
    return ExperimentConfig.from_json(obj)

"""``projlab`` command line.

Exit codes: 0 success, 2 validation error, 3 resource cap, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

from .classifier import (ClassifierParams, RadiiSchedule, WitnessInvariantError, build_exceptional_witness,
                         classify_direction)
from .dimension import box_dim_estimate, dyadic_scales, survivors_nd
from .exact import parse_scalar
from .experiments import (ConfigError, ExperimentConfig, InvariantViolation, canonical, canonical_dumps,
                          list_recipes, load_recipe, run_experiment)
from .generators import GeneratorSpec, ResourceCapError, materialize, materialize_strip
from .geometry import Direction, Window, project_truncated
from .sequences import SequenceSpec, analyze_sequence

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4


class UsageError(ValueError):
    pass


# -- flag parsing helpers ------------------------------------------------------------------

def _json_arg(text: str):
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


def parse_rseq(text: str) -> SequenceSpec:
    """geometric:RATIO, polynomial:EXPONENT, arithmetic:STEP, or a JSON object."""
    text = text.strip()
    if text.startswith("{") or text.startswith("@"):
        return SequenceSpec.from_json(_json_arg(text))
    kind, _, arg = text.partition(":")
    if kind == "geometric":
        return SequenceSpec.geometric(arg or 2)
    if kind == "polynomial":
        return SequenceSpec.polynomial(arg or 1)
    if kind == "arithmetic":
        return SequenceSpec.arithmetic(arg or 1)
    raise UsageError(f"cannot parse sequence {text!r}")


def parse_generator(text: str, seed: Optional[int] = None, rseq: Optional[str] = None) -> GeneratorSpec:
    """lattice | squares[:CONVENTION] | powers:A | jittered:BOUND | product | polar, or JSON."""
    text = text.strip()
    if text.startswith("{") or text.startswith("@"):
        return GeneratorSpec.from_json(_json_arg(text))
    kind, _, arg = text.partition(":")
    if kind == "lattice":
        return GeneratorSpec.lattice()
    if kind == "squares":
        return GeneratorSpec.squares(arg or "plain")
    if kind == "powers":
        return GeneratorSpec.powers(parse_scalar(arg))
    if kind == "jittered":
        return GeneratorSpec.jittered(float(arg or 0.4), 0 if seed is None else seed)
    if kind in ("product", "polar"):
        if rseq is None:
            raise UsageError(f"{kind} needs --rseq")
        r = parse_rseq(rseq)
        return GeneratorSpec.product(r) if kind == "product" else GeneratorSpec.polar(r, 0 if seed is None else seed)
    if kind == "explicit":
        return GeneratorSpec.explicit(_json_arg(arg))
    raise UsageError(f"cannot parse generator {text!r}")


def parse_window(text: str) -> Window:
    lo, sep, hi = text.partition(",")
    if not sep:
        raise UsageError(f"window {text!r} must be LO,HI")
    return Window.from_json([lo.strip(), hi.strip()])


def _direction(args) -> Direction:
    if getattr(args, "angle", None) is not None:
        return Direction.from_angle(args.angle)
    if getattr(args, "beta", None) is None:
        raise UsageError("give --beta or --angle")
    b = args.beta[0] if isinstance(args.beta, list) else args.beta
    return Direction.from_slope(parse_scalar(b))


def _schedule(args) -> RadiiSchedule:
    return RadiiSchedule(args.R0, args.factor, args.steps, args.cap)


def _classifier(args) -> ClassifierParams:
    extra = [parse_window(w).to_json() for w in (args.window or [])]
    obj = {"T": args.T, "delta_dense": args.delta_dense, "gamma_disc": args.gamma_disc, "rho": args.rho,
           "form": args.form, "max_points": args.max_points}
    if extra:
        obj["extra_windows"] = extra
    return ClassifierParams.from_json(obj)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _points_csv(points, header=("x1", "x2")) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in points:
        wr.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


# -- subcommands ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    ts = materialize(_gen(args), args.radius)
    if args.format == "csv":
        _emit(_points_csv(ts.points), args.output)
    else:
        _emit(canonical_dumps({"format_version": "1", **ts.to_json()}), args.output)
    return EXIT_OK


def cmd_project(args) -> int:
    gen = _gen(args)
    ts = materialize(gen, args.radius)
    vals = project_truncated(ts, _direction(args), args.form)
    if args.format == "csv":
        _emit(_points_csv([[v] for v in vals], ("value",)), args.output)
    else:
        _emit(canonical_dumps({"format_version": "1", "form": args.form, "values": [float(v) for v in vals]}),
              args.output)
    return EXIT_OK


def cmd_classify(args) -> int:
    c = classify_direction(_gen(args), _direction(args), _schedule(args), _classifier(args))
    _emit(canonical_dumps({"format_version": "1", **c.to_json()}), args.output)
    return EXIT_OK


def cmd_witness(args) -> int:
    gen = _gen(args)
    d = _direction(args)
    P, Q = parse_window(args.P), parse_window(args.Q)
    c = abs(math.cos(d.angle))
    ts = materialize_strip(gen, args.radius, d.angle, float(P.lo) * c - 1e-9, float(P.hi) * c + 1e-9)
    beta = d.exact_slope if d.exact_slope is not None else d.slope
    w = build_exceptional_witness([ts], beta, P, Q, min_length=args.min_length)
    _emit(canonical_dumps({"format_version": "1", **w.to_json()}), args.output)
    return EXIT_OK


def cmd_dimension(args) -> int:
    ds = survivors_nd(parse_rseq(args.rseq), args.K, parse_window(args.target), args.grid_depth)
    lo, _, hi = args.scales.partition(",")
    rep = box_dim_estimate(ds, dyadic_scales(int(lo), int(hi)), label=f"box-dimension estimate at depth K={args.K}")
    if args.format == "csv":
        _emit(rep.to_csv(), args.output)
    else:
        _emit(canonical_dumps({"format_version": "1", "report": rep.to_json(), "intervals": len(ds),
                               "measure": ds.measure()}), args.output)
    return EXIT_OK


def cmd_sequence(args) -> int:
    rep = analyze_sequence(parse_rseq(args.rseq), args.K, args.N or [])
    _emit(canonical_dumps({"format_version": "1", **rep.to_json()}), args.output)
    return EXIT_OK


def _run(cfg: ExperimentConfig, args) -> int:
    rep = run_experiment(cfg, write=not args.no_write)
    summary = {"name": cfg.name, "passed": rep.passed, "checks": rep.data["checks"], "failure": rep.failure,
               "files": rep.paths}
    if isinstance(rep.data["summary"], dict) and "cases" in rep.data["summary"] and cfg.task == "sweep":
        summary["cases"] = rep.data["summary"]["cases"]
    sys.stdout.write(canonical_dumps(summary))
    if rep.failure:
        return EXIT_CAP
    errors = rep.data["summary"].get("errors") if isinstance(rep.data["summary"], dict) else None
    if errors:
        return EXIT_CAP if any(e.get("error") == "ResourceCapError" for e in errors) else EXIT_INVALID
    return EXIT_OK


def _direction_source(args) -> dict:
    if args.beta:
        return {"kind": "explicit", "values": args.beta}
    return {"kind": "uniform_random", "n": args.n, "seed": args.dir_seed}


def _config_from_flags(args, task: str, generator: GeneratorSpec, task_params: dict) -> ExperimentConfig:
    return ExperimentConfig.from_json({
        "name": args.name or task,
        "task": task,
        "generator": generator.to_json(),
        "direction_source": _direction_source(args),
        "schedule": _schedule(args).to_json(),
        "classifier": _classifier(args).to_json(),
        "outputs": args.outputs,
        "task_params": task_params,
    })


def cmd_sweep(args) -> int:
    tp = {"witness": True} if args.witness else {}
    return _run(_config_from_flags(args, "sweep", _gen(args), tp), args)


def cmd_stability(args) -> int:
    g2 = parse_generator(args.generator2, args.seed2, args.rseq)
    tp = {"generator2": g2.to_json(), "J": parse_window(args.J).to_json()}
    return _run(_config_from_flags(args, "stability", _gen(args), tp), args)


def cmd_random(args) -> int:
    gen = GeneratorSpec.polar(parse_rseq(args.rseq), args.seed)
    if args.name is None:
        args.name = "random"
    return _run(_config_from_flags(args, "sweep", gen, {}), args)


def cmd_experiment(args) -> int:
    if args.list:
        sys.stdout.write("\n".join(list_recipes()) + "\n")
        return EXIT_OK
    if args.config_file:
        cfg = ExperimentConfig.load(args.config_file)
        if args.outputs:
            cfg.outputs = args.outputs
    elif args.recipe:
        cfg = load_recipe(args.recipe, outputs=args.outputs)
    else:
        raise UsageError("give a recipe name, --config FILE, or --list")
    return _run(cfg, args)


def _gen(args) -> GeneratorSpec:
    return parse_generator(args.generator, args.seed, args.rseq)


# -- parser ------------------------------------------------------------------------------------

def _add_generator(p, required=True):
    p.add_argument("--generator", "-g", required=required,
                   help="lattice | squares[:l_alpha] | powers:A | jittered:BOUND | product | polar | JSON | @file")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized generators")
    p.add_argument("--rseq", default=None, help="geometric:R | polynomial:E | arithmetic:S | JSON")


def _add_direction(p, many=False):
    if many:
        p.add_argument("--beta", action="append", help="slope (repeatable): number, p/q, phi_squared, sqrt2, ...")
    else:
        p.add_argument("--beta", help="slope: number, p/q, phi_squared, sqrt2, sqrt(n), e")
        p.add_argument("--angle", type=float, help="direction angle in radians (instead of --beta)")


def _add_schedule(p):
    p.add_argument("--R0", type=float, default=100.0)
    p.add_argument("--factor", type=float, default=4.0)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--cap", type=float, default=1e7, help="largest admissible radius")


def _add_classifier(p, form="psi"):
    p.add_argument("--T", default="10", help="half-width of P = [-T, T] (rational)")
    p.add_argument("--delta-dense", type=float, default=0.05)
    p.add_argument("--gamma-disc", type=float, default=0.01)
    p.add_argument("--rho", type=float, default=1.5)
    p.add_argument("--form", choices=("phi", "psi"), default=form)
    p.add_argument("--window", action="append", help="extra grid window LO,HI (repeatable)")
    p.add_argument("--max-points", type=int, default=30_000_000, help="strip point budget per classification")


def _add_run(p):
    p.add_argument("--name", default=None)
    p.add_argument("--outputs", default=None, help="output directory (default $PROJLAB_OUTPUT_DIR/NAME)")
    p.add_argument("--no-write", action="store_true", help="print the summary only")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="projlab", description="Projections of planar point sets along directions.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="materialize a truncated point set")
    _add_generator(p)
    p.add_argument("--radius", "-R", type=float, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("project", help="projected values for one direction")
    _add_generator(p)
    _add_direction(p)
    p.add_argument("--radius", "-R", type=float, required=True)
    p.add_argument("--form", choices=("phi", "psi"), default="psi")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("classify", help="evidence label for one direction")
    _add_generator(p)
    _add_direction(p)
    _add_schedule(p)
    _add_classifier(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="classify many directions and write a report")
    _add_generator(p)
    _add_direction(p, many=True)
    p.add_argument("--n", type=int, default=100, help="number of random directions (without --beta)")
    p.add_argument("--dir-seed", type=int, default=0)
    p.add_argument("--witness", action="store_true", help="build witnesses for exceptional verdicts")
    _add_schedule(p)
    _add_classifier(p)
    _add_run(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("witness", help="nested-interval witness for given P and Q")
    _add_generator(p)
    _add_direction(p)
    p.add_argument("--P", required=True, help="LO,HI")
    p.add_argument("--Q", required=True, help="LO,HI")
    p.add_argument("--radius", "-R", type=float, required=True)
    p.add_argument("--min-length", type=int, default=3)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("dimension", help="survivor set and box-count report")
    p.add_argument("--rseq", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--target", default="1/32,9/32")
    p.add_argument("--grid-depth", type=int, default=14)
    p.add_argument("--scales", default="1,14", help="dyadic exponents LO,HI")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("sequence", help="finite-depth statistics of a rising sequence")
    p.add_argument("--rseq", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--N", type=int, action="append", help="Dvoretzky schedule entry (repeatable)")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("stability", help="compare P-boundedness evidence of two generators")
    _add_generator(p)
    p.add_argument("--generator2", required=True)
    p.add_argument("--seed2", type=int, default=None)
    p.add_argument("--J", default="-1,1")
    _add_direction(p, many=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--dir-seed", type=int, default=0)
    _add_schedule(p)
    _add_classifier(p, form="phi")
    _add_run(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("random", help="random polar process over random directions")
    p.add_argument("--rseq", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--dir-seed", type=int, default=0)
    p.add_argument("--beta", action="append", help=argparse.SUPPRESS)
    _add_schedule(p)
    _add_classifier(p, form="phi")
    _add_run(p)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("experiment", help="run a bundled recipe or a config file")
    p.add_argument("recipe", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--outputs", default=None)
    p.add_argument("--no-write", action="store_true")
    p.set_defaults(func=cmd_experiment)

    for name, sp in sub.choices.items():
        if name == "experiment":
            sp.add_argument("--config", dest="config_file", default=None, help="ExperimentConfig JSON file")
        else:
            sp.add_argument("--config", dest="config_file", default=None,
                            help="JSON file of flag values; its entries override the command line")
        sp.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    return ap


def _apply_config(args, parser) -> None:
    """Values from --config override flags (keys are flag names with dashes or underscores)."""
    if args.command == "experiment" or not args.config_file:
        return
    with open(args.config_file) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{args.config_file}: not valid JSON ({exc})"]) from None
    if not isinstance(obj, dict):
        raise ConfigError([f"{args.config_file}: must hold a JSON object"])
    bad = []
    for key, val in obj.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest) or dest in ("func", "command", "config_file"):
            bad.append(key)
            continue
        if dest in ("generator", "generator2", "rseq") and isinstance(val, dict):
            val = json.dumps(val)
        setattr(args, dest, val)
    if bad:
        raise ConfigError([f"unknown config keys for {args.command}: {sorted(bad)}"])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        return args.func(args)
    except ResourceCapError as exc:
        sys.stderr.write(f"projlab: resource cap: {exc}\n")
        if exc.partial:
            sys.stderr.write(canonical_dumps({"partial": exc.partial}))
        return EXIT_CAP
    except (InvariantViolation, WitnessInvariantError) as exc:
        sys.stderr.write(f"projlab: invariant violation: {exc}\n")
        return EXIT_INVARIANT
    except ConfigError as exc:
        sys.stderr.write("projlab: invalid configuration:\n" + "".join(f"  - {p}\n" for p in exc.problems))
        return EXIT_INVALID
    except (ValueError, TypeError, KeyError, OSError) as exc:
        sys.stderr.write(f"projlab: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Command line: ``dmpvol {learn,rollout,experiment,metrics}``.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
failure (divergence, obstacle penetration), 3 file-system error.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import experiments, serialize
from .config import DmpParams, load_config, parse_config, parse_superquadric
from .dmp import learn_from_demo, rollout
from .errors import ConfigError, NumericalError
from .metrics import compare

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

BUILTIN_SPIRAL = "builtin:spiral"
_CONSTANTS = {"pi": math.pi, "π": math.pi}


def parse_point(text):
    """Comma-separated coordinates; ``pi`` (or ``π``, optionally signed) is accepted."""
    out = []
    for token in text.split(","):
        token = token.strip()
        sign = -1.0 if token.startswith("-") else 1.0
        bare = token.lstrip("+-")
        try:
            out.append(sign * _CONSTANTS[bare] if bare in _CONSTANTS else float(token))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a coordinate list: {text!r}") from None
    return np.array(out)


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _dmp_params(path):
    """DMP parameters from an optional config file (only its ``dmp`` part matters)."""
    if path is None:
        return DmpParams()
    return load_config(path).dmp


def cmd_learn(args):
    params = _dmp_params(args.config)
    if args.dt is not None:
        params.dt = args.dt
    if args.demo == BUILTIN_SPIRAL:
        demo = experiments.spiral_demo(params.dt)
    else:
        demo = serialize.read_trajectory_csv(args.demo)
    model = learn_from_demo(demo, params.K, params.alpha, params.n_basis, damping=params.D)
    text = serialize.model_to_json(model)
    _emit(text, args.out)
    return EXIT_OK


def cmd_rollout(args):
    model = serialize.read_model(args.model)
    if args.tau is not None:
        model = model.with_tau(args.tau)
    for name in ("start", "goal"):
        val = getattr(args, name)
        if val is not None and val.shape != (model.dims,):
            raise ConfigError(f"--{name}: expected {model.dims} coordinates")
    traj = rollout(model, x0=args.start, goal=args.goal, dt=args.dt or 1e-3,
                   horizon=args.horizon)
    _emit(serialize.trajectory_to_csv(traj), args.out)
    return EXIT_OK


def cmd_experiment(args):
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.kind is not None:
        cfg = parse_config({"experiment": args.kind})
    else:
        raise ConfigError("experiment: give --config or an experiment kind")
    if args.dt is not None:
        cfg.dmp.dt = args.dt
    out = args.out or cfg.output
    if out is None:
        raise ConfigError("experiment: an output directory is required (--out or config 'output')")
    result = experiments.run_experiment(cfg)
    experiments.write_outputs(result, out, timestamp=not args.no_timestamp)
    for line in _summary_lines(result):
        print(line)
    return EXIT_OK if experiments.result_ok(result) else EXIT_NUMERIC


def _summary_lines(result):
    if isinstance(result, experiments.BenchmarkResult):
        for run in result.runs:
            label = experiments._method_label(run.method)
            if run.ok:
                r = run.report
                yield (f"{label:15s} max_dev {r.max_deviation:.4f}  max_acc {r.max_accel_norm:9.2f}  "
                       f"min_C {r.min_clearance:.4f}  goal_err {r.final_goal_error:.2e}")
            else:
                yield f"{label:15s} FAILED {run.error}"
    else:
        for run in result:
            yield json.dumps(run.summary())


def cmd_metrics(args):
    ref = serialize.read_trajectory_csv(args.reference)
    adapted = serialize.read_trajectory_csv(args.adapted)
    shapes = []
    if args.obstacles is not None:
        with open(args.obstacles) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.obstacles}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(raw, list):
            raise ConfigError(f"{args.obstacles}: expected a list of shapes")
        shapes = [parse_superquadric(s, f"obstacles[{i}]") for i, s in enumerate(raw)]
    goal = args.goal
    report = compare(ref, adapted, shapes, goal=goal)
    _emit(json.dumps(report.to_dict(series=args.series), indent=2, allow_nan=False) + "\n", args.out)
    return EXIT_OK


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    parent = os.path.dirname(out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(out, "w", newline="\n") as fh:
        fh.write(text)


class _Parser(argparse.ArgumentParser):
    # Usage errors are input errors; argparse would exit with 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="dmpvol",
        description="Movement primitives with volumetric obstacle avoidance.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="fit a model to a demonstration CSV")
    p.add_argument("demo", help=f"trajectory CSV, or {BUILTIN_SPIRAL}")
    p.add_argument("--config", help="experiment config whose 'dmp' section sets K, D, alpha, n_basis")
    p.add_argument("--dt", type=_positive, help="sampling step of the builtin demo")
    p.add_argument("--out", help="model JSON path (stdout by default)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("rollout", help="integrate a model")
    p.add_argument("model", help="model JSON")
    p.add_argument("--start", type=parse_point)
    p.add_argument("--goal", type=parse_point)
    p.add_argument("--tau", type=_positive, help="temporal scaling (the demo duration by default)")
    p.add_argument("--dt", type=_positive, help="integration step (1e-3 by default)")
    p.add_argument("--horizon", type=_positive, help="integrated time (tau by default)")
    p.add_argument("--out", help="trajectory CSV path (stdout by default)")
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("experiment", help="run a configured or canned experiment")
    p.add_argument("kind", nargs="?", choices=("one-obstacle", "two-obstacle", "multirobot"),
                   help="canned experiment with default settings")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--dt", type=_positive)
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment in SVG files")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("metrics", help="compare an adapted trajectory with a reference")
    p.add_argument("reference")
    p.add_argument("adapted")
    p.add_argument("--obstacles", help="JSON list of superquadric shapes for clearance")
    p.add_argument("--goal", type=parse_point, help="goal for the final error (reference end by default)")
    p.add_argument("--series", action="store_true", help="include the per-sample series")
    p.add_argument("--out", help="report JSON path (stdout by default)")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

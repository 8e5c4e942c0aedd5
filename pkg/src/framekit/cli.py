"""Command line front end.

Subcommands:
  canon       apply a canonicalization to a cloud JSON file
  frame       build a weighted frame for a cloud and write it as JSON
  project     average a test function over a frame (invariant or equivariant)
  probe       run a continuity probe or discontinuity hunt, write a report
  experiment  run the classification experiment grid

Cloud JSON: {"d": int, "n": int, "columns": [[...d floats...] x n]}.
Frame JSON: {"group": ..., "atoms": [{...element..., "weight": w}, ...]}.
"""

import argparse
import json
import sys

import numpy as np

from .canon import CANON_METHODS
from .cloud import load_cloud, save_cloud, cloud_from_dict
from .diagnostics import (ProbeSchedule, find_discontinuity,
                          probe_frame_continuity, probe_operator_continuity)
from .frames import (frame_argsort_exact_d2, frame_argsort_mc, frame_od,
                     frame_separated, frame_so2, frame_so2_stable,
                     frame_so3_stable, frame_sod, frame_to_dict,
                     reynolds_frame, separated_collection)
from .harness import (Mlp, flatten, run_experiment, save_results,
                      summarize_results)
from .project import project_equivariant, project_invariant


def _frame_builder(kind, eta, samples, seed):
    """Returns (group_tag, X -> WeightedFrame) for a frame kind."""
    rng = np.random.default_rng(seed)
    if kind == "reynolds":
        return "Sn", lambda X: reynolds_frame(X.shape[1])
    if kind == "separated":
        def build(X, _cache={}):
            key = X.shape
            if key not in _cache:
                _cache[key] = separated_collection(
                    X.shape[1], X.shape[0], np.random.default_rng(seed))
            return frame_separated(X, _cache[key])
        return "Sn", build
    if kind == "argsort-exact":
        return "Sn", frame_argsort_exact_d2
    if kind == "argsort-mc":
        return "Sn", lambda X: frame_argsort_mc(X, samples, rng)
    if kind == "so2":
        return "SOd", lambda X: frame_so2(X, eta=eta)
    if kind == "so2-stable":
        return "SOd", lambda X: frame_so2_stable(X, eta=eta)
    if kind == "sod":
        return "SOd", frame_sod
    if kind == "od":
        return "Od", frame_od
    if kind == "so3-stable":
        return "SOd", frame_so3_stable
    raise SystemExit("unknown frame kind: %s" % kind)


FRAME_KINDS = ("reynolds", "separated", "argsort-exact", "argsort-mc",
               "so2", "so2-stable", "sod", "od", "so3-stable")


def _builtin_fn(name, mode):
    """Builtin test functions for `project`.

    Scalar (invariant mode): frobenius; coord-i-j (picks X[i, j]); poly
    (fixed-seed random quadratic in the flattened entries).  Cloud-valued
    (either mode): cube (elementwise x^3).
    """
    if name == "frobenius":
        return lambda X: float(np.linalg.norm(X))
    if name.startswith("coord-"):
        _, i, j = name.split("-")
        i, j = int(i), int(j)
        return lambda X: float(X[i, j])
    if name == "poly":
        def poly(X):
            x = X.ravel()
            rng = np.random.default_rng(20240817)
            c = rng.standard_normal(x.size)
            q = rng.standard_normal((x.size, x.size))
            return float(c @ x + x @ q @ x)
        return poly
    if name == "cube":
        return lambda X: X ** 3
    raise SystemExit("unknown builtin function: %s" % name)


def _load_fn(spec, mode):
    if spec.startswith("builtin:"):
        return _builtin_fn(spec[len("builtin:"):], mode)
    if spec.startswith("mlp:"):
        with open(spec[len("mlp:"):]) as fh:
            model = Mlp.from_dict(json.load(fh))
        return lambda X: model.forward(flatten(X))
    raise SystemExit("--fn must be builtin:<name> or mlp:<weights.json>")


def _cmd_canon(args):
    X = load_cloud(args.infile)
    save_cloud(args.outfile, CANON_METHODS[args.method](X))


def _cmd_frame(args):
    X = load_cloud(args.infile)
    _, build = _frame_builder(args.kind, args.eta, args.samples, args.seed)
    with open(args.outfile, "w") as fh:
        json.dump(frame_to_dict(build(X)), fh, indent=1)


def _cmd_project(args):
    X = load_cloud(args.infile)
    with open(args.frame) as fh:
        from .frames import frame_from_dict
        frame = frame_from_dict(json.load(fh))
    f = _load_fn(args.fn, args.mode)
    proj = project_invariant if args.mode == "inv" else project_equivariant
    val = proj(frame, f, X)
    val = val.tolist() if isinstance(val, np.ndarray) else float(val)
    json.dump({"mode": args.mode, "value": val}, sys.stdout, indent=1)
    print()


def _cmd_probe(args):
    X = load_cloud(args.at)
    kind, _, rest = args.target.partition(":")
    if kind == "frame":
        group, build = _frame_builder(rest, args.eta, args.samples, args.seed)
        sched = ProbeSchedule(X, load_cloud(args.delta), steps=args.steps)
        report = probe_frame_continuity(build, sched, group,
                                        target=args.target)
    elif kind == "canon":
        op = CANON_METHODS[rest]
        if args.hunt:
            report = find_discontinuity(op, X, np.random.default_rng(args.seed),
                                        trials=args.trials, target=args.target)
        else:
            sched = ProbeSchedule(X, load_cloud(args.delta), steps=args.steps)
            report = probe_operator_continuity(op, sched, target=args.target)
    elif kind == "op":
        # op:<frame kind>+<builtin fn>: the induced invariant average
        fkind, _, fname = rest.partition("+")
        _, build = _frame_builder(fkind, args.eta, args.samples, args.seed)
        f = _builtin_fn(fname, "inv")
        op = lambda Y: project_invariant(build, f, Y)
        if args.hunt:
            report = find_discontinuity(op, X, np.random.default_rng(args.seed),
                                        trials=args.trials, target=args.target)
        else:
            sched = ProbeSchedule(X, load_cloud(args.delta), steps=args.steps)
            report = probe_operator_continuity(op, sched, target=args.target)
    else:
        raise SystemExit("target must be frame:<kind>, canon:<method> "
                         "or op:<kind>+<fn>")
    with open(args.report, "w") as fh:
        json.dump(report.to_dict(), fh, indent=1)
    print("%s: %s" % (args.target, report.verdict))


def _cmd_experiment(args):
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    records = run_experiment(config)
    save_results(args.outfile, records)
    print(summarize_results(records))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="framekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", help="canonicalize a cloud")
    p.add_argument("--method", required=True, choices=sorted(CANON_METHODS))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(run=_cmd_canon)

    p = sub.add_parser("frame", help="build a weighted frame")
    p.add_argument("--kind", required=True, choices=FRAME_KINDS)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(run=_cmd_frame)

    p = sub.add_parser("project", help="average a function over a frame")
    p.add_argument("--frame", required=True)
    p.add_argument("--fn", required=True,
                   help="builtin:<name> or mlp:<weights.json>")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mode", required=True, choices=("inv", "equiv"))
    p.set_defaults(run=_cmd_project)

    p = sub.add_parser("probe", help="continuity probe / discontinuity hunt")
    p.add_argument("--target", required=True,
                   help="frame:<kind>, canon:<method> or op:<kind>+<fn>")
    p.add_argument("--at", required=True)
    p.add_argument("--delta", help="perturbation cloud for the schedule")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--hunt", action="store_true",
                   help="random discontinuity hunt instead of a schedule")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True)
    p.set_defaults(run=_cmd_probe)

    p = sub.add_parser("experiment", help="run the classification experiment")
    p.add_argument("--config", help="JSON config; defaults used if omitted")
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(run=_cmd_experiment)

    args = parser.parse_args(argv)
    args.run(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())

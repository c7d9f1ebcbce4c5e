"""Command-line front end: ``rdlab run | sweep | list | smooth-fit | criterion``.

Exit codes: 0 ok, 2 expected-outcome mismatch, 3 counterexample candidate,
64 usage error, 65 invalid config, 66 missing input, 70 run failure,
74 output I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

from . import scenarios as sc
from .diagnostics import _clean, fit_smoothing, spike
from .errors import ConfigError, RDLabError, ScenarioError
from .meshfield import Grid
from .odecmp import classify_both, classify_criterion
from .trace import SCHEMA_VERSION

EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66
EX_SOFTWARE = 70
EX_IOERR = 74


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with "mismatch"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _real(text):
    if text.lower() in ("inf", "infinity", "oo"):
        return math.inf
    return float(text)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", default=None,
                        help=f"output directory (default: ${sc.OUT_DIR_ENV} or ./rdlab-out)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="trace/table format")
    common.add_argument("--stride", type=int, default=None, help="space-time record stride")
    common.add_argument("--seed", type=int, default=None, help="seed for random initial data")
    common.add_argument("--threads", type=int, default=None, help="sweep worker threads")
    common.add_argument("--user-dir", default=None, help="directory of extra scenario JSON files")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="rdlab", description="Reaction-diffusion blow-up and boundedness laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", parents=[common], help="run one scenario (file or registry name)")
    r.add_argument("config")
    s = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    s.add_argument("config")
    sub.add_parser("list", parents=[common], help="list registry and user scenarios")

    f = sub.add_parser("smooth-fit", parents=[common], help="fit the heat-semigroup smoothing exponent")
    f.add_argument("--p", type=_real, required=True)
    f.add_argument("--q", type=_real, required=True)
    f.add_argument("--n", type=int, choices=(1, 2), default=1)
    f.add_argument("--nodes", type=int, default=None, help="nodes per axis (default 2049 in 1D, 129 in 2D)")
    f.add_argument("--mode", choices=("adapted", "fixed"), default="adapted")

    c = sub.add_parser("criterion", parents=[common], help="classify the integral blow-up criterion")
    c.add_argument("--f", required=True, help="reaction in s (or u)")
    c.add_argument("--lower", type=float, default=0.0)
    c.add_argument("--form", choices=("bu", "reciprocal", "both"), default="bu")
    return p


def _emit(doc, fmt, out=None):
    out = out or sys.stdout
    doc = _clean({"schema_version": SCHEMA_VERSION, **doc})
    if fmt == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return
    flat = {k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in doc.items()}
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
    w.writeheader()
    w.writerow(flat)
    out.write(buf.getvalue())


def _cmd_run(args):
    spec = sc.load_config(args.config, seed=args.seed, stride=args.stride, user_dir=args.user_dir)
    if isinstance(spec, sc.SweepSpec):
        raise ConfigError("this is a sweep config; use 'rdlab sweep'")
    rec = sc.run_scenario(spec, args.out_dir, args.format)
    s = rec.summary
    t_est = "" if s["t_est"] is None else f" t_est={s['t_est']:.6g}"
    print(f"{spec.name}: {s['terminal']} at t={s['t_end']:.6g}{t_est} "
          f"cell={rec.theorem_probe['cell']} exit={rec.exit_status}")
    print(f"trace: {rec.trace_path}")
    print(f"record: {rec.record_path}")
    return rec.exit_status


def _cmd_sweep(args):
    spec = sc.load_config(args.config, seed=args.seed, stride=args.stride, user_dir=args.user_dir)
    if not isinstance(spec, sc.SweepSpec):
        raise ConfigError("this is a scenario config; use 'rdlab run'")
    rows = sc.run_sweep(spec, args.out_dir, args.threads, args.format)
    sys.stdout.write(sc.sweep_table(spec, rows, "csv"))
    return sc.sweep_exit_status(rows)


def _cmd_list(args):
    for row in sc.list_scenarios(args.user_dir):
        src = "" if row["source"] == "builtin" else f"  [{row['source']}]"
        print(f"{row['name']:<20} {row['description']}{src}")
    return 0


def _cmd_smooth(args):
    nodes = args.nodes or (2049 if args.n == 1 else 129)
    grid = Grid.interval(1.0, nodes) if args.n == 1 else Grid.rectangle((1.0, 1.0), nodes)
    fit = fit_smoothing(args.p, args.q, spike(grid, args.p), mode=args.mode)
    _emit({"kind": "smoothing_fit", "nodes": nodes, **fit.to_dict()}, args.format)
    return 0


def _cmd_criterion(args):
    if args.form == "both":
        out = classify_both(args.f, args.lower if args.lower > 0 else 1.0)
        doc = {"kind": "criterion", "f": args.f,
               **{f"{k}_{n}": v for n, ver in out.items() for k, v in ver.to_dict().items()
                  if k != "schema_version"}}
    else:
        v = classify_criterion(args.f, args.lower, args.form)
        doc = {"kind": "criterion", "f": args.f, **v.to_dict()}
    _emit(doc, args.format)
    return 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "list": _cmd_list,
            "smooth-fit": _cmd_smooth, "criterion": _cmd_criterion}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EX_IOERR
    except ScenarioError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EX_SOFTWARE
    except RDLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())

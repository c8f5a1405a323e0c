"""Command-line entry point: gen, estimate, sweep, report, verify-onehop.

Exit codes: 0 success, 1 validation error, 2 failed check.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import AvgDegError, ConfigError
from .graph_model import FAMILIES, ground_truth, read_edge_list, write_edge_list
from .harness import (ALGORITHMS, ExperimentConfig, build_graph, fit_scaling, load_config,
                      read_csv, record_json, run_one, run_trials, write_csv)
from .instances import LB_FAMILIES
from .primitives import DEFAULT_CONSTANTS
from .unknown_n import onehop_check


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _graph_args(p, required_family=False):
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--family", help=f"one of {', '.join(FAMILIES[:-1] + LB_FAMILIES)}")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--gamma", type=int)
    p.add_argument("--extra", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--side", choices=["YES", "NO"])
    p.add_argument("--c", type=int)
    p.add_argument("--graph-seed", type=int, default=0)


def _graph_mapping(args) -> dict:
    if args.graph:
        return {"path": args.graph}
    if not args.family:
        raise ConfigError("give --graph or --family")
    out = {"family": args.family, "seed": args.graph_seed}
    for key in ("n", "d", "k", "s", "gamma", "extra", "a", "b", "side", "c"):
        val = getattr(args, key)
        if val is not None:
            out[key] = val
    return out


def _parse_consts(items) -> dict:
    out = {}
    for item in items or []:
        key, _, val = item.partition("=")
        if key not in DEFAULT_CONSTANTS or not val:
            raise ConfigError(f"bad constant {item!r}")
        out[key] = float(val)
    return out


def cmd_gen(args) -> int:
    graph = _graph_mapping(args)
    if "path" in graph:
        raise ConfigError("gen needs --family")
    graph["seed"] = args.seed
    g, _ = build_graph(graph)
    write_edge_list(g, args.out)
    print(json.dumps({k: v for k, v in ground_truth(g).items() if k != "deg_histogram"}))
    return 0


def cmd_estimate(args) -> int:
    if args.algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {args.algo!r}; choose from {sorted(ALGORITHMS)}")
    cfg = ExperimentConfig("cli", args.algo, _graph_mapping(args), policy=args.policy,
                           eps=args.eps, delta=args.delta, budget=args.budget,
                           median_reps=args.median_reps, n_advice=args.n_advice,
                           constants=_parse_consts(args.const))
    cfg.validate()
    g, family = build_graph(cfg.graph)
    rec, est, _ = run_one(g, ground_truth(g), family, cfg, args.seed)
    print(json.dumps(record_json(rec, est)))
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.output = args.out
    recs = run_trials(cfg)
    if not cfg.output:
        sys.stdout.write(write_csv(recs))
    return 0


def cmd_report(args) -> int:
    recs = read_csv(args.inp)
    band = (args.lo, args.hi) if args.lo is not None and args.hi is not None else None
    rep = fit_scaling(recs, args.expected, args.tolerance, band)
    print(json.dumps(rep.to_dict()))
    return 2 if rep.passed is False else 0


def cmd_verify_onehop(args) -> int:
    g = read_edge_list(args.graph) if args.graph else build_graph(_graph_mapping(args))[0]
    res = onehop_check(g, args.C)
    print(json.dumps(res))
    return 2 if res["premises_hold"] and not res["conclusion_holds"] else 0


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="avgdeg", description="Sublinear average-degree estimation experiments")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a family instance as an edge list")
    _graph_args(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("estimate", help="one estimator run, JSON to stdout")
    _graph_args(e)
    e.add_argument("--algo", required=True)
    e.add_argument("--policy")
    e.add_argument("--eps", type=float, default=0.2)
    e.add_argument("--delta", type=float, default=0.1)
    e.add_argument("--n-advice", type=float)
    e.add_argument("--budget", type=int)
    e.add_argument("--median-reps", type=int, default=1)
    e.add_argument("--const", action="append", metavar="NAME=VALUE")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep", help="run an INI experiment config, CSV out")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="fit the cost scaling exponent of a sweep CSV")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--expected", type=float)
    r.add_argument("--tolerance", type=float)
    r.add_argument("--lo", type=float)
    r.add_argument("--hi", type=float)
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify-onehop", help="check the one-hop heavy-vertex lemma on a graph")
    _graph_args(v)
    v.add_argument("--C", type=float, default=2.0)
    v.set_defaults(func=cmd_verify_onehop)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AvgDegError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

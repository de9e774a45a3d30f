"""Command-line interface: ``tracedist {gen,distinguish,sweep,verify,channel-sim}``.

Exit codes: 0 success, 1 validation error, 2 property-suite failure.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import random
import sys

from . import checks
from .bitstr import as_bits, edit_ball_membership, to_str
from .channel import ChannelParam, parse_q, sample_traces, write_traces
from .distinguish import FAMILIES, ExperimentConfig, run_experiment, sample_pair, scaling_sweep

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2
# numeric ids accepted by ``verify --lemma`` and the suite each one runs
SUITES = {
    "2": "separating-power",
    "3": "pte-divisibility",
    "4": "nonperiodic-extension",
    "5": "indicator-structure",
    "6": "circle-certificate",
    "identity": "identity",
}


class UsageError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _q_list(text: str) -> list:
    return [parse_q(t) for t in text.split(",") if t]


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def cmd_gen(args) -> int:
    if args.k < 1:
        raise UsageError("degenerate pair: k=0 forces x = y")
    rng = random.Random(args.seed)
    x, y = sample_pair(args.n, args.k, rng)
    _, rep = edit_ball_membership(x, y, args.k)
    with _output(args.out) as out:
        print(f"x={to_str(x)}", file=out)
        print(f"y={to_str(y)}", file=out)
        print(f"report={rep.deletions_needed} del / {rep.insertions_needed} ins (lcs={rep.lcs_length})", file=out)
        print(f"seed={args.seed}", file=out)
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for key in ("n", "k", "q", "delta", "trials", "N", "family", "budget", "max_simulated"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    data["seed"] = args.seed if args.seed is not None else data.get("seed", 0)
    missing = {"n", "k", "q"} - data.keys()
    if missing:
        raise UsageError(f"missing required settings: {sorted(missing)}")
    return ExperimentConfig.from_json(data)


def cmd_distinguish(args) -> int:
    cfg = _experiment_config(args)
    res = run_experiment(cfg, args.threads)
    with _output(args.out) as out:
        json.dump(res.to_json(with_records=not args.summary), out, indent=2)
        out.write("\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    res = scaling_sweep(
        _int_list(args.n), _int_list(args.k), _q_list(args.q),
        delta=args.delta, trials=args.trials, seed=args.seed or 0, N=args.N,
        family=args.family, threads=args.threads, max_simulated=args.max_simulated,
    )
    with _output(args.out) as out:
        out.write(res.to_csv())
    for k, slope in res.slopes.items():
        print(f"k={k} slope(log N vs log n)={slope:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    rng = random.Random(args.seed or 0)
    reports = []
    suite = SUITES[args.lemma]
    if suite == "nonperiodic-extension":
        reports.append(checks.check_extension(args.max_p))
    elif suite == "pte-divisibility":
        reports.append(checks.check_pte_divisibility(args.pairs, args.seed or 0))
    elif suite == "indicator-structure":
        inst = checks.random_pipeline_instances(args.instances, (13, args.n_max), range(1, args.k_max + 1), rng)
        reports.append(checks.check_indicator_structure(inst))
    elif suite == "separating-power":
        inst = checks.random_pipeline_instances(args.instances, (13, args.n_max), [1], rng)
        reports.append(checks.check_separating_power(inst))
    elif suite == "circle-certificate":
        cases = checks.circle_cases(rng, natural=args.instances, n_range=(args.n_min, args.n_max))
        reports.extend(checks.check_circle_certificates(cases, _q_list(args.q or "0.1,0.3"), precision_bits=args.precision_bits))
    else:
        reports.append(checks.check_identity(args.n_max, args.ell_max, args.points, parse_q(args.q or "1/4"),
                                             args.seed or 0))
    with _output(args.out) as out:
        for rep in reports:
            print(rep.summary(), file=out)
        print(f"seed={args.seed or 0}", file=out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_channel_sim(args) -> int:
    x = as_bits(args.x)
    ch = ChannelParam(parse_q(args.q))
    traces = sample_traces(x, ch, args.count, args.seed)
    with _output(args.out) as out:
        write_traces(out, traces, len(x), args.q, args.seed)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--precision-bits", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="tracedist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="sample a pair x in B_k(y)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("distinguish", parents=[common], help="Monte Carlo error rate of the tester")
    p.add_argument("--config", help="ExperimentConfig JSON file")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--q")
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--N", type=int, help="override the Hoeffding sample size")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--budget", type=int)
    p.add_argument("--max-simulated", type=int,
                   help="largest N simulated trace by trace; above it hit counts are drawn from the exact binomial")
    p.add_argument("--summary", action="store_true", help="omit per-trial records")
    p.set_defaults(func=cmd_distinguish)

    p = sub.add_parser("sweep", parents=[common], help="grid of experiments as CSV")
    p.add_argument("--n", required=True, help="comma-separated lengths")
    p.add_argument("--k", default="1")
    p.add_argument("--q", default="0.2")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--N", type=int)
    p.add_argument("--family", choices=FAMILIES, default="windows")
    p.add_argument("--max-simulated", type=int, default=2_000_000)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run a property suite")
    p.add_argument("--lemma", required=True, metavar="ID",
                   help="suite id: " + ", ".join(f"{k}={v}" for k, v in SUITES.items()))
    p.add_argument("--max-p", type=int, default=5)
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--n-min", type=int, default=50)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--ell-max", type=int, default=3)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--q", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("channel-sim", parents=[common], help="emit traces of a string")
    p.add_argument("--x", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_channel_sim)
    return parser


_N_MAX_DEFAULTS = {"identity": 10, "6": 200}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command == "verify":
        if args.lemma not in SUITES:
            print(f"error: unknown suite id {args.lemma!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
            return EXIT_INVALID
        if args.n_max is None:
            args.n_max = _N_MAX_DEFAULTS.get(args.lemma, 60)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``dpfrugal {run,sweep,sensitivity,accuracy,generate}``.

Exit codes: 0 success, 1 invalid arguments or configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from dpfrugal import harness
from dpfrugal.estimator import InitPolicy, QuantizationScheme, read_stream
from dpfrugal.streams import generate, parse_distribution, write_stream

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", default="d5", help="d1..d8 or a name, optionally name:param=value,...")
    p.add_argument("--n", type=lambda s: int(float(s)), default=None,
                   help=f"stream length (default {harness.DEFAULT_N}; {harness.FULL_N} with --full)")
    p.add_argument("--q", type=float, default=harness.DEFAULT_Q)
    p.add_argument("--mech", default="laplace", choices=["laplace", "gauss", "zcdp"])
    p.add_argument("--epsilon", type=float, default=harness.DEFAULT_EPSILON)
    p.add_argument("--delta", type=float, default=harness.DEFAULT_DELTA)
    p.add_argument("--rho", type=float, default=harness.DEFAULT_RHO)
    p.add_argument("--reps", type=int, default=harness.DEFAULT_REPS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--digits", type=int, default=0)
    p.add_argument("--init", default="zero", choices=["zero", "first"])
    p.add_argument("--oracle-cap", type=lambda s: int(float(s)), default=harness.DEFAULT_ORACLE_CAP)
    p.add_argument("--full", action="store_true", help="use the full-scale default stream length")


def _config(args) -> harness.ExperimentConfig:
    n = args.n if args.n is not None else (harness.FULL_N if args.full else harness.DEFAULT_N)
    scheme = QuantizationScheme(args.digits)
    items = label = None
    if getattr(args, "input", None):
        items, scheme, _ = read_stream(args.input, scheme)
        label = Path(args.input).name
    return harness.ExperimentConfig(
        dist=parse_distribution(args.dist),
        n=n,
        q=args.q,
        mechanism=harness.make_mechanism(args.mech, args.epsilon, args.delta, args.rho),
        reps=args.reps,
        master_seed=args.seed,
        scheme=scheme,
        init_policy=InitPolicy(args.init),
        oracle_cap=args.oracle_cap,
        output=Path(args.out) if getattr(args, "out", None) else None,
        items=items,
        label=label,
    )


def cmd_run(args) -> int:
    records, mean = harness.run_experiment(_config(args))
    if args.out is None:
        harness.write_rows(sys.stdout, records + [mean])
    else:
        print(f"wrote {len(records) + 1} rows to {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _config(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()] if args.values else harness.SWEEP_VALUES[args.param]
    out = Path(args.out_dir) / f"sweep_{args.param}_{args.mech}.csv"
    rows = harness.sweep(args.param, values, base, args.mech, args.epsilon, args.delta, args.rho, output=out)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    t0 = time.perf_counter()
    res = harness.sensitivity_probe(parse_distribution(args.dist), args.n, args.trials, args.seed, args.q,
                                    QuantizationScheme(args.digits))
    print(f"immediate_max_divergence {res.immediate_max}")
    print(f"persistent_max_divergence {res.persistent_max}")
    print(f"trials {res.trials} attained_2 {res.attained} seconds {time.perf_counter() - t0:.2f}")
    return EXIT_OK


def cmd_accuracy(args) -> int:
    rows = harness.accuracy_report(beta=args.beta, draws=args.draws, seed=args.seed)
    print(f"{'mechanism':<9} {'params':<34} {'alpha':>10} {'Pr[X>=a]':>10} {'Pr[|X|>=a]':>10}")
    for r in rows:
        print(f"{r.mechanism:<9} {r.params:<34} {r.alpha:>10.4f} {r.one_sided:>10.5f} {r.two_sided:>10.5f}")
    return EXIT_OK


def cmd_generate(args) -> int:
    stream = generate(parse_distribution(args.dist), args.n, args.seed, QuantizationScheme(args.digits))
    write_stream(stream, args.out)
    print(f"wrote {args.n} items to {args.out} (saturated {stream.saturation_count})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpfrugal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="repeated private quantile runs to CSV")
    _add_run_options(p)
    p.add_argument("--input", help="replay a newline-delimited stream file instead of generating")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="vary one parameter, others at defaults")
    _add_run_options(p)
    p.add_argument("--param", required=True, choices=sorted(harness.SWEEP_VALUES))
    p.add_argument("--values", help="comma-separated values (default: the standard grid)")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sensitivity", help="coupled-coin sensitivity probe")
    p.add_argument("--dist", default="d5")
    p.add_argument("--n", type=lambda s: int(float(s)), default=10_000)
    p.add_argument("--trials", type=lambda s: int(float(s)), default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--digits", type=int, default=0)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("accuracy", help="(alpha, beta) table with Monte-Carlo exceedance")
    p.add_argument("--beta", type=float, default=0.04)
    p.add_argument("--draws", type=lambda s: int(float(s)), default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_accuracy)

    p = sub.add_parser("generate", help="write a synthetic stream file")
    p.add_argument("--dist", default="d5")
    p.add_argument("--n", type=lambda s: int(float(s)), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--digits", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, TypeError) as exc:
        print(f"dpfrugal: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"dpfrugal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Command line: ``hdwhite test`` for data files, ``hdwhite simulate`` for experiments.

Exit codes: 0 test completed (whatever the decision), 2 usage or config
error, 3 data error, 4 method infeasible for the data dimensions.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import simlab
from .errors import ConfigError, InfeasibleMethodError, WhiteNoiseError
from .maxcorr import DEFAULT_ALPHA, DEFAULT_B, DEFAULT_K, TestResult
from .runner import run_test
from .tsdata import load_csv
from .tspca import TRANSFORMS

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4
TEST_METHODS = ("maxcorr", "q1", "q2", "q3", "lm", "tb", "tiao_box")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so main() owns the exit code."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdwhite", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="test a CSV panel (rows = time, columns = series)")
    t.add_argument("--input", required=True, type=Path)
    t.add_argument("--header", action="store_true", help="first CSV line is a header")
    t.add_argument("--lags", type=int, default=DEFAULT_K, metavar="K")
    t.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    t.add_argument("--draws", type=int, default=DEFAULT_B, metavar="B")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--method", choices=TEST_METHODS, default="maxcorr")
    t.add_argument("--tspca", action="store_true", help="pre-transform before the maxcorr test")
    t.add_argument("--k0", type=int, default=5, help="lag horizon of the spectral pre-transform")
    t.add_argument("--transform", choices=TRANSFORMS, default="whiten",
                   help="pre-transform construction used with --tspca")
    t.add_argument("--bandwidth", type=float, default=None,
                   help="fixed kernel bandwidth (default: Andrews plug-in)")
    t.add_argument("--no-center", action="store_true", help="data already have mean zero")
    t.add_argument("--output", type=Path)
    t.add_argument("--format", choices=("kv", "csv"), default="kv")

    s = sub.add_parser("simulate", help="run a Monte-Carlo size/power experiment")
    s.add_argument("--config", type=Path, help="key = value file; flags override it")
    s.add_argument("--model")
    s.add_argument("--noise")
    s.add_argument("--p", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--lags", help="comma-separated list of K")
    s.add_argument("--alpha", type=float)
    s.add_argument("--reps", type=int)
    s.add_argument("--draws", type=int, dest="B")
    s.add_argument("--seed", type=int, dest="master_seed")
    s.add_argument("--methods", help="comma-separated subset of maxcorr,maxcorr_tspca,q1,q2,q3,lm,tb")
    s.add_argument("--tspca", action="store_true", help="also run maxcorr on pre-transformed data")
    s.add_argument("--fix-loadings", action="store_true")
    s.add_argument("--k0", type=int)
    s.add_argument("--transform", choices=TRANSFORMS)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--output", type=Path)
    s.add_argument("--timing", action="store_true", help="fill the seconds column")
    s.add_argument("--quiet", action="store_true", help="no replication counter on stderr")
    return parser


def _emit(text: str, output: Path | None):
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def cmd_test(args) -> int:
    if not 0.0 < args.alpha < 1.0:
        raise _UsageError(f"--alpha must lie in (0, 1), got {args.alpha}")
    if args.lags < 1:
        raise _UsageError("--lags must be >= 1")
    if args.draws < math.ceil(1.0 / args.alpha):
        raise _UsageError(f"--draws must be at least ceil(1/alpha) = {math.ceil(1 / args.alpha)}")
    if args.tspca and args.method != "maxcorr":
        raise _UsageError("--tspca applies to --method maxcorr only")
    if args.bandwidth is not None and args.bandwidth < 0:
        raise _UsageError("--bandwidth must be >= 0")
    panel = load_csv(args.input, has_header=args.header)
    if args.lags > panel.n - 2:
        raise WhiteNoiseError(f"--lags {args.lags} too large for n={panel.n} time points")
    method = "maxcorr_tspca" if args.tspca else args.method
    options = {}
    if method.startswith("maxcorr"):
        options = {"bandwidth": args.bandwidth, "k0": args.k0, "transform": args.transform}
    result = run_test(panel, method, args.lags, args.alpha, args.draws, args.seed,
                      center=not args.no_center, **options)
    if args.format == "csv":
        text = TestResult.csv_header() + "\n" + result.to_csv_row() + "\n"
    else:
        text = result.to_kv()
    _emit(text, args.output)
    return EXIT_OK


def _sim_config(args) -> simlab.SimConfig:
    items = simlab.parse_config_text(args.config.read_text(encoding="utf-8")) if args.config else {}
    flags = {
        "model": args.model, "noise": args.noise, "p": args.p, "n": args.n,
        "K_list": args.lags, "alpha": args.alpha, "reps": args.reps, "B": args.B,
        "master_seed": args.master_seed, "methods": args.methods, "k0": args.k0,
        "transform": args.transform,
    }
    for key, value in flags.items():
        if value is not None:
            items[key] = value
    if args.tspca:
        items["pretransform"] = True
    if args.fix_loadings:
        items["fix_loadings"] = True
    return simlab.config_from_mapping(items)


def cmd_simulate(args) -> int:
    if args.jobs < 1:
        raise _UsageError("--jobs must be >= 1")
    config = _sim_config(args)
    progress = None if args.quiet else simlab.stderr_progress(config.reps)
    report = simlab.run_experiment(config, jobs=args.jobs, progress=progress)
    _emit(report.to_csv(timing=args.timing), args.output)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "test":
            return cmd_test(args)
        return cmd_simulate(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        key = f" (key {exc.key!r})" if exc.key else ""
        print(f"hdwhite: config error{key}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleMethodError as exc:
        print(f"hdwhite: method not applicable: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (WhiteNoiseError, OSError) as exc:
        print(f"hdwhite: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

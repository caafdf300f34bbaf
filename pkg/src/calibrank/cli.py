"""Command-line interface.

Subcommands cover each setting::

    calibrank canonical   two-item estimator vs sign/random baselines
    calibrank abtest      A/B baselines vs the pair-majority estimator
    calibrank rank        flip-scan ranking vs its ordinal opener
    calibrank metric-rank rearrange-then-flip vs its ordinal opener
    calibrank tradeoff    improvement sweep over the ratio-weight gamma
    calibrank oracle      exact success probabilities (no sampling)

Reports go to stdout or ``--out`` as CSV (``--format json`` for JSON, same
rows); ``--plot PATH`` additionally renders a figure.  ``--config PATH``
loads ``key = value`` defaults (see :mod:`calibrank.config` for the
schema); explicit flags always win.  Exit codes: 0 success, 2 usage or
configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import SETTINGS, load_config_file, resolve_config
from .harness import run_scenario

__all__ = ["build_parser", "main"]

_OVERRIDE_KEYS = (
    "scenario",
    "n",
    "m",
    "gamma",
    "weight",
    "noise",
    "value_lo",
    "value_hi",
    "estimators",
    "trials",
    "inner_samples",
    "seed",
    "threads",
    "init",
    "target",
    "x1",
    "x2",
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    run = common.add_argument_group("run options")
    run.add_argument("--config", metavar="PATH", help="config file with defaults")
    run.add_argument("--trials", type=int, help="Monte Carlo trials")
    run.add_argument("--seed", type=int, help="root seed (default 0)")
    run.add_argument("--weight", choices=("ratio", "logistic"))
    run.add_argument("--gamma", help="ratio-weight gamma, comma list to sweep")
    run.add_argument("--noise", help="none, gaussian:SIGMA or uniform:HALF_WIDTH")
    run.add_argument("--estimators", help="comma list restricting the roster")
    run.add_argument("--value-lo", type=float, dest="value_lo")
    run.add_argument("--value-hi", type=float, dest="value_hi")
    run.add_argument(
        "--threads", type=int, help="worker processes for trial loops (0 = all cores)"
    )
    out = common.add_argument_group("output options")
    out.add_argument("--out", metavar="PATH", help="write the report here (default stdout)")
    out.add_argument("--format", choices=("csv", "json"), default="csv")
    out.add_argument("--plot", metavar="PATH", help="also render a figure to this file")

    parser = argparse.ArgumentParser(
        prog="calibrank",
        description="Estimators that survive arbitrary reviewer miscalibration.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "canonical", parents=[common], help="two-item setting, two reviewers"
    )
    p.add_argument("--scenario", choices=("perfect", "one-biased"))

    p = sub.add_parser("abtest", parents=[common], help="A/B testing with m reviewers")
    p.add_argument(
        "--scenario",
        choices=("perfect", "one-biased", "incremental", "incremental-plus-biased"),
    )
    p.add_argument("--m", help="even reviewer count, comma list to sweep")

    for name, blurb in (
        ("rank", "ranking from pairwise comparisons"),
        ("metric-rank", "ranking under Kendall-tau / footrule loss"),
    ):
        p = sub.add_parser(name, parents=[common], help=blurb)
        p.add_argument("--n", help="item count, comma list to sweep")
        p.add_argument("--m", help="reviewer count (0 = half of all pairs)")
        p.add_argument("--inner-samples", type=int, dest="inner_samples")
        p.add_argument("--init", choices=("index-ties", "uniform-random"))

    p = sub.add_parser(
        "tradeoff", parents=[common], help="gamma sweep of the two-item improvement"
    )
    p.add_argument("--scenario", choices=("perfect", "one-biased", "both"))

    p = sub.add_parser("oracle", parents=[common], help="exact probabilities, no trials")
    p.add_argument("--target", choices=("canonical", "abtest"))
    p.add_argument(
        "--scenario",
        choices=("perfect", "one-biased", "incremental", "incremental-plus-biased"),
    )
    p.add_argument("--m", help="even reviewer count <= 8, comma list")
    p.add_argument("--x1", type=float)
    p.add_argument("--x2", type=float)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        file_values = load_config_file(args.config) if args.config else None
        overrides = {
            key: getattr(args, key)
            for key in _OVERRIDE_KEYS
            if getattr(args, key, None) is not None
        }
        cfg = resolve_config(args.command, file_values, overrides)
    except (ValueError, OSError) as exc:
        print(f"calibrank: error: {exc}", file=sys.stderr)
        return 2

    try:
        report = run_scenario(cfg)
        text = report.render(args.format)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.plot:
            from .figures import render_report

            render_report(report, args.plot)
    except Exception as exc:  # runtime failure, distinct from usage errors
        print(f"calibrank: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

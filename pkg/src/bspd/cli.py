"""Command line entry point."""

import argparse
import sys

from .errors import BspdError
from .harness import (ALL_SCHEMES, RUNNERS, emit_csv, emit_svg, load_config,
                      rows_to_csv)
from .validate import run_property_suite


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bspd",
        description="Wideband channel estimation experiments: split-pattern "
                    "detection against greedy-pursuit baselines.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("sweep-snr", "mean NMSE per scheme against SNR"),
            ("sweep-pilots", "mean NMSE per scheme against the pilot length"),
            ("sweep-bandwidth", "mean NMSE per scheme against the bandwidth"),
            ("direction-prob", "direction detection probability and its lower bound"),
            ("capture-ratio", "analytic window capture ratio per halfwidth"),
            ("validate", "run the deterministic property suite")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default=None, help="flat key-value config file")
        if name != "validate":
            p.add_argument("--seed", type=int, default=None, help="base seed (64-bit)")
            p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")
            p.add_argument("--out", default=None, help="output CSV path (stdout when omitted)")
            p.add_argument("--schemes", default=None,
                           help=f"comma list from {{{','.join(ALL_SCHEMES)}}}")
            p.add_argument("--threads", type=int, default=None, help="worker threads")
            p.add_argument("--svg", default=None, help="also write an SVG line chart")
    return parser


_COMMAND_TO_EXPERIMENT = {
    "sweep-snr": "snr-sweep",
    "sweep-pilots": "pilot-sweep",
    "sweep-bandwidth": "bandwidth-sweep",
    "direction-prob": "direction-prob",
    "capture-ratio": "capture-ratio",
}


def _run_experiment(args) -> int:
    import dataclasses

    spec = load_config(args.config, experiment=_COMMAND_TO_EXPERIMENT[args.command])
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.threads is not None:
        overrides["workers"] = args.threads
    if args.schemes is not None:
        overrides["schemes"] = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    rows = RUNNERS[spec.experiment](spec)
    if args.out is not None:
        emit_csv(rows, args.out)
    else:
        sys.stdout.write(rows_to_csv(rows))
    if args.svg is not None:
        emit_svg(rows, args.svg)
    return 0


def _run_validate() -> int:
    results = run_property_suite()
    failures = 0
    for name, passed, detail in results:
        tag = "PASS" if passed else "FAIL"
        print(f"{tag} {name} ({detail})")
        failures += 0 if passed else 1
    print(f"{len(results) - failures}/{len(results)} properties passed")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _run_validate()
        return _run_experiment(args)
    except BspdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

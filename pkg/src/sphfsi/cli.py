"""Command-line interface.

Subcommands:

    run         execute a benchmark case and write probes/snapshots/manifest
    verify      run a property suite (consistency | conservation | riemann |
                solid-patch)
    list-cases  print the built-in case names
    metrics     post-process a probe CSV into amplitude/frequency numbers

Exit codes: 0 success, 1 validation/usage error, 2 runtime abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sphfsi", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a benchmark case")
    run.add_argument("--case", required=True,
                     help="built-in case name or path to a JSON config")
    run.add_argument("--resolution", type=int, default=None,
                     help="structural thickness over solid particle spacing")
    run.add_argument("--correction", choices=("none", "rkgc"), default=None)
    run.add_argument("--wkgc-alpha", type=float, default=None)
    run.add_argument("--transport-velocity", choices=("on", "off", "auto"), default=None)
    run.add_argument("--end-time", type=float, default=None)
    run.add_argument("--fixed-dt", type=float, default=None)
    run.add_argument("--output", default=None, help="output directory")
    run.add_argument("--probe-interval", type=float, default=None)
    run.add_argument("--snapshot-interval", type=float, default=None)
    run.add_argument("--log-every", type=float, default=0.0,
                     help="progress log period in simulated seconds (0 = off)")

    verify = sub.add_parser("verify", help="run a property suite")
    verify.add_argument("--suite", required=True,
                        choices=("consistency", "conservation", "riemann", "solid-patch"))

    sub.add_parser("list-cases", help="print the built-in case names")

    metrics = sub.add_parser("metrics", help="amplitude/frequency of a probe CSV")
    metrics.add_argument("--input", required=True, help="probe CSV path")
    metrics.add_argument("--window", required=True,
                         help="time window 'start:end' in seconds")
    return parser


def _cmd_run(args) -> int:
    from sphfsi.cases import CaseConfigError, load_case_config, run_case

    try:
        cfg = load_case_config(args.case)
        for attr, key in (
            ("resolution", "resolution"),
            ("correction", "correction"),
            ("wkgc_alpha", "wkgc_alpha"),
            ("transport_velocity", "transport_velocity"),
            ("end_time", "end_time"),
            ("fixed_dt", "fixed_dt"),
            ("probe_interval", "probe_interval"),
            ("snapshot_interval", "snapshot_interval"),
        ):
            value = getattr(args, attr)
            if value is not None:
                setattr(cfg, key, value)
        cfg.validate()
    except CaseConfigError as exc:
        print(f"sphfsi: configuration error: {exc}", file=sys.stderr)
        return 1

    try:
        summary = run_case(cfg, output_dir=args.output, log_every=args.log_every)
    except Exception as exc:  # runtime aborts carry step context
        print(f"sphfsi: runtime abort: {exc}", file=sys.stderr)
        return 2
    print(
        f"{cfg.case}: t={cfg.end_time} done, "
        f"{summary['acoustic_steps']} acoustic steps in "
        f"{summary['wall_time_s']:.1f} s"
    )
    return 0


def _cmd_verify(args) -> int:
    from sphfsi.verify import run_suite

    try:
        passed, lines, _ = run_suite(args.suite)
    except Exception as exc:
        print(f"sphfsi: runtime abort: {exc}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    return 0 if passed else 1


def _cmd_metrics(args) -> int:
    from sphfsi.output import read_probe_csv
    from sphfsi.probes import InsufficientPeriodicityError, extract_oscillation_metrics

    try:
        lo, _, hi = args.window.partition(":")
        window = (float(lo), float(hi))
    except ValueError:
        print(f"sphfsi: bad --window {args.window!r}, expected 'start:end'",
              file=sys.stderr)
        return 1
    try:
        series = read_probe_csv(args.input)
    except (OSError, ValueError) as exc:
        print(f"sphfsi: cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    try:
        metrics = extract_oscillation_metrics(series, window)
    except InsufficientPeriodicityError as exc:
        print(f"sphfsi: {exc}", file=sys.stderr)
        return 1
    out = {
        "window": list(metrics.window),
        "amplitude": metrics.amplitude,
        "frequency": metrics.frequency,
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(asctime)s %(name)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "list-cases":
        from sphfsi.cases import BUILTIN_CASES

        for name in BUILTIN_CASES:
            print(name)
        return 0
    if args.command == "metrics":
        return _cmd_metrics(args)
    return 1


if __name__ == "__main__":
    sys.exit(main())

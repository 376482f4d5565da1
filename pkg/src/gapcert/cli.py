"""Command-line entry point.

One subcommand per task (`certify`, `limit-map`, `transversality`, `sdp`,
`holder`, `splitting`, `stability`), plus `reproduce-paper` for the
built-in worked examples and `report` to pretty-print a saved report.
Exit codes: 0 when every verdict is Certified/Pass, 1 when any task is
Refuted/Fail/Error, 2 on configuration problems.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import TASK_NAMES, load_config
from .errors import ConfigError
from .report import (
    Report,
    exit_code,
    format_report,
    load_report,
    reproduce_paper,
    run,
    write_report,
)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapcert",
        description="Certify singular-value gap domination for free-group "
        "representations and validate the induced boundary maps.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in TASK_NAMES:
        sub = subparsers.add_parser(
            name, help=f"run the {name} task from a configuration file"
        )
        _add_run_flags(sub, config_required=True)
        sub.set_defaults(handler=_make_task_handler(name))

    reproduce = subparsers.add_parser(
        "reproduce-paper",
        help="re-run the built-in worked examples and check their outcomes",
    )
    _add_output_flags(reproduce)
    reproduce.set_defaults(handler=_handle_reproduce)

    pretty = subparsers.add_parser(
        "report", help="pretty-print a previously saved report"
    )
    pretty.add_argument("path", help="path of a saved report JSON document")
    pretty.set_defaults(handler=_handle_pretty)

    return parser


def _add_run_flags(sub: argparse.ArgumentParser, config_required: bool) -> None:
    sub.add_argument(
        "--config", required=config_required, help="configuration JSON path"
    )
    sub.add_argument(
        "--seed", type=int, default=None, help="override the configured seed"
    )
    sub.add_argument(
        "--task",
        action="append",
        choices=TASK_NAMES,
        default=None,
        metavar="NAME",
        help="additional task to run after this subcommand's own "
        "(repeatable; order preserved)",
    )
    _add_output_flags(sub)


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default=None, help="write the report JSON here")
    sub.add_argument(
        "--quiet", action="store_true", help="suppress the summary on stdout"
    )


def _make_task_handler(task: str):
    def handler(args: argparse.Namespace) -> int:
        config = load_config(args.config)
        tasks = [task]
        for extra in args.task or ():
            if extra not in tasks:
                tasks.append(extra)
        config = config.with_overrides(seed=args.seed, tasks=tuple(tasks))
        report = run(config)
        _emit(report, args)
        return exit_code(report)

    return handler


def _handle_reproduce(args: argparse.Namespace) -> int:
    report = reproduce_paper()
    _emit(report, args)
    return exit_code(report)


def _handle_pretty(args: argparse.Namespace) -> int:
    print(format_report(load_report(args.path)))
    return 0


def _emit(report: Report, args: argparse.Namespace) -> None:
    if args.out:
        write_report(report, args.out)
    if not args.quiet:
        print(format_report(report.payload()))


if __name__ == "__main__":
    sys.exit(main())

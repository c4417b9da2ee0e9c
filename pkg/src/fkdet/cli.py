"""Command-line front end.

Subcommands:
  run <scenario>       execute the scenario's task, emit the full report
  check <scenario>     hypothesis checks only (no determinant numerics)
  sweep <scenario>     run the sweep task, optionally overriding the N list
  selftest             run the built-in invariant suite
  examples             list shipped scenarios or copy them out

Scenario arguments take a file path or ``example:<name>`` for a shipped
scenario.  Exit codes: 0 success, 1 usage/parse error, 2 numerical failure,
3 resource cap exceeded.  Hypothesis failures are findings inside the
report, not process failures.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .errors import (
    ConsistencyError,
    EigenConvergenceError,
    FkdetError,
    ScenarioError,
    TermCapExceededError,
)
from .report import emit
from .runner import RunReport, run_checks_only, run_scenario
from .scenarios import ScenarioConfig, parse_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_RESOURCE = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"fkdet: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _example_names() -> list[str]:
    root = resources.files("fkdet") / "examples"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def _load_scenario(ref: str) -> ScenarioConfig:
    if ref.startswith("example:"):
        name = ref[len("example:"):]
        res = resources.files("fkdet") / "examples" / f"{name}.json"
        if not res.is_file():
            raise ScenarioError(
                f"unknown shipped example {name!r}; available: {', '.join(_example_names())}")
        return parse_scenario(res.read_text(encoding="utf-8"))
    path = Path(ref)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {ref}")
    return parse_scenario(path.read_text(encoding="utf-8"))


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dump_matrix(config: ScenarioConfig, path: str) -> None:
    """Plain-text dump: column-major 're im' pairs, row index fastest."""
    from .operators import assemble
    from .scenarios import instantiate

    expr = instantiate(config, config.n[0])
    mat = assemble(expr).mat
    n = mat.shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        for col in range(n):
            for row in range(n):
                v = mat[row, col]
                fh.write(f"{format(v.real, '.17g')} {format(v.imag, '.17g')}\n")


def _emit_report(report: RunReport, args) -> None:
    _write_output(emit(report, args.format, include_timing=args.timing), args.out)
    if getattr(args, "plot", None):
        from .plots import plot_report

        plot_report(report, args.plot)


def _add_io_flags(sub) -> None:
    sub.add_argument("--out", default=None, help="output path (default: stdout)")
    sub.add_argument("--format", choices=("json", "csv", "text"), default="json")
    sub.add_argument("--timing", action="store_true",
                     help="include wall-clock timing in the report "
                          "(off by default so identical runs are byte-identical)")
    sub.add_argument("--plot", default=None, metavar="PNG",
                     help="also render the task's figure to this file")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads for sweep fan-out (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fkdet", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario's task")
    p_run.add_argument("scenario", help="path or example:<name>")
    p_run.add_argument("--dump-matrix", default=None, metavar="PATH",
                       help="write the assembled matrix as 're im' lines, "
                            "column-major with row index fastest")
    _add_io_flags(p_run)

    p_check = sub.add_parser("check", help="hypothesis checks only")
    p_check.add_argument("scenario", help="path or example:<name>")
    _add_io_flags(p_check)

    p_sweep = sub.add_parser("sweep", help="run a sweep, optionally overriding N values")
    p_sweep.add_argument("scenario", help="path or example:<name>")
    p_sweep.add_argument("--values", type=int, nargs="+", default=None,
                         help="override the task's N list")
    _add_io_flags(p_sweep)

    p_self = sub.add_parser("selftest", help="run the built-in invariant suite")
    p_self.add_argument("--quiet", action="store_true")

    p_ex = sub.add_parser("examples", help="list or export shipped scenarios")
    p_ex.add_argument("--copy-to", default=None, metavar="DIR",
                      help="copy the shipped scenario files into DIR")
    return parser


def _dispatch(args) -> int:
    if args.command == "selftest":
        from .selftest import run_selftest

        failures = run_selftest(verbose=not args.quiet)
        return EXIT_OK if failures == 0 else EXIT_NUMERICAL

    if args.command == "examples":
        names = _example_names()
        if args.copy_to:
            target = Path(args.copy_to)
            target.mkdir(parents=True, exist_ok=True)
            for name in names:
                res = resources.files("fkdet") / "examples" / f"{name}.json"
                (target / f"{name}.json").write_text(
                    res.read_text(encoding="utf-8"), encoding="utf-8")
            print(f"copied {len(names)} scenarios to {target}")
        else:
            for name in names:
                print(name)
        return EXIT_OK

    config = _load_scenario(args.scenario)
    if args.command == "run":
        if args.dump_matrix:
            _dump_matrix(config, args.dump_matrix)
        report = run_scenario(config, threads=args.threads)
    elif args.command == "check":
        report = run_checks_only(config)
    else:  # sweep
        if config.task.kind != "sweep":
            raise ScenarioError(
                f"scenario task is {config.task.kind!r}; `sweep` needs a sweep task")
        ns = tuple(args.values) if args.values else None
        report = run_scenario(config, ns_override=ns, threads=args.threads)
    _emit_report(report, args)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _dispatch(args)
    except ScenarioError as exc:
        print(f"fkdet: scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EigenConvergenceError, ConsistencyError) as exc:
        print(f"fkdet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TermCapExceededError as exc:
        print(f"fkdet: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except FkdetError as exc:
        print(f"fkdet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fkdet: i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

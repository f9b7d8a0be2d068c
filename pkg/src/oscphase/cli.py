"""Command-line front end.

    oscphase phase sho --C 2 --beta 0 --n 0
    oscphase phase driven --force-spec drive.json --C 1.5
    oscphase phase mathieu --a 2 --eps 0.01 --method both
    oscphase verify [all|sho|driven|wavefunction|mathieu]
    oscphase sweep mathieu --param eps --from 0.005 --to 0.04 --steps 4 --spacing log --format csv

Exit codes: 0 success (an undefined phase is a successful result), 2 configuration
error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from .errors import ConfigError
from .run import METHODS, MODES, SWEEPABLE, RecordWriter, RunConfig, load_spectrum, run, sweep, sweep_values
from .verify import SUITES, verify

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 2, 3

_FLOAT_FLAGS = ("C", "beta", "D", "phi", "M", "w", "hbar", "a", "eps")


def _complex_list(text: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(part.strip().replace(" ", "")) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers like 0.6,0.8j: {exc}") from exc


def _add_run_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("physics (radians, defaults M = w = hbar = 1)")
    for name in _FLOAT_FLAGS:
        g.add_argument(f"--{name}", type=float, default=None)
    g.add_argument("--n", type=int, default=None, help="quantum number")
    g.add_argument("--half-period", action="store_true", default=None, help="evolve over tau0/2 (sho, D = 0)")
    g.add_argument("--force-spec", metavar="PATH", help="force spectrum JSON file")
    g.add_argument("--spectrum", metavar="JSON", help="inline force spectrum JSON")
    g.add_argument("--B", type=_complex_list, default=None, metavar="B0,B1,...",
                   help="superposition coefficients (sho)")
    g.add_argument("--method", choices=METHODS, default=None)
    _add_output_flags(p)
    p.add_argument("--config", metavar="PATH", help="JSON run configuration; flags override it")


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH", help="write results here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscphase", description="Geometric phases of oscillator eigenstates.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_phase = sub.add_parser("phase", help="compute phases for one configuration")
    p_phase.add_argument("mode", choices=MODES)
    _add_run_flags(p_phase)

    p_verify = sub.add_parser("verify", help="run the verification suites")
    p_verify.add_argument("suite", nargs="?", default="all", choices=("all",) + SUITES)
    p_verify.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p_verify.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")

    p_sweep = sub.add_parser("sweep", help="scan one parameter, one record per grid point")
    p_sweep.add_argument("mode", choices=MODES)
    p_sweep.add_argument("--param", required=True, choices=SWEEPABLE)
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--spacing", choices=("linear", "log"), default="linear")
    _add_run_flags(p_sweep)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    base_dir = None
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        base_dir = path.parent
        if data.get("mode", args.mode) != args.mode:
            raise ConfigError(f"config mode {data['mode']!r} conflicts with command mode {args.mode!r}")
    data["mode"] = args.mode
    for name in _FLOAT_FLAGS + ("n", "half_period", "method", "B"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if args.force_spec and args.spectrum:
        raise ConfigError("give either --force-spec or --spectrum, not both")
    if args.force_spec:
        data.pop("spectrum", None)
        data["force_spec"] = args.force_spec
    elif args.spectrum:
        data.pop("force_spec", None)
        data["spectrum"] = load_spectrum(args.spectrum)
    return RunConfig.from_dict(data, base_dir)


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
        return
    try:
        handle = open(path, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    with handle:
        yield handle


def _cmd_phase(args) -> int:
    config = config_from_args(args)
    records = run(config)
    with _output(args.out) as stream:
        writer = RecordWriter(stream, args.format)
        for record in records:
            writer.write(record)
        writer.close()
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = config_from_args(args)
    values = sweep_values(args.start, args.stop, args.steps, args.spacing)
    with _output(args.out) as stream:
        writer = RecordWriter(stream, args.format)
        try:
            for record in sweep(config, args.param, values):
                writer.write(record)
        finally:
            writer.close()
    return EXIT_OK


def _cmd_verify(args) -> int:
    results = verify(args.suite)
    failed = [c for _, c in results if not c.passed]
    with _output(args.out) as stream:
        if args.format == "json":
            rows = [{"suite": s, "name": c.name, "passed": c.passed, "measured": c.measured,
                     "tolerance": c.tolerance, "detail": c.detail} for s, c in results]
            stream.write(json.dumps(rows, indent=1, sort_keys=True) + "\n")
        elif args.format == "csv":
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(("suite", "name", "passed", "measured", "tolerance", "detail"))
            for s, c in results:
                writer.writerow((s, c.name, c.passed, repr(c.measured), repr(c.tolerance), c.detail))
        else:
            for s, c in results:
                stream.write(f"[{s}] {c.line()}\n")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"phase": _cmd_phase, "sweep": _cmd_sweep, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"oscphase: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point.

::

    oposim classical --topology tropo --order 3 --sigma-max 20 -o eta.csv
    oposim noise --config run.json --propagator-mode literal_exponential -o noise.csv
    oposim freq --sigma 2 --omega-max 4 -o spectrum.csv
    oposim plot noise.csv --x sigma --y var_q_s0 var_p_s0 -o pump.svg

Exit status: 0 on success, 2 for configuration errors, 3 when ``--strict``
is set and at least one point failed (the table is still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .errors import ConfigError, OPOError
from .plotting import emit_plot
from .sweeps import (SweepConfig, load_config_dict, run_classical_sweep, run_frequency_sweep,
                     run_noise_sweep, write_csv, write_manifest)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

_RUNNERS = {
    "classical": run_classical_sweep,
    "noise": run_noise_sweep,
    "freq": run_frequency_sweep,
}

_BOOL = {"carrier_frame", "below_threshold", "strict"}
_TYPES = {"topology": str, "propagator_mode": str, "cavity_model": str, "order": int,
          "sigma_points": int, "omega_points": int, "samples": int, "workers": int}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with run parameters")
    p.add_argument("-o", "--output", required=True, help="CSV output path")
    for f in fields(SweepConfig):
        if f.name in _BOOL:
            p.add_argument(_flag(f.name), dest=f.name, default=None,
                           action=argparse.BooleanOptionalAction)
            continue
        kind = _TYPES.get(f.name, float)
        p.add_argument(_flag(f.name), dest=f.name, type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oposim", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("classical", "classical operating points vs pump"),
                        ("noise", "output noise and entanglement vs pump"),
                        ("freq", "difference-mode spectrum at fixed pump")):
        _add_config_flags(sub.add_parser(name, help=help_))
    pp = sub.add_parser("plot", help="SVG figure from a sweep CSV")
    pp.add_argument("table")
    pp.add_argument("--x", default="sigma")
    pp.add_argument("--y", nargs="+", required=True)
    pp.add_argument("-o", "--output", required=True)
    pp.add_argument("--title")
    pp.add_argument("--logy", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    """File values first, explicit flags on top."""
    merged = load_config_dict(args.config) if args.config else {}
    for f in fields(SweepConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            merged[f.name] = v
    return SweepConfig.from_dict(merged)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot":
            emit_plot(args.table, args.x, args.y, args.output, args.title, args.logy)
            return EXIT_OK
        cfg = config_from_args(args)
        result = _RUNNERS[args.command](cfg)
        write_csv(result, args.output)
        write_manifest(result, args.output)
    except ConfigError as exc:
        print(f"oposim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OPOError as exc:
        print(f"oposim: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if result.flagged:
        print(f"oposim: {len(result.flagged)} point(s) failed", file=sys.stderr)
        if cfg.strict:
            return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

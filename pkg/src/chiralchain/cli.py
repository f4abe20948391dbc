"""Command line entry point.

Exit status is 0 on success. On failure a single line
``chiralchain: error: <Kind>: <message>`` goes to stderr and the status is
2 for configuration/usage problems and 1 for everything else.

The worker count for ensembles comes from ``CHIRALCHAIN_WORKERS`` (default:
the number of available CPUs).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from ._backend import BACKEND
from .config import ConfigError, RunConfig, parse_angle, parse_config
from .experiments import PRESETS, run_disorder, run_experiment, run_simulate, run_spectrum, run_sweep


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, config_required: bool) -> None:
    p.add_argument("--config", required=config_required, help="JSON run configuration")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
    p.add_argument("--dt", type=_positive, help="time step in units of 1/gamma")
    p.add_argument("--t-end", type=_positive, dest="t_end", help="horizon in units of 1/gamma")
    p.add_argument("--svg", action="store_true", help="also write SVG line plots")
    p.add_argument("--eps-slope", type=_positive, dest="eps_slope", help="plateau slope threshold")
    p.add_argument("--min-width", type=float, dest="min_width", help="minimum plateau width")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralchain",
        description="Single-photon subradiance in a chirally coupled atomic chain.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("simulate", help="evolve one configuration"), True)

    p = sub.add_parser("sweep", help="gamma_f versus N and Ni")
    _common(p, True)
    p.add_argument("--n-max", type=int, default=20, help="largest chain length (default 20)")
    p.add_argument("--ni", type=_int_list, default=(1, 2, 3), help="excited-atom counts, e.g. 1,2,3")

    _common(sub.add_parser("disorder", help="ensemble over position fluctuations"), True)
    _common(sub.add_parser("spectrum", help="eigenvalues and defectiveness of V"), True)

    p = sub.add_parser("reproduce", help="regenerate the data behind one figure")
    p.add_argument("preset", choices=PRESETS)
    _common(p, False)
    p.add_argument("--xi", help="override the lattice phase (number or pi literal)")
    return parser


def _overrides(args) -> dict:
    out = {"seed": args.seed, "dt": args.dt, "t_end": args.t_end,
           "eps_slope": args.eps_slope, "min_width": args.min_width}
    if getattr(args, "xi", None) is not None:
        out["xi"] = parse_angle(args.xi)
    return {k: v for k, v in out.items() if v is not None}


def _resolve(args) -> RunConfig:
    cfg = parse_config(args.config)
    try:
        return cfg.with_overrides(**_overrides(args))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("<override>", str(exc)) from None


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.command == "simulate":
        run_simulate(_resolve(args), args.out, svg=args.svg)
    elif args.command == "sweep":
        run_sweep(_resolve(args), args.out, n_max=args.n_max, ni_values=args.ni, svg=args.svg)
    elif args.command == "disorder":
        run_disorder(_resolve(args), args.out, svg=args.svg)
    elif args.command == "spectrum":
        run_spectrum(_resolve(args), args.out)
    else:
        config = parse_config(args.config) if args.config else None
        run_experiment(args.preset, args.out, _overrides(args), config=config, svg=args.svg)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"chiralchain: error: ConfigError: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("chiralchain: error: Interrupted: stopped by user", file=sys.stderr)
        return 130
    except Exception as exc:  # one machine-parsable line, no traceback
        msg = " ".join(str(exc).split())
        print(f"chiralchain: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

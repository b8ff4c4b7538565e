"""Command-line surface.

Subcommands: coeffs, gain, evolve, correlations, sweep.  Exit codes:
0 success, 2 validation error (bad config or arguments), 3 numerical
degeneracy (degenerate coupling, truncation leakage abort, unstable drift).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import default_config_path, parse_config
from .errors import NumericalDegeneracy, ValidationError
from .runner import (RunContext, run_coeffs, run_correlations, run_evolve,
                     run_gain, run_sweep)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERACY = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpamp",
        description="Two-oscillator nMOS quantum parametric amplifier simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        default=str(default_config_path()),
                        help="JSON configuration (default: shipped default.json)")
    common.add_argument("--out", metavar="DIR", default="out",
                        help="output directory (default: ./out)")
    common.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="concurrency level for sweep rows (default 1; "
                             "results are identical at any level)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("coeffs", parents=[common],
                   help="derive and emit the full coefficient report")

    p_gain = sub.add_parser("gain", parents=[common],
                            help="gain spectra, peak list and g_m surface")
    p_gain.add_argument("--points", type=int, metavar="N",
                        help="override the frequency grid point count")

    p_evolve = sub.add_parser("evolve", parents=[common],
                              help="time evolution by both dynamics routes")
    p_evolve.add_argument("--truncation", type=int, metavar="N",
                          help="override the number-basis cutoff per mode")

    p_corr = sub.add_parser("correlations", parents=[common],
                            help="steady-state correlation report")
    p_corr.add_argument("--mode", choices=["paper", "standard"],
                        help="entropy-formula mode (paper maps to the "
                             "literal printed-formula variant)")

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="g_m sweep: gain surface and correlations")
    p_sweep.add_argument("--gm-min", type=float, metavar="S",
                         help="lowest transconductance in siemens")
    p_sweep.add_argument("--gm-max", type=float, metavar="S",
                         help="highest transconductance in siemens")
    p_sweep.add_argument("--gm-points", type=int, metavar="N",
                         help="number of transconductance rows")
    p_sweep.add_argument("--mode", choices=["paper", "standard"],
                         help="entropy-formula mode for the reports")
    return parser


def _mode_value(arg: str | None) -> str | None:
    if arg is None:
        return None
    return "literal" if arg == "paper" else "standard"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        overrides = {}
        if getattr(args, "points", None):
            overrides["points"] = args.points
        if getattr(args, "truncation", None):
            overrides["truncation"] = args.truncation
        if getattr(args, "mode", None):
            overrides["mode"] = args.mode
        sweep_over = {}
        if getattr(args, "gm_min", None) is not None:
            sweep_over["gm_min_siemens"] = args.gm_min
        if getattr(args, "gm_max", None) is not None:
            sweep_over["gm_max_siemens"] = args.gm_max
        if getattr(args, "gm_points", None) is not None:
            sweep_over["gm_points"] = args.gm_points
        if sweep_over:
            overrides.update(sweep_over)
            cfg = replace(cfg, sweep=replace(cfg.sweep, **sweep_over))
        if args.jobs != 1:
            overrides["jobs"] = args.jobs

        ctx = RunContext(cfg, args.out, cli_overrides=overrides)
        ctx.write_resolved_config()

        if args.command == "coeffs":
            run_coeffs(cfg, ctx)
        elif args.command == "gain":
            run_gain(cfg, ctx, points=args.points, jobs=args.jobs)
        elif args.command == "evolve":
            run_evolve(cfg, ctx, truncation=args.truncation)
        elif args.command == "correlations":
            run_correlations(cfg, ctx, mode=_mode_value(args.mode))
        elif args.command == "sweep":
            run_sweep(cfg, ctx, jobs=args.jobs, mode=_mode_value(args.mode))

        manifest = ctx.finalize()
        print(f"wrote {len(ctx.files)} file(s) to {ctx.out} "
              f"(manifest: {manifest.name})")
        if "fock_aborted" in ctx.notes:
            print("number-basis route aborted: "
                  + ctx.notes["fock_aborted"]["reason"], file=sys.stderr)
            print(ctx.notes["fock_aborted"]["advice"], file=sys.stderr)
            return EXIT_DEGENERACY
        return EXIT_OK
    except ValidationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalDegeneracy as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERACY


if __name__ == "__main__":
    sys.exit(main())

"""
Command-line entry point.

    coopnet-energy sweep --config grid.cfg --out results.csv
    coopnet-energy validate --config grid.cfg --trials 1000000 --seed 42
    coopnet-energy point --scheme af_mrc --b 8 --d-sd 60

Exit codes: 0 success, 1 usage or config error, 2 validation failure,
3 numerical failure.
"""

import argparse
import sys
from dataclasses import replace
from typing import List, Optional

from coopnet_energy import __version__, logger as log
from coopnet_energy.exceptions import CoopnetError, NumericalError
from coopnet_energy.params import Geometry
from coopnet_energy.utils.link_model import SUPPORTED_BITS, Modulation
from coopnet_energy.utils.monte_carlo import McConfig, simulate_scheme
from coopnet_energy.utils.schemes import SchemeKind, evaluate_scheme, optimal_constellation
from coopnet_energy.utils.sweep import (
    DEFAULT_MC_TRIALS,
    SweepSpec,
    parse_config,
    parse_config_text,
    run_sweep,
    validate,
    write_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION_FAILED = 2
EXIT_NUMERICAL = 3

logger = log.get_logger(__name__)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="coopnet-energy",
        description="Bit energy of direct, AF and DF transmission over a one-relay Rayleigh network",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file (defaults to the built-in grid)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--seed", type=int, help="Monte Carlo master seed")
    common.add_argument("--schemes", help="Comma-separated schemes, e.g. af,af_mrc")
    common.add_argument("--workers", type=int, help="Worker processes")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Evaluate a grid and write CSV")
    sweep_parser.add_argument("--out", default="results.csv", help="CSV output path")

    validate_parser = subparsers.add_parser(
        "validate", parents=[common], help="Compare analytic and Monte Carlo values over a grid"
    )
    validate_parser.add_argument("--out", help="Also write the compared rows as CSV")

    point_parser = subparsers.add_parser("point", parents=[common], help="Evaluate a single operating point")
    point_parser.add_argument("--scheme", default="af_mrc", help="Scheme name")
    point_parser.add_argument("--b", type=int, default=None, choices=SUPPORTED_BITS,
                              help="Bits per symbol (default: the energy-optimal b)")
    point_parser.add_argument("--d-sd", type=float, required=True, help="Source-destination distance (m)")
    point_parser.add_argument("--relay-frac", type=float, default=0.5, help="Relay position as a fraction of d_sd")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    log.configure(verbose=args.verbose)

    try:
        spec = _load_spec(args)
        if args.command == "sweep":
            return _run_sweep(spec, args)
        if args.command == "validate":
            return _run_validate(spec, args)
        return _run_point(spec, args)
    except NumericalError as e:
        log.log_error(str(e), "Numerical Failure", __name__)
        return EXIT_NUMERICAL
    except (CoopnetError, OSError) as e:
        log.log_error(str(e), "Usage Error", __name__)
        return EXIT_USAGE


# ============== COMMANDS ==============

def _run_sweep(spec: SweepSpec, args) -> int:
    rows = run_sweep(spec)
    write_csv(rows, args.out, include_mc=spec.mc is not None)
    logger.info("Wrote %s rows to %s", len(rows), args.out)
    return EXIT_OK


def _run_validate(spec: SweepSpec, args) -> int:
    if spec.mc is None:
        spec = replace(spec, mc=McConfig(trials=DEFAULT_MC_TRIALS, seed=args.seed or 0))

    report = validate(spec)
    print(report.summary())

    if args.out:
        write_csv(report.rows, args.out, include_mc=True)
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


def _run_point(spec: SweepSpec, args) -> int:
    kind = SchemeKind.parse(args.scheme)
    geom = Geometry(args.d_sd, args.relay_frac)
    settings = spec.settings

    if args.b is None:
        _, result = optimal_constellation(spec.params, geom, kind, outage_model=settings.mrc_outage_model)
    else:
        result = evaluate_scheme(
            spec.params, geom, Modulation(args.b), kind, settings.mrc_outage_model, settings.quad_tol
        )

    lines = [
        f"scheme       {result.kind.value}",
        f"b            {result.b}",
        f"d_sd         {geom.d_sd:g} m",
        f"relay_frac   {geom.relay_frac:g}",
        f"gamma_th     {result.gamma_th:.6g}",
        f"alpha        {result.alpha:.6g}",
        f"t_on         {result.t_on:.6g} s",
        f"p_success    {result.p_success:.10g}",
        f"p_avg        {result.p_avg:.6g} W",
        f"e_bit        {result.e_bit:.6g} J/bit",
        f"e_direct     {result.e_direct:.6g} J/bit",
        f"gain         {result.gain:.6g}",
    ]

    if spec.mc is not None:
        estimate = simulate_scheme(spec.params, geom, Modulation(result.b), kind, spec.mc, settings)
        lines += [
            f"mc_p_success {estimate.p_success_hat:.10g} +/- {estimate.p_success_se:.3g}",
            f"mc_e_bit     {estimate.e_bit_hat:.6g} +/- {estimate.e_bit_se:.3g} J/bit",
            f"mc_trials    {estimate.trials}",
        ]

    print("\n".join(lines))
    return EXIT_OK


# ============== INTERNAL FUNCTIONS ==============

def _load_spec(args) -> SweepSpec:
    """Internal: Config file (or built-in defaults) with command-line overrides applied."""
    spec = parse_config(args.config) if args.config else parse_config_text("")

    if args.schemes:
        spec = replace(spec, schemes=tuple(s for s in args.schemes.split(",") if s.strip()))
    if args.workers is not None:
        spec = replace(spec, settings=spec.settings.replace(workers=args.workers))
    if args.trials is not None:
        mc = replace(spec.mc, trials=args.trials) if spec.mc else McConfig(trials=args.trials)
        spec = replace(spec, mc=mc)
    if args.seed is not None:
        if spec.mc is not None:
            spec = replace(spec, mc=replace(spec.mc, seed=args.seed))
        elif args.command != "validate":
            # validate always simulates and picks the seed up itself
            logger.warning("--seed %s ignored: nothing is simulated without --trials or mc.trials", args.seed)
    return spec


if __name__ == "__main__":
    sys.exit(main())

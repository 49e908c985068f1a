"""Dict-returning endpoints for point evaluations, sweeps and validation runs."""

from dataclasses import asdict, replace
from typing import Any, Dict, Optional

from coopnet_energy.exceptions import CoopnetError
from coopnet_energy.logger import log_error


def get_parameter_defaults():
    """
    Get the default network parameters and run settings.

    Returns:
        dict: {success, params, settings}
    """
    from coopnet_energy.params import get_default_params, get_run_settings

    return {
        "success": True,
        "params": get_default_params().as_dict(),
        "settings": get_run_settings().as_dict(),
    }


def get_point_summary(
    scheme: str,
    b: int,
    d_sd: float,
    relay_frac: float = 0.5,
    params: Optional[Dict[str, Any]] = None,
    outage_model: Optional[str] = None,
):
    """
    Evaluate one scheme at one operating point.

    Args:
        scheme: Scheme name (direct, af, af_mrc, df, df_mrc)
        b: Bits per symbol
        d_sd: Source-destination distance (m)
        relay_frac: Relay position as a fraction of d_sd
        params: Network parameter overrides
        outage_model: MRC outage model override ("joint" or "product")

    Returns:
        dict: {success, result, optimal_b} or {success, message}; optimal_b is the
        energy-minimising b for the scheme at this geometry
    """
    from coopnet_energy.params import Geometry, NetworkParams, get_run_settings
    from coopnet_energy.utils.link_model import Modulation
    from coopnet_energy.utils.schemes import evaluate_scheme, optimal_constellation

    try:
        network = NetworkParams.from_dict(params)
        settings = get_run_settings({"mrc_outage_model": outage_model} if outage_model else None)
        geom = Geometry(float(d_sd), float(relay_frac))
        result = evaluate_scheme(
            network, geom, Modulation(b), scheme, settings.mrc_outage_model, settings.quad_tol
        )
        best_b, _ = optimal_constellation(network, geom, result.kind, outage_model=settings.mrc_outage_model)
    except CoopnetError as e:
        return {
            "success": False,
            "message": str(e),
        }

    summary = asdict(result)
    summary["kind"] = result.kind.value
    return {
        "success": True,
        "result": summary,
        "optimal_b": best_b,
    }


def run_sweep_to_csv(
    config_path: str,
    out_path: str,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
):
    """
    Run the sweep described by a config file and write it as CSV.

    Args:
        config_path: Sweep config file
        out_path: CSV destination
        trials: Monte Carlo trial override (enables simulation)
        seed: Monte Carlo seed override

    Returns:
        dict: {success, message, rows, flagged}
    """
    from coopnet_energy.utils.sweep import parse_config, run_sweep, write_csv

    try:
        spec = _with_mc_overrides(parse_config(config_path), trials, seed)
        rows = run_sweep(spec)
        write_csv(rows, out_path, include_mc=spec.mc is not None)
    except (CoopnetError, OSError) as e:
        log_error(f"Sweep from {config_path} failed: {e}", "Sweep Error", __name__)
        return {
            "success": False,
            "message": str(e),
            "rows": 0,
            "flagged": 0,
        }

    flagged = sum(1 for row in rows if row.error)
    return {
        "success": True,
        "message": f"Wrote {len(rows)} rows to {out_path}",
        "rows": len(rows),
        "flagged": flagged,
    }


def validate_sweep(
    config_path: str,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
):
    """
    Compare analytic and simulated values over a config's grid.

    Returns:
        dict: {success, message, report}; success is the validation verdict
    """
    from coopnet_energy.utils.sweep import DEFAULT_MC_TRIALS, parse_config, validate

    try:
        spec = parse_config(config_path)
        if spec.mc is None and trials is None:
            trials = DEFAULT_MC_TRIALS
        report = validate(_with_mc_overrides(spec, trials, seed))
    except (CoopnetError, OSError) as e:
        log_error(f"Validation of {config_path} failed: {e}", "Validation Error", __name__)
        return {
            "success": False,
            "message": str(e),
            "report": None,
        }

    return {
        "success": report.passed,
        "message": report.summary(),
        "report": report.as_dict(),
    }


# ============== INTERNAL FUNCTIONS ==============

def _with_mc_overrides(spec, trials: Optional[int], seed: Optional[int]):
    """Internal: Apply --trials / --seed style overrides to a SweepSpec."""
    from coopnet_energy.utils.monte_carlo import McConfig

    if trials is not None:
        mc = replace(spec.mc, trials=trials) if spec.mc else McConfig(trials=trials)
        spec = replace(spec, mc=mc)
    if seed is not None and spec.mc is not None:
        spec = replace(spec, mc=replace(spec.mc, seed=seed))
    return spec

"""Computational modules for coopnet_energy."""

from coopnet_energy.utils.numerics import (
    q_function,
    bessel_k1,
    bessel_k1_scaled,
    one_minus_x_k1,
    find_root_monotone,
    integrate_adaptive,
)

from coopnet_energy.utils.link_model import (
    Modulation,
    LinkBudget,
    ber_mqam,
    snr_per_bit_for_ber,
    snr_threshold,
    amplifier_overhead,
    transmission_time,
    link_budget,
    mean_link_snr,
    cdf_exponential_link,
    cdf_af_relayed,
    cdf_af_mrc_combined,
    tail_df_mrc_combined,
)

from coopnet_energy.utils.schemes import (
    SchemeKind,
    SchemeResult,
    evaluate_direct,
    evaluate_af,
    evaluate_df,
    evaluate_scheme,
    single_transmission_energy,
    state_probabilities,
    optimal_constellation,
    optimal_relay_position,
    gain_crossover_distance,
)

from coopnet_energy.utils.monte_carlo import (
    McConfig,
    McEstimate,
    sample_channel_gains,
    effective_af_snr,
    play_round,
    simulate_scheme,
)

from coopnet_energy.utils.sweep import (
    SweepSpec,
    OutputRow,
    ValidationReport,
    parse_config,
    run_sweep,
    write_csv,
    validate,
)

__all__ = [
    # Numerics
    "q_function",
    "bessel_k1",
    "bessel_k1_scaled",
    "one_minus_x_k1",
    "find_root_monotone",
    "integrate_adaptive",
    # Link model
    "Modulation",
    "LinkBudget",
    "ber_mqam",
    "snr_per_bit_for_ber",
    "snr_threshold",
    "amplifier_overhead",
    "transmission_time",
    "link_budget",
    "mean_link_snr",
    "cdf_exponential_link",
    "cdf_af_relayed",
    "cdf_af_mrc_combined",
    "tail_df_mrc_combined",
    # Schemes
    "SchemeKind",
    "SchemeResult",
    "evaluate_direct",
    "evaluate_af",
    "evaluate_df",
    "evaluate_scheme",
    "single_transmission_energy",
    "state_probabilities",
    "optimal_constellation",
    "optimal_relay_position",
    "gain_crossover_distance",
    # Monte Carlo
    "McConfig",
    "McEstimate",
    "sample_channel_gains",
    "effective_af_snr",
    "play_round",
    "simulate_scheme",
    # Sweeps
    "SweepSpec",
    "OutputRow",
    "ValidationReport",
    "parse_config",
    "run_sweep",
    "write_csv",
    "validate",
]

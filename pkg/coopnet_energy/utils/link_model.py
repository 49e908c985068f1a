"""MQAM link budget and outage distributions of the S-D, S-R and R-D links."""

import math
from dataclasses import dataclass

import numpy as np

from coopnet_energy.exceptions import InfeasibleTargetError, ValidationError
from coopnet_energy.params.network_params import Geometry, NetworkParams
from coopnet_energy.utils.numerics import (
    SERIES_CUTOFF,
    bessel_k1_scaled,
    find_root_monotone,
    integrate_adaptive,
    one_minus_x_k1,
    q_function,
)

SUPPORTED_BITS = (2, 4, 6, 8, 10)

# Relative gap between the two link rates below which the Erlang form is used
EQUAL_RATE_RTOL = 1e-9
DEFAULT_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class Modulation:
    """Square MQAM with b bits per symbol."""

    b: int

    def __post_init__(self):
        if isinstance(self.b, bool) or not float(self.b).is_integer():
            raise ValidationError(f"b must be an integer, got {self.b!r}", key="b")
        object.__setattr__(self, "b", int(self.b))
        if self.b not in SUPPORTED_BITS:
            raise ValidationError(
                f"b must be one of {list(SUPPORTED_BITS)} (square MQAM), got {self.b}", key="b"
            )

    @property
    def m(self) -> int:
        return 2 ** self.b


@dataclass(frozen=True)
class LinkBudget:
    """Per-modulation quantities shared by every scheme."""

    gamma_b: float
    gamma_th: float
    alpha: float
    t_on: float


# ============== MODULATION ==============

def ber_mqam(gamma_b: float, mod: Modulation) -> float:
    """
    Bit error rate of uncoded square MQAM in AWGN at SNR per bit gamma_b.

    p_b = [1 - (1 - c Q(sqrt(3 b gamma_b / (M - 1))))^2] / b with
    c = 2 (sqrt(M) - 1) / sqrt(M), written as c Q (2 - c Q) / b.
    """
    if gamma_b < 0:
        raise ValidationError(f"gamma_b must be non-negative, got {gamma_b}", key="gamma_b")

    sqrt_m = math.sqrt(mod.m)
    coeff = 2 * (sqrt_m - 1) / sqrt_m
    symbol_term = coeff * q_function(math.sqrt(3 * mod.b * gamma_b / (mod.m - 1)))
    return symbol_term * (2 - symbol_term) / mod.b


def snr_per_bit_for_ber(mod: Modulation, target_ber: float) -> float:
    """
    Invert ber_mqam: the SNR per bit at which the BER equals target_ber.

    Raises:
        InfeasibleTargetError: If target_ber is not in (0, ber_mqam(0, mod)]
    """
    ceiling = ber_mqam(0.0, mod)
    if not 0 < target_ber <= ceiling:
        raise InfeasibleTargetError(
            f"Target BER {target_ber} is unreachable with {mod.m}-QAM (attainable range (0, {ceiling}])"
        )
    if target_ber == ceiling:
        return 0.0

    log_target = math.log(target_ber)

    def excess(gamma_b: float) -> float:
        return math.log(ber_mqam(gamma_b, mod)) - log_target

    hi = 1.0
    while ber_mqam(hi, mod) > target_ber:
        hi *= 2
    if ber_mqam(hi, mod) == 0:
        raise InfeasibleTargetError(f"Target BER {target_ber} is below double-precision resolution")

    return find_root_monotone(excess, 0.0, hi, tol=1e-14)


def snr_threshold(gamma_b: float, mod: Modulation, bandwidth_b: float) -> float:
    """SNR threshold gamma_th = gamma_b * log2(M) * B; carries the bandwidth factor."""
    return gamma_b * mod.b * bandwidth_b


def amplifier_overhead(mod: Modulation, eta: float) -> float:
    """Amplifier overhead alpha = xi / eta - 1 with xi = 3 (sqrt(M) - 1) / (sqrt(M) + 1)."""
    if not 0 < eta <= 1:
        raise ValidationError(f"eta must lie in (0, 1], got {eta}", key="eta")
    sqrt_m = math.sqrt(mod.m)
    xi = 3 * (sqrt_m - 1) / (sqrt_m + 1)
    return xi / eta - 1


def transmission_time(l_bits: float, mod: Modulation, bandwidth_b: float) -> float:
    """On-air time T_on = L / (b B) of one packet."""
    return l_bits / (mod.b * bandwidth_b)


def link_budget(params: NetworkParams, mod: Modulation) -> LinkBudget:
    """
    Bundle gamma_b, gamma_th, alpha and T_on for one modulation.

    Args:
        params: Network parameters (target_ber, bandwidth, eta, packet size)
        mod: Modulation

    Returns:
        LinkBudget
    """
    gamma_b = snr_per_bit_for_ber(mod, params.target_ber)
    return LinkBudget(
        gamma_b=gamma_b,
        gamma_th=snr_threshold(gamma_b, mod, params.bandwidth_b),
        alpha=amplifier_overhead(mod, params.eta),
        t_on=transmission_time(params.l_bits, mod, params.bandwidth_b),
    )


# ============== LINK DISTRIBUTIONS ==============

def mean_link_snr(params: NetworkParams, d: float) -> float:
    """Mean received SNR P_t d^-beta / N_0 of a Rayleigh link of length d."""
    _check_distance(d, "d")
    return params.p_t * d ** (-params.beta) / params.n_0


def link_rate(params: NetworkParams, d: float) -> float:
    """Rate N_0 d^beta / P_t of the exponential link SNR (inverse of the mean)."""
    _check_distance(d, "d")
    return params.n_0 * d ** params.beta / params.p_t


def cdf_exponential_link(gamma_th: float, params: NetworkParams, d: float) -> float:
    """P(gamma <= gamma_th) = 1 - exp(-N_0 d^beta gamma_th / P_t) for one link."""
    _check_threshold(gamma_th)
    return -math.expm1(-link_rate(params, d) * gamma_th)


def cdf_af_relayed(gamma_th: float, params: NetworkParams, d_sr: float, d_rd: float) -> float:
    """
    CDF of the end-to-end SNR of the amplify-and-forward path.

    1 - sqrt(xi) exp(-gamma_th (l_sr + l_rd)) K1(sqrt(xi)) with
    xi = 4 (gamma_th^2 + gamma_th) l_sr l_rd, l = N_0 d^beta / P_t.
    """
    _check_threshold(gamma_th)
    rate_sr = link_rate(params, d_sr)
    rate_rd = link_rate(params, d_rd)
    return _af_cdf_from_rates(gamma_th, rate_sr, rate_rd)


def cdf_af_mrc_combined(
    gamma_th: float,
    params: NetworkParams,
    geom: Geometry,
    tol: float = DEFAULT_QUAD_TOL,
) -> float:
    """
    P(gamma_sd + gamma_rd <= gamma_th) for MRC of the direct and AF paths.

    The AF CDF conditioned on gamma_sd is averaged against the exponential
    density of gamma_sd over [0, gamma_th]; at the upper end the
    conditional CDF takes its limit value 0.

    Raises:
        NonConvergenceError: Propagated from the quadrature
    """
    _check_threshold(gamma_th)
    if gamma_th == 0:
        return 0.0

    rate_sd = link_rate(params, geom.d_sd)
    rate_sr = link_rate(params, geom.d_sr)
    rate_rd = link_rate(params, geom.d_rd)

    # The sum is below threshold only if each summand is
    bound = min(-math.expm1(-rate_sd * gamma_th), _af_cdf_from_rates(gamma_th, rate_sr, rate_rd))
    if bound == 0:
        return 0.0

    def integrand(gamma_sd: float) -> float:
        conditional = _af_cdf_from_rates(max(gamma_th - gamma_sd, 0.0), rate_sr, rate_rd)
        return conditional * rate_sd * math.exp(-rate_sd * gamma_sd)

    result = integrate_adaptive(integrand, 0.0, gamma_th, tol=tol, abs_tol=tol * bound)
    return min(max(result.value, 0.0), bound)


def tail_df_mrc_combined(gamma_th: float, params: NetworkParams, d_sd: float, d_rd: float) -> float:
    """
    P(gamma_sd + gamma_rd >= gamma_th) for two independent exponential SNRs.

    (l_b e^{-l_a g} - l_a e^{-l_b g}) / (l_b - l_a), evaluated as
    e^{-a} (1 + a (1 - e^{-(b-a)}) / (b - a)) with a <= b the two rate-threshold
    products; the Erlang form (1 + l g) e^{-l g} takes over for equal rates.
    """
    _check_threshold(gamma_th)
    if gamma_th == 0:
        return 1.0

    rate_a = link_rate(params, d_sd)
    rate_b = link_rate(params, d_rd)
    return _hypoexponential_tail(gamma_th, rate_a, rate_b)


# ============== INTERNAL FUNCTIONS ==============

def _af_cdf_from_rates(gamma_th: float, rate_sr: float, rate_rd: float) -> float:
    """Internal: AF path CDF from the two link rates, clamped to [0, 1]."""
    if gamma_th <= 0:
        return 0.0

    exponent = gamma_th * (rate_sr + rate_rd)
    arg = 2.0 * math.sqrt((gamma_th * gamma_th + gamma_th) * rate_sr * rate_rd)

    if arg <= SERIES_CUTOFF:
        # 1 - e^{-c} x K1(x) = (1 - e^{-c}) x K1(x) + (1 - x K1(x))
        complement = one_minus_x_k1(arg)
        value = -math.expm1(-exponent) * (1.0 - complement) + complement
    else:
        value = 1.0 - math.exp(arg - exponent) * arg * bessel_k1_scaled(arg)

    return min(max(value, 0.0), 1.0)


def _hypoexponential_tail(gamma_th: float, rate_a: float, rate_b: float) -> float:
    """Internal: Tail of the sum of two exponentials with the given rates."""
    if abs(rate_a - rate_b) / max(rate_a, rate_b) < EQUAL_RATE_RTOL:
        scaled = 0.5 * (rate_a + rate_b) * gamma_th
        return min((1.0 + scaled) * math.exp(-scaled), 1.0)

    low = min(rate_a, rate_b) * gamma_th
    gap = abs(rate_b - rate_a) * gamma_th
    value = math.exp(-low) * (1.0 + low * -math.expm1(-gap) / gap)
    return min(max(value, 0.0), 1.0)


def _check_threshold(gamma_th: float) -> None:
    """Internal: Reject negative or non-finite thresholds."""
    if not (gamma_th >= 0 and np.isfinite(gamma_th)):
        raise ValidationError(f"gamma_th must be a finite non-negative number, got {gamma_th}", key="gamma_th")


def _check_distance(d: float, key: str) -> None:
    """Internal: Reject non-positive link lengths."""
    if not d > 0:
        raise ValidationError(f"{key} must be positive, got {d}", key=key)

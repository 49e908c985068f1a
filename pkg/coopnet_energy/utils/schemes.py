"""End-to-end evaluation of direct, AF and DF transmission with ARQ."""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, Optional, Sequence, Tuple

from coopnet_energy.exceptions import DegenerateSuccessError, ValidationError
from coopnet_energy.logger import get_logger
from coopnet_energy.params.network_params import Geometry, NetworkParams
from coopnet_energy.params.run_settings import OutageModel
from coopnet_energy.utils.link_model import (
    DEFAULT_QUAD_TOL,
    SUPPORTED_BITS,
    LinkBudget,
    Modulation,
    cdf_af_mrc_combined,
    cdf_af_relayed,
    cdf_exponential_link,
    link_budget,
    tail_df_mrc_combined,
)

logger = get_logger(__name__)

# Below this per-round success probability the expected bit energy is reported as degenerate
MIN_SUCCESS_PROBABILITY = 1e-12

DEFAULT_RELAY_POSITIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


class SchemeKind(str, Enum):
    """Transmission schemes of the one-relay network."""

    DIRECT = "direct"
    AF_NON_MRC = "af"
    AF_MRC = "af_mrc"
    DF_NON_MRC = "df"
    DF_MRC = "df_mrc"

    @property
    def is_cooperative(self) -> bool:
        return self is not SchemeKind.DIRECT

    @property
    def uses_mrc(self) -> bool:
        return self in (SchemeKind.AF_MRC, SchemeKind.DF_MRC)

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        """
        Look up a scheme by value or alias (af_non_mrc, AfMrc, DF-MRC, ...).

        Raises:
            ValidationError: If the name matches no scheme
        """
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "afnonmrc": cls.AF_NON_MRC,
            "af_non_mrc": cls.AF_NON_MRC,
            "afmrc": cls.AF_MRC,
            "dfnonmrc": cls.DF_NON_MRC,
            "df_non_mrc": cls.DF_NON_MRC,
            "dfmrc": cls.DF_MRC,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(kind.value for kind in cls)
            raise ValidationError(f"Unknown scheme {name!r}; expected one of {valid}", key="schemes")


@dataclass(frozen=True)
class StatePowers:
    """Network power draw in each round type (W)."""

    direct: float
    single_slot: float
    two_slot: float


@dataclass(frozen=True)
class SchemeResult:
    """Success probability, power and bit energy of one scheme at one operating point."""

    kind: SchemeKind
    b: int
    p_success: float
    p_avg: float
    e_bit: float
    gain: float
    gamma_th: float
    t_on: float
    alpha: float
    e_direct: float


# ============== BUILDING BLOCKS ==============

def state_powers(params: NetworkParams, alpha: float) -> StatePowers:
    """
    Power of each round type.

    direct: source transmits, destination listens.
    single_slot: source transmits, relay and destination listen.
    two_slot: a second slot where the relay transmits and the destination listens.
    """
    radiated = (1 + alpha) * params.p_t
    return StatePowers(
        direct=radiated + params.p_ct + params.p_cr,
        single_slot=radiated + params.p_ct + 2 * params.p_cr,
        two_slot=2 * radiated + 2 * params.p_ct + 3 * params.p_cr,
    )


def bit_energy(p_avg: float, t_on: float, params: NetworkParams, p_success: float) -> float:
    """
    Expected energy per delivered bit with geometric retransmissions.

    (p_avg T_on + P_tr T_tr) / (L p_success)

    Raises:
        DegenerateSuccessError: If p_success is below MIN_SUCCESS_PROBABILITY
    """
    if not p_success >= MIN_SUCCESS_PROBABILITY:
        raise DegenerateSuccessError(
            f"Per-round success probability {p_success:.3e} is below {MIN_SUCCESS_PROBABILITY:.0e}; "
            "bit energy is not finite"
        )
    return (p_avg * t_on + params.p_tr * params.t_tr) / (params.l_bits * p_success)


def single_transmission_energy(params: NetworkParams, mod: Modulation) -> float:
    """Energy per bit of one direct attempt, ignoring retransmissions."""
    budget = _budget(params, mod)
    power = state_powers(params, budget.alpha).direct
    return (power * budget.t_on + params.p_tr * params.t_tr) / params.l_bits


def state_probabilities(params: NetworkParams, geom: Geometry, mod: Modulation) -> Dict[str, float]:
    """
    Probabilities of the four mutually exclusive DF round outcomes.

    Returns:
        {
            "direct_success": S-D link succeeds,
            "relay_outage": S-D and S-R both in outage,
            "relay_success": S-D in outage, S-R and R-D succeed,
            "relay_forward_failure": S-D and R-D in outage, S-R succeeds,
        }
    """
    gamma_th = _budget(params, mod).gamma_th
    p_sd_fail = cdf_exponential_link(gamma_th, params, geom.d_sd)
    p_sr_fail = cdf_exponential_link(gamma_th, params, geom.d_sr)
    p_rd_fail = cdf_exponential_link(gamma_th, params, geom.d_rd)

    forwarded = p_sd_fail * (1 - p_sr_fail)
    return {
        "direct_success": 1 - p_sd_fail,
        "relay_outage": p_sd_fail * p_sr_fail,
        "relay_success": forwarded * (1 - p_rd_fail),
        "relay_forward_failure": forwarded * p_rd_fail,
    }


# ============== SCHEME EVALUATORS ==============

def evaluate_direct(params: NetworkParams, geom: Geometry, mod: Modulation) -> SchemeResult:
    """
    Direct S-D transmission with retransmission until success.

    Raises:
        DegenerateSuccessError: If the S-D success probability underflows
    """
    budget = _budget(params, mod)
    p_success = 1 - cdf_exponential_link(budget.gamma_th, params, geom.d_sd)
    p_avg = state_powers(params, budget.alpha).direct
    e_bit = bit_energy(p_avg, budget.t_on, params, p_success)

    return SchemeResult(
        kind=SchemeKind.DIRECT,
        b=mod.b,
        p_success=p_success,
        p_avg=p_avg,
        e_bit=e_bit,
        gain=1.0,
        gamma_th=budget.gamma_th,
        t_on=budget.t_on,
        alpha=budget.alpha,
        e_direct=e_bit,
    )


def evaluate_af(
    params: NetworkParams,
    geom: Geometry,
    mod: Modulation,
    mrc: bool,
    outage_model: OutageModel = "joint",
    tol: float = DEFAULT_QUAD_TOL,
) -> SchemeResult:
    """
    Fixed amplify-and-forward, with or without MRC at the destination.

    The relay forwards only in rounds where the S-D link is in outage, so
    the average power weights the one-slot and two-slot power by the S-D
    outage probability in both variants.

    Args:
        params: Network parameters
        geom: Relay placement
        mod: Modulation
        mrc: Combine the direct and relayed copies at the destination
        outage_model: "joint" (outage of the combined round) or "product"
            (S-D outage times the combined-SNR CDF)
        tol: Quadrature tolerance of the MRC averaging integral

    Raises:
        DegenerateSuccessError: If a success probability underflows
        NonConvergenceError: If the MRC quadrature fails
    """
    budget = _budget(params, mod)
    gamma_th = budget.gamma_th
    powers = state_powers(params, budget.alpha)

    p_sd_fail = cdf_exponential_link(gamma_th, params, geom.d_sd)
    p_avg = powers.single_slot * (1 - p_sd_fail) + powers.two_slot * p_sd_fail

    if not mrc:
        p_outage = p_sd_fail * cdf_af_relayed(gamma_th, params, geom.d_sr, geom.d_rd)
    else:
        combined = cdf_af_mrc_combined(gamma_th, params, geom, tol=tol)
        p_outage = combined if outage_model == "joint" else p_sd_fail * combined

    kind = SchemeKind.AF_MRC if mrc else SchemeKind.AF_NON_MRC
    return _cooperative_result(kind, params, geom, mod, budget, 1 - p_outage, p_avg)


def evaluate_df(
    params: NetworkParams,
    geom: Geometry,
    mod: Modulation,
    mrc: bool,
    outage_model: OutageModel = "joint",
) -> SchemeResult:
    """
    Selective decode-and-forward, with or without MRC at the destination.

    The relay forwards only when the S-D link is in outage and it decoded
    the packet itself; MRC does not change the power profile.

    Raises:
        DegenerateSuccessError: If a success probability underflows
    """
    budget = _budget(params, mod)
    gamma_th = budget.gamma_th
    powers = state_powers(params, budget.alpha)

    p_sd_fail = cdf_exponential_link(gamma_th, params, geom.d_sd)
    p_sr_fail = cdf_exponential_link(gamma_th, params, geom.d_sr)
    p_sd_ok = 1 - p_sd_fail
    p_sr_ok = 1 - p_sr_fail

    p_avg = (
        powers.single_slot * p_sd_ok
        + powers.single_slot * p_sd_fail * p_sr_fail
        + powers.two_slot * p_sd_fail * p_sr_ok
    )

    if not mrc:
        p_rd_ok = 1 - cdf_exponential_link(gamma_th, params, geom.d_rd)
        p_success = p_sd_ok + p_sd_fail * p_sr_ok * p_rd_ok
    else:
        combined_tail = tail_df_mrc_combined(gamma_th, params, geom.d_sd, geom.d_rd)
        if outage_model == "joint":
            # P(gamma_sd < th <= gamma_sd + gamma_rd)
            rescued = max(combined_tail - p_sd_ok, 0.0)
            p_success = p_sd_ok + p_sr_ok * rescued
        else:
            p_success = p_sd_ok + p_sd_fail * p_sr_ok * combined_tail

    kind = SchemeKind.DF_MRC if mrc else SchemeKind.DF_NON_MRC
    return _cooperative_result(kind, params, geom, mod, budget, p_success, p_avg)


def evaluate_scheme(
    params: NetworkParams,
    geom: Geometry,
    mod: Modulation,
    kind: SchemeKind,
    outage_model: OutageModel = "joint",
    tol: float = DEFAULT_QUAD_TOL,
) -> SchemeResult:
    """Evaluate any scheme by kind."""
    kind = SchemeKind.parse(kind) if not isinstance(kind, SchemeKind) else kind

    if kind is SchemeKind.DIRECT:
        return evaluate_direct(params, geom, mod)
    if kind in (SchemeKind.AF_NON_MRC, SchemeKind.AF_MRC):
        return evaluate_af(params, geom, mod, mrc=kind.uses_mrc, outage_model=outage_model, tol=tol)
    return evaluate_df(params, geom, mod, mrc=kind.uses_mrc, outage_model=outage_model)


# ============== OPTIMIZERS ==============

def optimal_constellation(
    params: NetworkParams,
    geom: Geometry,
    scheme: SchemeKind,
    candidates: Sequence[int] = SUPPORTED_BITS,
    outage_model: OutageModel = "joint",
) -> Tuple[int, SchemeResult]:
    """
    Constellation size minimising bit energy.

    Ties go to the larger b. Candidates whose evaluation degenerates are
    skipped with a warning.

    Returns:
        (b*, SchemeResult at b*)

    Raises:
        ValidationError: If candidates is empty
        DegenerateSuccessError: If every candidate degenerates
    """
    if not candidates:
        raise ValidationError("Candidate constellation list is empty", key="candidates")
    kind = SchemeKind.parse(scheme)

    results = []
    for b in candidates:
        try:
            results.append(evaluate_scheme(params, geom, Modulation(b), kind, outage_model))
        except DegenerateSuccessError as e:
            logger.warning("Skipping b=%s for %s at d_sd=%s: %s", b, kind.value, geom.d_sd, e)

    if not results:
        raise DegenerateSuccessError(
            f"Every candidate constellation degenerates for {kind.value} at d_sd={geom.d_sd}"
        )

    best = min(results, key=lambda result: (result.e_bit, -result.b))
    return best.b, best


def optimal_relay_position(
    params: NetworkParams,
    d_sd: float,
    mod: Modulation,
    kind: SchemeKind,
    candidates: Iterable[float] = DEFAULT_RELAY_POSITIONS,
    outage_model: OutageModel = "joint",
) -> Tuple[float, SchemeResult]:
    """
    Relay position maximising cooperative gain.

    Ties go to the position closer to the midpoint.

    Returns:
        (relay_frac*, SchemeResult at relay_frac*)
    """
    scored = []
    for t in candidates:
        result = evaluate_scheme(params, Geometry(d_sd, t), mod, kind, outage_model)
        scored.append((t, result))

    if not scored:
        raise ValidationError("Candidate relay position list is empty", key="candidates")

    return max(scored, key=lambda item: (item[1].gain, -abs(item[0] - 0.5), -item[0]))


def gain_crossover_distance(
    params: NetworkParams,
    mod: Modulation,
    kind: SchemeKind,
    distances: Iterable[float],
    relay_frac: float = 0.5,
    outage_model: OutageModel = "joint",
) -> Optional[float]:
    """
    First distance (ascending) at which cooperation beats direct transmission.

    Returns:
        Smallest grid distance with gain >= 1, or None if there is none
    """
    for d_sd in sorted(distances):
        result = evaluate_scheme(params, Geometry(d_sd, relay_frac), mod, kind, outage_model)
        if result.gain >= 1:
            return d_sd
    return None


# ============== INTERNAL FUNCTIONS ==============

@lru_cache(maxsize=256)
def _budget(params: NetworkParams, mod: Modulation) -> LinkBudget:
    """Internal: Memoised link budget (the BER inversion dominates small evaluations)."""
    return link_budget(params, mod)


def _cooperative_result(
    kind: SchemeKind,
    params: NetworkParams,
    geom: Geometry,
    mod: Modulation,
    budget: LinkBudget,
    p_success: float,
    p_avg: float,
) -> SchemeResult:
    """Internal: Assemble a cooperative SchemeResult with its gain over direct transmission."""
    e_bit = bit_energy(p_avg, budget.t_on, params, p_success)
    try:
        e_direct = evaluate_direct(params, geom, mod).e_bit
    except DegenerateSuccessError:
        # direct transmission degenerate: unbounded gain
        e_direct = math.inf

    return SchemeResult(
        kind=kind,
        b=mod.b,
        p_success=p_success,
        p_avg=p_avg,
        e_bit=e_bit,
        gain=e_direct / e_bit,
        gamma_th=budget.gamma_th,
        t_on=budget.t_on,
        alpha=budget.alpha,
        e_direct=e_direct,
    )

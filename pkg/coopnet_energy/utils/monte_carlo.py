"""
Monte Carlo oracle for the ARQ protocols.

Every trial retransmits until the destination decodes the packet. Each
round draws fresh unit-mean exponential fades for the S-D, S-R and R-D
links, plays one protocol round and books the energy of the round type
that was actually used.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from coopnet_energy.exceptions import TrialBudgetExceededError, ValidationError
from coopnet_energy.logger import get_logger
from coopnet_energy.params.network_params import Geometry, NetworkParams
from coopnet_energy.params.run_settings import RunSettings, get_run_settings
from coopnet_energy.utils.link_model import Modulation, link_budget, mean_link_snr
from coopnet_energy.utils.schemes import SchemeKind, state_powers

logger = get_logger(__name__)

# Row order of every gain / SNR block
SD, SR, RD = 0, 1, 2

MAX_SEED = 2 ** 64 - 1


@dataclass(frozen=True)
class McConfig:
    """Trial count, master seed and batch size of one simulation."""

    trials: int
    seed: int = 0
    batch_size: int = 10_000

    def __post_init__(self):
        for key in ("trials", "seed", "batch_size"):
            value = getattr(self, key)
            if isinstance(value, bool) or not float(value).is_integer():
                raise ValidationError(f"mc.{key} must be an integer, got {value!r}", key=f"mc.{key}")
            object.__setattr__(self, key, int(value))

        if self.trials < 1:
            raise ValidationError(f"mc.trials must be at least 1, got {self.trials}", key="mc.trials")
        if self.batch_size < 1:
            raise ValidationError(f"mc.batch_size must be at least 1, got {self.batch_size}", key="mc.batch_size")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValidationError(f"mc.seed must be a 64-bit unsigned integer, got {self.seed}", key="mc.seed")

    @property
    def batch_count(self) -> int:
        return math.ceil(self.trials / self.batch_size)

    def batch_trials(self, index: int) -> int:
        """Number of trials in batch `index`; the last batch takes the remainder."""
        return min(self.batch_size, self.trials - index * self.batch_size)


@dataclass(frozen=True)
class McEstimate:
    """Empirical success probability and bit energy with standard errors."""

    p_success_hat: float
    p_success_se: float
    e_bit_hat: float
    e_bit_se: float
    trials: int
    mean_rounds: float
    mean_rounds_se: float
    total_rounds: int


@dataclass(frozen=True)
class ChannelDraw:
    """Fading power gains |h|^2 and the instantaneous SNRs they produce, rows SD, SR, RD."""

    gains: np.ndarray
    snrs: np.ndarray


@dataclass(frozen=True)
class _Moments:
    """Count, mean and sum of squared deviations of a sample."""

    count: int
    mean: float
    m2: float

    @classmethod
    def of(cls, sample: np.ndarray) -> "_Moments":
        mean = float(np.mean(sample))
        return cls(count=int(sample.size), mean=mean, m2=float(np.sum((sample - mean) ** 2)))

    def merge(self, other: "_Moments") -> "_Moments":
        count = self.count + other.count
        delta = other.mean - self.mean
        return _Moments(
            count=count,
            mean=self.mean + delta * other.count / count,
            m2=self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        )

    @property
    def std(self) -> float:
        return math.sqrt(self.m2 / (self.count - 1)) if self.count > 1 else 0.0


# ============== SAMPLING ==============

def batch_generator(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for one batch, keyed by (seed, batch index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def link_mean_snrs(params: NetworkParams, geom: Geometry) -> np.ndarray:
    """Mean SNRs of the S-D, S-R and R-D links as a (3,) array."""
    return np.array([
        mean_link_snr(params, geom.d_sd),
        mean_link_snr(params, geom.d_sr),
        mean_link_snr(params, geom.d_rd),
    ])


def sample_channel_gains(
    rng: np.random.Generator,
    geom: Geometry,
    params: NetworkParams,
    size: Optional[int] = None,
) -> ChannelDraw:
    """
    Draw independent Rayleigh fades for the three links.

    Args:
        rng: Generator; the draw is a pure function of its state
        geom: Relay placement (scales gains into SNRs)
        params: Network parameters
        size: Number of draws per link; None draws one triple

    Returns:
        ChannelDraw with arrays of shape (3,) or (3, size)
    """
    shape = (3,) if size is None else (3, size)
    gains = rng.standard_exponential(shape)
    means = link_mean_snrs(params, geom)
    snrs = gains * (means if size is None else means[:, np.newaxis])
    return ChannelDraw(gains=gains, snrs=snrs)


def effective_af_snr(g_sr, g_rd, params: NetworkParams, geom: Geometry):
    """
    End-to-end SNR of the amplify-and-forward path for given fading gains.

    Gamma_sr Gamma_rd / (Gamma_sr + Gamma_rd + 1) with
    Gamma_xy = P_t d_xy^-beta |h_xy|^2 / N_0. Scalars or arrays.
    """
    snr_sr = np.asarray(g_sr, dtype=float) * mean_link_snr(params, geom.d_sr)
    snr_rd = np.asarray(g_rd, dtype=float) * mean_link_snr(params, geom.d_rd)
    if np.any(snr_sr < 0) or np.any(snr_rd < 0):
        raise ValidationError("Fading gains must be non-negative", key="gains")

    value = _relayed_snr(snr_sr, snr_rd)
    return float(value) if np.ndim(value) == 0 else value


# ============== PROTOCOL ==============

def play_round(kind: SchemeKind, snrs: np.ndarray, gamma_th: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Play one protocol round over a block of SNR draws.

    Args:
        kind: Scheme
        snrs: (3, n) instantaneous SNRs, rows SD, SR, RD
        gamma_th: Decoding threshold

    Returns:
        (success, two_slot): boolean masks of decoded packets and of rounds
        in which the relay transmitted
    """
    sd_ok = snrs[SD] >= gamma_th

    if kind is SchemeKind.DIRECT:
        return sd_ok, np.zeros_like(sd_ok)

    if kind in (SchemeKind.AF_NON_MRC, SchemeKind.AF_MRC):
        relayed = _relayed_snr(snrs[SR], snrs[RD])
        if kind is SchemeKind.AF_MRC:
            relayed = snrs[SD] + relayed
        return sd_ok | (relayed >= gamma_th), ~sd_ok

    forwarded = ~sd_ok & (snrs[SR] >= gamma_th)
    at_destination = snrs[SD] + snrs[RD] if kind is SchemeKind.DF_MRC else snrs[RD]
    return sd_ok | (forwarded & (at_destination >= gamma_th)), forwarded


def simulate_scheme(
    params: NetworkParams,
    geom: Geometry,
    mod: Modulation,
    kind: SchemeKind,
    cfg: McConfig,
    settings: Optional[RunSettings] = None,
) -> McEstimate:
    """
    Estimate success probability and bit energy of a scheme by simulation.

    Trials are split into batches of cfg.batch_size, each with its own
    generator keyed by (seed, batch index). Batch statistics are merged in
    index order, so the estimate does not depend on settings.workers.

    Args:
        params: Network parameters
        geom: Relay placement
        mod: Modulation
        kind: Scheme
        cfg: Trials, seed and batch size
        settings: Run settings (workers, max_rounds); defaults when None

    Returns:
        McEstimate

    Raises:
        TrialBudgetExceededError: If a trial needs more than settings.max_rounds rounds
    """
    settings = settings or get_run_settings()
    kind = SchemeKind.parse(kind) if not isinstance(kind, SchemeKind) else kind
    jobs = [
        (params, geom, mod, kind, cfg.seed, index, cfg.batch_trials(index), settings.max_rounds)
        for index in range(cfg.batch_count)
    ]

    if settings.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=settings.workers) as executor:
            batches = list(executor.map(_simulate_batch, jobs))
    else:
        batches = [_simulate_batch(job) for job in jobs]

    rounds, energy = batches[0]
    for batch_rounds, batch_energy in batches[1:]:
        rounds = rounds.merge(batch_rounds)
        energy = energy.merge(batch_energy)

    estimate = _estimate(rounds, energy, params.l_bits)
    logger.debug(
        "Simulated %s b=%s d_sd=%s t=%s: p=%.6g e_bit=%.6g over %s trials",
        kind.value, mod.b, geom.d_sd, geom.relay_frac, estimate.p_success_hat, estimate.e_bit_hat, cfg.trials,
    )
    return estimate


# ============== INTERNAL FUNCTIONS ==============

def _relayed_snr(snr_sr, snr_rd):
    """Internal: AF end-to-end SNR from the two hop SNRs."""
    return snr_sr * snr_rd / (snr_sr + snr_rd + 1.0)


def _simulate_batch(job: tuple) -> Tuple[_Moments, _Moments]:
    """
    Internal: Run one batch of trials.

    Returns:
        (moments of rounds per trial, moments of energy per trial)
    """
    params, geom, mod, kind, seed, index, n_trials, max_rounds = job

    rng = batch_generator(seed, index)
    budget = link_budget(params, mod)
    powers = state_powers(params, budget.alpha)
    means = link_mean_snrs(params, geom)[:, np.newaxis]

    one_slot_power = powers.direct if kind is SchemeKind.DIRECT else powers.single_slot
    one_slot_energy = one_slot_power * budget.t_on + params.p_tr * params.t_tr
    two_slot_energy = powers.two_slot * budget.t_on + params.p_tr * params.t_tr

    rounds = np.zeros(n_trials, dtype=np.int64)
    energy = np.zeros(n_trials)
    active = np.arange(n_trials)

    played = 0
    while active.size:
        if played == max_rounds:
            raise TrialBudgetExceededError(
                f"{active.size} trial(s) of {kind.value} still undelivered after {max_rounds} rounds "
                f"(b={mod.b}, d_sd={geom.d_sd}, relay_frac={geom.relay_frac})"
            )
        played += 1

        snrs = rng.standard_exponential((3, active.size)) * means
        success, two_slot = play_round(kind, snrs, budget.gamma_th)

        energy[active] += np.where(two_slot, two_slot_energy, one_slot_energy)
        rounds[active] += 1
        active = active[~success]

    return _Moments.of(rounds.astype(float)), _Moments.of(energy)


def _estimate(rounds: _Moments, energy: _Moments, l_bits: int) -> McEstimate:
    """Internal: Turn merged moments into estimates with delta-method standard errors."""
    n = rounds.count
    p_hat = 1.0 / rounds.mean
    mean_rounds_se = rounds.std / math.sqrt(n)

    return McEstimate(
        p_success_hat=p_hat,
        p_success_se=p_hat * p_hat * mean_rounds_se,
        e_bit_hat=energy.mean / l_bits,
        e_bit_se=energy.std / (l_bits * math.sqrt(n)),
        trials=n,
        mean_rounds=rounds.mean,
        mean_rounds_se=mean_rounds_se,
        total_rounds=int(round(rounds.mean * n)),
    )

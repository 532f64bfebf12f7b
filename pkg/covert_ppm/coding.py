"""Random PPM codebooks, threshold decoding and one-shot existence certificates.

A code carries M messages for each of K secret keys. Codewords are binary and stored
as sorted 1-based pulse positions. The decoder for key s accepts message w when w is
the only codeword of subcode s whose log-likelihood ratio against P0^n exceeds the
threshold gamma.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dmc_core import (
    DEFAULT_ENUMERATION_CAP,
    DEFAULT_TYPE_CLASS_CAP,
    CovertChannelPair,
    FiniteDistribution,
    kl_divergence,
    quasi_metric_bound_log,
)
from .errors import CombinatorialBlowup, DomainError, InvalidParams
from .ppm import (
    PpmParams,
    f_xy_bound,
    f_xz_bound,
    information_density_law,
    information_density_sup,
    log_ppm_ratio_expectation,
    ppm_beta_bound,
    ppm_divergence_exact,
    ppm_log_min_probability,
    ppm_tv_bound,
    receiver_llr_law,
    sample_ppm_codewords,
)
from .statistics_aggregator import aggregate_key_statistics, binomial_sigma, wilson_interval
from .utils import exp_neg_exp, log_of, safe_exp

logger = logging.getLogger(__name__)

Number = Union[int, float]

METRICS = ("kl", "tv", "beta")


class Erasure(Enum):
    """Decoder output when no unique codeword clears the threshold."""

    ERASURE = "erasure"


ERASURE = Erasure.ERASURE


@dataclass(frozen=True, eq=False)
class Codebook:
    """K x M binary codewords of length n stored as sorted pulse positions.

    Attributes:
        n: Blocklength
        M: Messages per key
        K: Number of keys
        codewords: codewords[s][w] is the sorted tuple of 1-based pulse positions
    """

    n: int
    M: int
    K: int
    codewords: Tuple[Tuple[Tuple[int, ...], ...], ...] = field(repr=False)

    def __post_init__(self):
        if self.M < 1 or self.K < 1:
            raise InvalidParams(f"need M, K >= 1, got M={self.M}, K={self.K}")
        if len(self.codewords) != self.K or any(len(sub) != self.M for sub in self.codewords):
            raise InvalidParams("codewords must be a K x M table")
        for sub in self.codewords:
            for word in sub:
                if any(b <= a for a, b in zip(word, word[1:])):
                    raise InvalidParams(f"pulse positions must be strictly increasing: {word}")
                if word and (word[0] < 1 or word[-1] > self.n):
                    raise InvalidParams(f"pulse positions must lie in [1, {self.n}]: {word}")

    @classmethod
    def from_array(cls, n: int, pulses: np.ndarray) -> "Codebook":
        """Build from a (K, M, weight) array of 1-based positions."""
        array = np.asarray(pulses, dtype=np.int64)
        if array.ndim != 3:
            raise InvalidParams("pulse array must have shape (K, M, weight)")
        table = tuple(
            tuple(tuple(int(i) for i in np.sort(word)) for word in sub) for sub in array
        )
        return cls(n, array.shape[1], array.shape[0], table)

    @property
    def size(self) -> int:
        return self.M * self.K

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([[len(word) for word in sub] for sub in self.codewords], dtype=np.int64)

    @property
    def constant_composition(self) -> bool:
        return bool(np.all(self.weights == self.weights.flat[0]))

    @property
    def weight(self) -> Optional[int]:
        """Common codeword weight, or None when the composition is not constant."""
        return int(self.weights.flat[0]) if self.constant_composition else None

    @cached_property
    def padded_pulses(self) -> np.ndarray:
        """(K, M, max weight) positions, padded with 0 (which addresses a zero column)."""
        width = max(1, int(self.weights.max()))
        out = np.zeros((self.K, self.M, width), dtype=np.int64)
        for s, sub in enumerate(self.codewords):
            for w, word in enumerate(sub):
                out[s, w, : len(word)] = word
        return out

    def subcode(self, key: int) -> Tuple[Tuple[int, ...], ...]:
        return self.codewords[key]

    def codeword_bits(self, key: int, message: int) -> np.ndarray:
        bits = np.zeros(self.n, dtype=np.int8)
        positions = list(self.codewords[key][message])
        bits[np.array(positions, dtype=np.int64) - 1] = 1
        return bits


def generate_codebook(params: PpmParams, M: int, K: int, rng_seed) -> Codebook:
    """MK i.i.d. PPM codewords, reproducible for a fixed seed."""
    if M < 1 or K < 1:
        raise InvalidParams(f"need M*K >= 1, got M={M}, K={K}")
    pulses = sample_ppm_codewords(params, M * K, rng_seed).reshape(K, M, params.ell)
    return Codebook.from_array(params.n, pulses)


# ---------------------------------------------------------------------------
# Threshold decoder
# ---------------------------------------------------------------------------


def _output_indices(channel: CovertChannelPair, y: Sequence) -> np.ndarray:
    index = {symbol: i for i, symbol in enumerate(channel.p0.alphabet)}
    try:
        return np.array([index[symbol] for symbol in y], dtype=np.int64)
    except KeyError as e:
        raise DomainError(f"output symbol {e.args[0]!r} is not in the receiver alphabet")


def _subcode_pulses(subcode: Sequence[Sequence[int]]) -> np.ndarray:
    width = max(1, max(len(word) for word in subcode))
    out = np.zeros((len(subcode), width), dtype=np.int64)
    for w, word in enumerate(subcode):
        out[w, : len(word)] = list(word)
    return out


def _decode_scores(llr: np.ndarray, y_idx: np.ndarray, pulses: np.ndarray) -> np.ndarray:
    """Codeword scores (trials, M) from output indices (trials, n) and padded pulses."""
    per_symbol = llr[y_idx]
    padded = np.concatenate([np.zeros((per_symbol.shape[0], 1)), per_symbol], axis=1)
    return padded[:, pulses].sum(axis=-1)


def _decide(scores: np.ndarray, gamma: float) -> np.ndarray:
    above = scores > gamma
    unique = above.sum(axis=1) == 1
    return np.where(unique, np.argmax(above, axis=1), -1)


def threshold_decode(
    subcode: Sequence[Sequence[int]],
    y: Sequence,
    gamma: float,
    channel: CovertChannelPair,
) -> Union[int, Erasure]:
    """0-based index of the unique codeword with LLR above gamma, else ERASURE.

    The LLR of codeword x is sum_i log(W(y_i|x_i)/P0(y_i)), which reduces to the sum of
    log(P1/P0)(y_i) over its pulse positions.
    """
    if len(subcode) == 0:
        raise InvalidParams("subcode must be nonempty")
    y_idx = _output_indices(channel, y)[None, :]
    scores = _decode_scores(channel.llr_main(), y_idx, _subcode_pulses(subcode))
    decision = int(_decide(scores, gamma)[0])
    return ERASURE if decision < 0 else decision


@dataclass(frozen=True)
class ErrorExpectationBounds:
    """Expected error of the random-coding threshold decoder.

    Attributes:
        eps1_expectation: F_{XY|P0^n}(gamma), exact
        eps2_bound: M e^{-gamma} E[P_Y/P0^n]
    """

    eps1_expectation: float
    eps2_bound: float

    @property
    def total(self) -> float:
        return self.eps1_expectation + self.eps2_bound


def error_expectation_bounds(
    channel: CovertChannelPair,
    params: PpmParams,
    M: Number,
    gamma: float,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> ErrorExpectationBounds:
    """Exact eps1 from the ell-fold LLR law and the Markov term eps2 for PPM input."""
    eps1 = receiver_llr_law(channel, params.ell, cap).cdf(gamma)
    if gamma == math.inf:
        return ErrorExpectationBounds(eps1, 0.0)
    log_eps2 = log_of(M) - gamma + log_ppm_ratio_expectation(channel, params)
    return ErrorExpectationBounds(eps1, safe_exp(log_eps2))


@dataclass(frozen=True)
class ThresholdChoice:
    gamma: float
    bound: float
    eps1: float
    eps2: float


def optimize_threshold(
    channel: CovertChannelPair,
    params: PpmParams,
    M: Number,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> ThresholdChoice:
    """Threshold minimizing F(gamma) + M e^{-gamma} E[ratio].

    F is a right-continuous step function, so the optimum sits just below an atom
    of the LLR law; both the atoms and their left neighbours are scanned.
    """
    law = receiver_llr_law(channel, params.ell, cap)
    log_scale = log_of(M) + log_ppm_ratio_expectation(channel, params)
    atoms = law.values
    candidates = np.concatenate([atoms, atoms - 1e-9 * np.maximum(1.0, np.abs(atoms))])
    cdf = np.cumsum(law.probs)
    positions = np.searchsorted(atoms, candidates, side="right")
    eps1 = np.where(positions > 0, cdf[np.maximum(positions - 1, 0)], 0.0)
    eps1 = np.minimum(eps1, 1.0)
    eps2 = np.exp(np.minimum(log_scale - candidates, 709.0))
    total = eps1 + eps2
    best = int(np.argmin(total))
    return ThresholdChoice(
        float(candidates[best]), float(total[best]), float(eps1[best]), float(eps2[best])
    )


# ---------------------------------------------------------------------------
# Monte Carlo reliability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    """Empirical decoding error of a codebook.

    Attributes:
        errors: Errors (including erasures) per key
        trials: Trials per key
        error_rate: Max over keys, or the average when max_over_keys is False
        ci_low: Lower Wilson bound on error_rate
        ci_high: Upper Wilson bound on error_rate
        sigma: Binomial standard deviation of error_rate
        max_over_keys: Which error criterion error_rate reports
    """

    errors: Tuple[int, ...]
    trials: int
    error_rate: float
    ci_low: float
    ci_high: float
    sigma: float
    max_over_keys: bool = True


def _sample_outputs(
    rng: np.random.Generator, channel: CovertChannelPair, bits: np.ndarray
) -> np.ndarray:
    cdf0 = np.cumsum(channel.p0.probs)[:-1]
    cdf1 = np.cumsum(channel.p1.probs)[:-1]
    u = rng.random(bits.shape)
    y0 = np.searchsorted(cdf0, u, side="right")
    y1 = np.searchsorted(cdf1, u, side="right")
    return np.where(bits.astype(bool), y1, y0)


def _key_errors(
    codebook: Codebook,
    key: int,
    channel: CovertChannelPair,
    gamma: float,
    trials: int,
    seed: np.random.SeedSequence,
    chunk: int,
) -> int:
    rng = np.random.default_rng(seed)
    pulses = codebook.padded_pulses[key]
    bits = np.zeros((codebook.M, codebook.n + 1), dtype=np.int8)
    bits[np.arange(codebook.M)[:, None], pulses] = 1
    bits = bits[:, 1:]
    llr = channel.llr_main()
    errors = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        messages = rng.integers(0, codebook.M, size=size)
        y_idx = _sample_outputs(rng, channel, bits[messages])
        decided = _decide(_decode_scores(llr, y_idx, pulses), gamma)
        errors += int(np.count_nonzero(decided != messages))
        done += size
    return errors


def monte_carlo_error(
    codebook: Codebook,
    channel: CovertChannelPair,
    gamma: float,
    trials: int,
    rng_seed: Optional[int] = None,
    max_over_keys: bool = True,
    workers: int = 1,
    confidence: float = 0.95,
) -> MonteCarloResult:
    """Estimate the threshold decoder's error with `trials` transmissions per key.

    Each key runs on its own child of SeedSequence(rng_seed), so results do not depend
    on the worker count.
    """
    if trials < 1:
        raise InvalidParams(f"trials must be positive, got {trials}")
    seeds = np.random.SeedSequence(rng_seed).spawn(codebook.K)
    chunk = max(1, 2**22 // (codebook.M * codebook.padded_pulses.shape[-1] + codebook.n))

    def run(key: int) -> int:
        return _key_errors(codebook, key, channel, gamma, trials, seeds[key], chunk)

    if workers > 1 and codebook.K > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            errors = list(executor.map(run, range(codebook.K)))
    else:
        errors = [run(key) for key in range(codebook.K)]

    summary = aggregate_key_statistics(
        {key: {"errors": e, "trials": trials} for key, e in enumerate(errors)}
    )
    if max_over_keys:
        rate = summary["max_error"]
        count = errors[summary["worst_key"]]
        total = trials
    else:
        rate = summary["average_error"]
        count = summary["total_errors"]
        total = summary["total_trials"]
    low, high = wilson_interval(count, total, confidence)
    logger.debug("monte carlo: errors=%s rate=%.6g", errors, rate)
    return MonteCarloResult(
        tuple(errors), trials, rate, low, high, binomial_sigma(rate, total), max_over_keys
    )


# ---------------------------------------------------------------------------
# Induced warden distribution and resolvability
# ---------------------------------------------------------------------------


def induced_output_distribution(
    codebook: Codebook, channel: CovertChannelPair, cap: int = DEFAULT_ENUMERATION_CAP
) -> FiniteDistribution:
    """P_hat_Z(z) = (1/MK) sum over codewords of W^n(z|x), over Z^n in lexicographic order."""
    k = len(channel.q0)
    size = k**codebook.n
    if size > cap:
        raise CombinatorialBlowup(f"|Z|^n = {size} exceeds enumeration cap {cap}")
    grid = np.indices((k,) * codebook.n).reshape(codebook.n, -1).T
    rows = np.stack([channel.q0.probs, channel.q1.probs])
    total = np.zeros(size)
    for s in range(codebook.K):
        for w in range(codebook.M):
            bits = codebook.codeword_bits(s, w)
            total += np.prod(rows[bits[None, :], grid], axis=1)
    probs = total / codebook.size
    labels = tuple(itertools.product(channel.q0.alphabet, repeat=codebook.n))
    return FiniteDistribution(labels, probs / probs.sum())


@dataclass(frozen=True)
class InformationTail:
    """Upper tail P{i(X;Z) > gamma} and how it was obtained.

    Attributes:
        value: Tail value (an upper bound unless method is "exact")
        method: "exact", "sup" or "hoeffding"
    """

    value: float
    method: str


def information_density_tail(
    channel: CovertChannelPair,
    params: PpmParams,
    gamma: float,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> InformationTail:
    """F_bar_XZ(gamma): exact when enumerable, else the sup bound, else Hoeffding."""
    try:
        return InformationTail(information_density_law(channel, params, cap).sf(gamma), "exact")
    except CombinatorialBlowup:
        pass
    if gamma >= information_density_sup(channel, params):
        return InformationTail(0.0, "sup")
    try:
        bound = f_xz_bound(channel, params.ell, gamma).bound
    except DomainError:
        bound = 1.0
    return InformationTail(min(1.0, bound), "hoeffding")


def resolvability_expectation_bound(
    gamma2: float,
    MK: Number,
    mu_Z_n: float,
    channel: CovertChannelPair,
    params: PpmParams,
    log_mu_Z_n: Optional[float] = None,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> float:
    """log(1/mu + 1) F_bar_XZ(gamma2) + e^{gamma2}/(MK).

    log_mu_Z_n, when given, replaces mu_Z_n (product minima underflow quickly).
    """
    if MK < 1:
        raise InvalidParams(f"MK must be >= 1, got {MK}")
    log_mu = log_mu_Z_n if log_mu_Z_n is not None else math.log(mu_Z_n)
    weight = float(np.logaddexp(-log_mu, 0.0))
    if gamma2 == -math.inf:
        return weight
    tail = information_density_tail(channel, params, gamma2, cap).value
    return weight * tail + safe_exp(gamma2 - log_of(MK))


def bounded_difference_constants(
    M_total: Number, alphabet_Z_size_n: Number, mu_Z_n: float
) -> Tuple[float, float]:
    """(c_tv, c_kl) = (1/M, (1/M) log(M |Z^n| / mu^2)) for swapping one codeword."""
    if M_total < 2:
        raise InvalidParams(f"bounded differences need M >= 2, got {M_total}")
    return bounded_difference_constants_log(
        log_of(M_total), log_of(alphabet_Z_size_n), math.log(mu_Z_n)
    )


def bounded_difference_constants_log(
    log_m: float, log_z_size: float, log_mu: float
) -> Tuple[float, float]:
    """bounded_difference_constants with every argument given as a log."""
    inv_m = math.exp(-log_m)
    return inv_m, inv_m * (log_m + log_z_size - 2.0 * log_mu)


def mcdiarmid_tail(lam: float, M_total: Number, c: float) -> float:
    """exp(-2 lambda^2 / (M c^2))."""
    if not c > 0:
        raise DomainError(f"bounded difference constant must be positive, got {c!r}")
    return math.exp(-2.0 * lam * lam / (float(M_total) * c * c))


# ---------------------------------------------------------------------------
# One-shot existence certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OneShotCertificate:
    """Numeric evaluation of the one-shot covert code existence bound.

    Attributes:
        gamma1: Decoder threshold
        gamma2: Resolvability threshold
        lambda1: Hoeffding slack of the reliability event
        lambda2: Markov factor of the reliability event
        lambda3: McDiarmid slack of the resolvability event
        reliability_bound: Error level of the reliability event
        resolvability_bound: Divergence level of the resolvability event
        existence_margin: Lower bound on P(both events); a code exists when > 0
    """

    gamma1: float
    gamma2: float
    lambda1: float
    lambda2: float
    lambda3: float
    reliability_bound: float
    resolvability_bound: float
    existence_margin: float

    @property
    def exists(self) -> bool:
        return self.existence_margin > 0


def existence_margin_log(
    log_m: float,
    log_k: float,
    lambdas: Tuple[float, float, float],
    log_z_size_n: float,
    log_mu_z_n: float,
) -> float:
    """max(base, 0)^K - exp(-2MK l3^2 / log^2(MK|Z^n|/mu^2)).

    base = 1 - e^{-2M l1^2} - 1/l2; every size is given as a log.
    """
    lambda1, lambda2, lambda3 = lambdas
    if lambda2 <= 1:
        raise InvalidParams(f"lambda2 must exceed 1, got {lambda2!r}")
    hoeffding = _exp_neg_scaled(log_m, 2.0 * lambda1 * lambda1)
    base = 1.0 - hoeffding - 1.0 / lambda2
    if base <= 0:
        first = 0.0
    else:
        first = safe_exp(math.exp(log_k) * math.log(base)) if log_k < 700 else 0.0
    log_arg = log_m + log_k + log_z_size_n - 2.0 * log_mu_z_n
    second = _exp_neg_scaled(log_m + log_k, 2.0 * lambda3 * lambda3 / log_arg**2)
    return first - second


def _exp_neg_scaled(log_x: float, scale: float) -> float:
    """exp(-scale * exp(log_x)) without overflow."""
    if scale <= 0:
        return 1.0
    return exp_neg_exp(log_x + math.log(scale))


def existence_certificate(
    M: Number,
    K: Number,
    lambdas: Tuple[float, float, float],
    gammas: Tuple[float, float],
    channel: CovertChannelPair,
    params: PpmParams,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> OneShotCertificate:
    """Evaluate both random-coding events for PPM input at the given constants.

    Uses the K-th power form of the final bound,
    (1 - e^{-2M l1^2} - 1/l2)^K - exp(-2MK l3^2 / log^2(MK|Z^n|/mu^2)).
    """
    lambda1, lambda2, lambda3 = lambdas
    gamma1, gamma2 = gammas
    log_m, log_k = log_of(M), log_of(K)
    log_mu = ppm_log_min_probability(channel, params, cap)
    log_z = params.n * math.log(len(channel.q0))
    margin = existence_margin_log(log_m, log_k, lambdas, log_z, log_mu)

    bounds = error_expectation_bounds(channel, params, M, gamma1, cap)
    reliability = bounds.eps1_expectation + lambda1 + lambda2 * bounds.eps2_bound
    resolvability = (
        resolvability_expectation_bound(
            gamma2, M * K, 0.0, channel, params, log_mu_Z_n=log_mu, cap=cap
        )
        + lambda3
    )
    return OneShotCertificate(
        gamma1, gamma2, lambda1, lambda2, lambda3, reliability, resolvability, margin
    )


# ---------------------------------------------------------------------------
# Asymptotic achievability conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    """One inequality of the achievability conditions.

    Attributes:
        name: positive_prob, F_Y, F_Z, dist_P_Z or quasi_metric
        lhs: Evaluated left-hand side
        rhs: Right-hand side
        passed: Whether the inequality holds
        slack: Positive when the inequality holds with room
        method: How lhs was obtained
        required: False for the informational quasi-metric line
    """

    name: str
    lhs: float
    rhs: float
    passed: bool
    slack: float
    method: str = "exact"
    required: bool = True


@dataclass(frozen=True)
class AchievabilityReport:
    n: int
    log_m: float
    log_k: float
    metric: str
    conditions: Tuple[ConditionResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions if c.required)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> Dict[str, Dict[str, object]]:
        return {
            c.name: {
                "lhs": c.lhs,
                "rhs": c.rhs,
                "passed": c.passed,
                "slack": c.slack,
                "method": c.method,
                "required": c.required,
            }
            for c in self.conditions
        }


def covertness_from_resolvability(
    metric_value_P_Z: float, kl_hat_to_P_Z: float, n: int, channel: CovertChannelPair
) -> float:
    """Bound d(P_hat_Z, Q0^n) from d(P_Z, Q0^n) and D(P_hat_Z || P_Z)."""
    log_min_q = n * math.log(channel.q0.support_min)
    return quasi_metric_bound_log(metric_value_P_Z, max(0.0, kl_hat_to_P_Z), log_min_q)


def _metric_value(
    metric: str,
    channel: CovertChannelPair,
    params: PpmParams,
    alpha: Optional[float],
    cap: int,
) -> Tuple[float, str]:
    if metric == "kl":
        return ppm_divergence_exact(channel, params, cap), "exact"
    if metric == "tv":
        return ppm_tv_bound(channel, params.n, params.ell).value, "bound"
    if metric == "beta":
        if alpha is None:
            raise InvalidParams("metric 'beta' needs alpha")
        beta = ppm_beta_bound(channel, params.n, params.ell, alpha).value
        return 1.0 - alpha - beta, "bound"
    raise InvalidParams(f"unknown metric {metric!r} (expected one of {', '.join(METRICS)})")


def achievability_conditions_log(
    n: int,
    log_m: float,
    log_k: float,
    metric: str,
    channel: CovertChannelPair,
    params: PpmParams,
    delta: float,
    epsilon: float,
    alpha: Optional[float] = None,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> AchievabilityReport:
    """Evaluate the four sufficient conditions with M = e^log_m and K = e^log_k.

    The constants are lambda1 = 1/n, lambda2 = n, lambda3 = 1/n^4,
    gamma1 = log(n^2 M) and gamma2 = log(MK / n^4).
    """
    log_n = math.log(n)
    log_mu = ppm_log_min_probability(channel, params, cap)
    conditions: List[ConditionResult] = []

    big_l = log_m + log_k + n * math.log(len(channel.q0)) - 2.0 * log_mu
    first = exp_neg_exp(math.log(2.0) + log_m - 8.0 * log_n - 2.0 * math.log(big_l))
    second = exp_neg_exp(math.log(2.0) + log_m - 2.0 * log_n)
    positive = 1.0 - first - second - 1.0 / n
    conditions.append(ConditionResult("positive_prob", positive, 0.0, positive > 0, positive))

    gamma1 = 2.0 * log_n + log_m
    try:
        f_y = receiver_llr_law(channel, params.ell, cap).cdf(gamma1)
        f_method = "exact"
    except CombinatorialBlowup:
        f_y = min(1.0, f_xy_bound(channel, params.ell, gamma1, exact=False).bound)
        f_method = "berry-esseen"
    ratio = safe_exp(log_ppm_ratio_expectation(channel, params))
    lhs = f_y + (1.0 + ratio) / n
    conditions.append(ConditionResult("F_Y", lhs, epsilon, lhs <= epsilon, epsilon - lhs, f_method))

    gamma2 = log_m + log_k - 4.0 * log_n
    tail = information_density_tail(channel, params, gamma2, cap)
    target = float(n) ** -6
    conditions.append(
        ConditionResult(
            "F_Z", tail.value, target, tail.value <= target, target - tail.value, tail.method
        )
    )

    value, method = _metric_value(metric, channel, params, alpha, cap)
    budget = delta - 1.0 / math.sqrt(n)
    conditions.append(
        ConditionResult("dist_P_Z", value, budget, value <= budget, budget - value, method)
    )

    kl_hat = (
        float(np.logaddexp(-log_mu, 0.0)) * tail.value
        + safe_exp(gamma2 - log_m - log_k)
        + float(n) ** -4
    )
    hat_value = covertness_from_resolvability(value, kl_hat, n, channel)
    conditions.append(
        ConditionResult(
            "quasi_metric",
            hat_value,
            delta,
            hat_value <= delta,
            delta - hat_value,
            "bound",
            required=False,
        )
    )
    report = AchievabilityReport(n, log_m, log_k, metric, tuple(conditions))
    logger.debug("achievability n=%d metric=%s: %s", n, metric, report.as_dict())
    return report


def verify_achievability_conditions(
    n: int,
    M_n: Number,
    K_n: Number,
    metric: str,
    channel: CovertChannelPair,
    params: PpmParams,
    delta: float,
    epsilon: float,
    alpha: Optional[float] = None,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> AchievabilityReport:
    """Pass/fail and slack for each sufficient condition; never raises on failure."""
    return achievability_conditions_log(
        n, log_of(M_n), log_of(K_n), metric, channel, params, delta, epsilon, alpha, cap
    )


# ---------------------------------------------------------------------------
# Dilution with all-zero codewords
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DilutionResult:
    """Diluted codebook and the error/divergence levels it is predicted to meet.

    Attributes:
        codebook: Codebook with N all-zero codewords appended to every key
        zero_codewords: N = ceil(alpha M)
        alpha_effective: N / M
        predicted_error: (eps' + alpha_effective) / (1 + alpha_effective), if eps' given
        predicted_kl: delta' / (1 + alpha_effective), if delta' given
    """

    codebook: Codebook
    zero_codewords: int
    alpha_effective: float
    predicted_error: Optional[float] = None
    predicted_kl: Optional[float] = None


def dilute_codebook(
    codebook: Codebook,
    alpha_fraction: float,
    epsilon_prime: Optional[float] = None,
    delta_prime: Optional[float] = None,
) -> DilutionResult:
    """Append ceil(alpha M) all-zero codewords to every key."""
    if alpha_fraction < 0 or not math.isfinite(alpha_fraction):
        raise DomainError(f"alpha must be nonnegative, got {alpha_fraction!r}")
    zeros = max(0, math.ceil(alpha_fraction * codebook.M - 1e-9))
    alpha_eff = zeros / codebook.M
    if zeros == 0:
        diluted = codebook
    else:
        table = tuple(sub + ((),) * zeros for sub in codebook.codewords)
        diluted = Codebook(codebook.n, codebook.M + zeros, codebook.K, table)
    return DilutionResult(
        diluted,
        zeros,
        alpha_eff,
        None if epsilon_prime is None else (epsilon_prime + alpha_eff) / (1.0 + alpha_eff),
        None if delta_prime is None else delta_prime / (1.0 + alpha_eff),
    )


def induced_kl_to_null(
    codebook: Codebook, channel: CovertChannelPair, cap: int = DEFAULT_ENUMERATION_CAP
) -> float:
    """D(P_hat_Z || Q0^n) by enumeration."""
    induced = induced_output_distribution(codebook, channel, cap)
    return kl_divergence(induced, channel.q0.power(codebook.n, cap))

"""The warden's side: the sum-of-A detector, weight-based converse bounds.

The detector thresholds S = sum_i A(Z_i), A = (Q1 - Q0)/Q0. Under Q0 its per-symbol
mean is 0 and variance chi2; a pulse position shifts the mean by chi2. Every bound
below is assembled from these moments and Berry-Esseen constants of the form 6 t / s^3.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import optimize

from .asymptotics import (
    ChannelConstants,
    SecondOrderEstimate,
    channel_constants,
    gamma_tv,
    lambda_upsilon,
)
from .dmc_core import (
    DEFAULT_TYPE_CLASS_CAP,
    CovertChannelPair,
    FiniteDistribution,
    SumDistribution,
    iid_sum_distribution,
    kl_divergence,
    q_function,
    q_inverse,
)
from .errors import (
    DegenerateVariance,
    DomainError,
    InfeasibleWeight,
    InvalidParams,
    PreconditionViolation,
)
from .ppm import ScoreA, score_a
from .utils import require_open_unit, require_positive

logger = logging.getLogger(__name__)

METRICS = ("kl", "tv", "beta")

FIXED_POINT_MAX_ITER = 200
FIXED_POINT_RTOL = 1e-12


@dataclass(frozen=True)
class DetectorSpec:
    """Threshold test T(z) = 1{sum_i A(z_i) > tau}.

    Attributes:
        score: Per-symbol score A
        tau: Threshold
    """

    score: ScoreA
    tau: float

    def __post_init__(self):
        if not math.isfinite(self.tau):
            raise DomainError(f"threshold must be finite, got {self.tau!r}")

    @classmethod
    def midpoint(cls, channel: CovertChannelPair, w: int) -> "DetectorSpec":
        """tau = (w/2) chi2, halfway between the null mean and a weight-w codeword's mean."""
        a = score_a(channel)
        return cls(a, 0.5 * w * a.chi2)

    def statistic(self, outputs: np.ndarray) -> np.ndarray:
        """Sum of A over the last axis of an array of warden output indices."""
        return self.score.values[np.asarray(outputs)].sum(axis=-1)

    def rejects(self, outputs: np.ndarray) -> np.ndarray:
        return self.statistic(outputs) > self.tau


@dataclass(frozen=True)
class RocPoint:
    """One operating point of the detector.

    Attributes:
        false_alarm: P{reject | Q0^n}
        missed_detection: P{accept | codeword}
        mode: "exact" or "berry_esseen"
    """

    false_alarm: float
    missed_detection: float
    mode: str

    def __post_init__(self):
        for name in ("false_alarm", "missed_detection"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value!r}")

    @property
    def tv_lower_bound(self) -> float:
        """1 - alpha - beta, a lower bound on the variational distance it witnesses."""
        return 1.0 - self.false_alarm - self.missed_detection


def detector_statistic_law(
    n: int, w: int, channel: CovertChannelPair, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> SumDistribution:
    """Exact law of sum_i A(Z_i) when a weight-w codeword is sent.

    The w pulse positions contribute an i.i.d. sum under Q1, the other n - w under Q0.

    Raises:
        CombinatorialBlowup: If either type-class enumeration exceeds cap
    """
    if not 0 <= w <= n:
        raise InvalidParams(f"need 0 <= w <= n, got w={w}, n={n}")
    a = score_a(channel)
    pulses = iid_sum_distribution(a.values, a.tilted, w, cap)
    silent = iid_sum_distribution(a.values, a.null, n - w, cap)
    return pulses.convolve(silent, cap)


# ---------------------------------------------------------------------------
# Detector constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectorConstants:
    """Berry-Esseen constants of the detector statistic.

    Attributes:
        b0: 6 t0 / sigma0^3, null hypothesis
        b1: Worst Berry-Esseen constant over mixed sums of w tilted and n - w null terms
        b2: sigma1 (sigma1^2 - sigma0^2) / (2 sigma0^3) when sigma1 >= sigma0, else 0
        b3: mu1 b2 / (2 sqrt(2 pi) sigma0)
        mu1: Mean of A under Q1 (= chi2)
        sigma0: Standard deviation of A under Q0 (= sqrt(chi2))
        formulas: Formula used for each constant
    """

    b0: float
    b1: float
    b2: float
    b3: float
    mu1: float
    sigma0: float
    formulas: Dict[str, str]

    def as_dict(self) -> Dict[str, float]:
        return {"B0": self.b0, "B1": self.b1, "B2": self.b2, "B3": self.b3}


def _mixed_berry_esseen(t0: float, t1: float, var0: float, var1: float) -> float:
    """max over f in [0,1] of 6 (t0 + f (t1 - t0)) / (var0 + f (var1 - var0))^{3/2}."""
    b, d = t1 - t0, var1 - var0

    def ratio(f: float) -> float:
        return 6.0 * (t0 + f * b) / (var0 + f * d) ** 1.5

    candidates = [0.0, 1.0]
    if b != 0.0 and abs(d) > 1e-12 * var0:
        critical = (b * var0 - 1.5 * t0 * d) / (0.5 * b * d)
        if 0.0 < critical < 1.0:
            candidates.append(critical)
    return max(ratio(f) for f in candidates)


def detector_constants(constants: ChannelConstants) -> DetectorConstants:
    """Assemble B0..B3 from the moments of A; each value is logged with its formula."""
    var0 = constants.chi2_q
    var1 = constants.sigma1_sq
    if var0 <= 0 or var1 <= 0:
        raise DegenerateVariance("A must have positive variance under Q0 and Q1")
    sigma0, sigma1 = math.sqrt(var0), math.sqrt(var1)
    mu1 = constants.chi2_q
    b0 = 6.0 * constants.t0 / sigma0**3
    b1 = _mixed_berry_esseen(constants.t0, constants.t1, var0, var1)
    b2 = sigma1 * (var1 - var0) / (2.0 * sigma0**3) if sigma1 >= sigma0 else 0.0
    b3 = mu1 * b2 / (2.0 * math.sqrt(2.0 * math.pi) * sigma0)
    formulas = {
        "B0": "6*t0/sigma0**3",
        "B1": "max_f 6*(t0+f*(t1-t0))/(sigma0**2+f*(sigma1**2-sigma0**2))**1.5",
        "B2": "sigma1*(sigma1**2-sigma0**2)/(2*sigma0**3) if sigma1>=sigma0 else 0",
        "B3": "mu1*B2/(2*sqrt(2*pi)*sigma0)",
    }
    for name, value in (("B0", b0), ("B1", b1), ("B2", b2), ("B3", b3)):
        logger.debug("%s = %s = %.6g", name, formulas[name], value)
    return DetectorConstants(b0, b1, b2, b3, mu1, sigma0, formulas)


def _detector_constants_for(channel: CovertChannelPair) -> Tuple[ScoreA, DetectorConstants]:
    return score_a(channel), detector_constants(channel_constants(channel))


# ---------------------------------------------------------------------------
# ROC
# ---------------------------------------------------------------------------


def _false_alarm_bound(n: int, tau: float, dc: DetectorConstants) -> float:
    return min(1.0, q_function(tau / (math.sqrt(n) * dc.sigma0)) + dc.b0 / math.sqrt(n))


def _missed_detection_chain(n: int, w: int, tau: float, dc: DetectorConstants) -> float:
    """Q((w mu1 - tau)/(sqrt(n) sigma0)) + B1/sqrt(n) + w^2 B3/n^{3/2}, valid for
    w mu1 / 2 <= tau <= w mu1."""
    x = (w * dc.mu1 - tau) / (math.sqrt(n) * dc.sigma0)
    value = q_function(x) + dc.b1 / math.sqrt(n) + w * w * dc.b3 / n**1.5
    return min(1.0, value)


def detector_beta_bound(
    n: int, w: int, channel: CovertChannelPair, tau: float
) -> float:
    """Berry-Esseen bound on the missed detection of one weight-w codeword at threshold tau.

    Uses the exact variance n sigma0^2 + w (sigma1^2 - sigma0^2) of the statistic.
    """
    if not 0 <= w <= n or n < 1:
        raise InvalidParams(f"need 0 <= w <= n and n >= 1, got w={w}, n={n}")
    a, dc = _detector_constants_for(channel)
    var1 = a.moment(2, tilted=True, central=True)
    std = math.sqrt(n * a.chi2 + w * (var1 - a.chi2))
    return min(1.0, q_function((w * dc.mu1 - tau) / std) + dc.b1 / math.sqrt(n))


def detector_roc(
    n: int,
    w_min: int,
    channel: CovertChannelPair,
    tau: Optional[float] = None,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> Tuple[RocPoint, RocPoint]:
    """Exact and Berry-Esseen operating points of the detector against a weight-w_min codeword.

    Args:
        n: Blocklength
        w_min: Codeword weight
        channel: Channel pair (only the warden side is used)
        tau: Threshold, default (w_min / 2) chi2
        cap: Type-class cap for the exact laws

    Returns:
        (exact point, bound point)
    """
    if not 0 < w_min <= n:
        raise InvalidParams(f"need 0 < w_min <= n, got w_min={w_min}, n={n}")
    if tau is None:
        detector = DetectorSpec.midpoint(channel, w_min)
    else:
        detector = DetectorSpec(score_a(channel), float(tau))
    null_law = detector_statistic_law(n, 0, channel, cap)
    alt_law = detector_statistic_law(n, w_min, channel, cap)
    exact = RocPoint(null_law.sf(detector.tau), alt_law.cdf(detector.tau), "exact")
    _, dc = _detector_constants_for(channel)
    if 0.5 * w_min * dc.mu1 <= detector.tau <= w_min * dc.mu1:
        missed = _missed_detection_chain(n, w_min, detector.tau, dc)
    else:
        missed = detector_beta_bound(n, w_min, channel, detector.tau)
    bound = RocPoint(_false_alarm_bound(n, detector.tau, dc), missed, "berry_esseen")
    return exact, bound


# ---------------------------------------------------------------------------
# Converse bounds from codeword weight
# ---------------------------------------------------------------------------


def tv_lower_bound_from_wmin(n: int, w_min: float, channel: CovertChannelPair) -> float:
    """1 - 2Q(w sqrt(chi2) / (2 sqrt n)) - (B0 + B1)/sqrt(n) - w^2 B3 / n^{3/2}.

    Lower-bounds V(P_Z, Q0^n) for any code whose codewords all weigh at least w_min.
    Not clipped: nonpositive values mean the bound is vacuous.
    """
    a, dc = _detector_constants_for(channel)
    return _tv_lower_bound(n, w_min, a.chi2, dc)


def _tv_lower_bound(n: float, w: float, chi2: float, dc: DetectorConstants) -> float:
    root_n = math.sqrt(n)
    return (
        1.0
        - 2.0 * q_function(w * math.sqrt(chi2) / (2.0 * root_n))
        - (dc.b0 + dc.b1) / root_n
        - w * w * dc.b3 / n**1.5
    )


def _beta_chain_constant(n: float, w: float, alpha: float, dc: DetectorConstants) -> float:
    lam = float(q_inverse(alpha - dc.b0 / math.sqrt(n)))
    return dc.b1 + dc.b0 * math.exp(lam * lam / 2.0) + 2.0 * dc.b3 * w * w / n


def beta_upper_bound_from_wmin(
    n: int, w_min: float, alpha: float, channel: CovertChannelPair
) -> float:
    """Q(w sqrt(chi2/n) - Q^-1(alpha)) + (B1 + B0 e^{lam^2/2})/sqrt(n) + 2 B3 w^2/n^{3/2}.

    Upper-bounds beta_alpha(Q0^n, P_Z) for codes whose codewords all weigh at least
    w_min. The test behind it rejects when S > sqrt(n) sigma0 lam with
    lam = Q^-1(alpha - B0/sqrt(n)). Returns 1 when that test is unavailable
    (alpha <= B0/sqrt(n) or alpha > 1/2) or the codeword mean sits below it.

    Raises:
        PreconditionViolation: If w_min <= sqrt(n) Q^-1(alpha) / sqrt(chi2)
    """
    require_open_unit(alpha, "alpha")
    a, dc = _detector_constants_for(channel)
    shift = w_min * math.sqrt(a.chi2 / n)
    if shift <= float(q_inverse(alpha)):
        raise PreconditionViolation(
            f"w_min={w_min} does not exceed sqrt(n) Q^-1(alpha)/sqrt(chi2) at n={n}"
        )
    root_n = math.sqrt(n)
    if alpha <= dc.b0 / root_n or alpha > 0.5:
        return 1.0
    lam = float(q_inverse(alpha - dc.b0 / root_n))
    if shift <= lam:
        return 1.0
    value = q_function(shift - float(q_inverse(alpha))) + _beta_chain_constant(
        n, w_min, alpha, dc
    ) / root_n
    return min(1.0, value)


@dataclass(frozen=True)
class ConverseBound:
    """Upper bound on log M for a code of weight w.

    Attributes:
        value: Bound in nats
        mode: "corrected" (Berry-Esseen term inside Q^-1) or "leading"
        w: Codeword weight
        b: Berry-Esseen constant 6 T_P / V_P^{3/2}
    """

    value: float
    mode: str
    w: float
    b: float


def converse_logM_from_weight(
    w: float,
    eps: float,
    constants: ChannelConstants,
    n: Optional[int] = None,
    strict: bool = False,
) -> ConverseBound:
    """log M <= w D_P + sqrt(w V_P) Q^-1(1 - eps - 2B/sqrt(w)) - log(B/sqrt(w)).

    When the corrected Q^-1 argument leaves (0, 1) the leading form with Q^-1(1 - eps)
    is returned and marked "leading", unless strict is set.

    Raises:
        InfeasibleWeight: strict and 1 - eps - 2B/sqrt(w) outside (0, 1)
    """
    require_open_unit(eps, "eps")
    if w < 1:
        raise InvalidParams(f"weight must be at least 1, got {w!r}")
    if n is not None and w > n:
        raise InvalidParams(f"weight {w} exceeds blocklength {n}")
    b = constants.berry_esseen_ratio
    argument = 1.0 - eps - 2.0 * b / math.sqrt(w)
    mode = "corrected"
    if not 0.0 < argument < 1.0:
        if strict:
            raise InfeasibleWeight(
                f"1 - eps - 2B/sqrt(w) = {argument:.6g} is outside (0, 1) at w={w}"
            )
        argument, mode = 1.0 - eps, "leading"
    value = (
        w * constants.d_p
        + math.sqrt(w * constants.v_p) * float(q_inverse(argument))
        - math.log(b / math.sqrt(w))
    )
    return ConverseBound(value, mode, w, b)


# ---------------------------------------------------------------------------
# Weight caps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightCap:
    """Largest codeword weight a covert code can afford.

    Attributes:
        cap: Absolute weight cap
        per_root_n: cap / sqrt(n)
        g: First-order limit of cap / sqrt(n)
        constant: Finite-n constant (B for relative entropy, the fixed point C otherwise)
        iterations: Fixed-point iterations used (0 for relative entropy)
    """

    cap: float
    per_root_n: float
    g: float
    constant: float
    iterations: int = 0

    def __float__(self) -> float:
        return self.cap


def _kl_weight(n: int, delta: float, constants: ChannelConstants) -> float:
    channel = constants.channel
    if channel is None:
        return math.sqrt(2.0 * n * delta / constants.chi2_q)
    if n * constants.d_q <= delta:
        return float(n)

    def excess(mu: float) -> float:
        mixed = FiniteDistribution.mixture([1.0 - mu, mu], [channel.q0, channel.q1])
        return n * kl_divergence(mixed, channel.q0) - delta

    return n * optimize.brentq(excess, 0.0, 1.0, xtol=1e-15, rtol=1e-13)


def weight_bound_D(delta: float, n: int, constants: ChannelConstants) -> WeightCap:
    """Weight cap under D(P_Z || Q0^n) <= delta.

    Solves n D((1 - mu) Q0 + mu Q1 || Q0) = delta for mu and returns n mu. The
    constant reported is B = sqrt(n) (cap / (g sqrt(n)) - 1), g = sqrt(2 delta / chi2).
    """
    require_positive(delta, "delta")
    if n < 1:
        raise InvalidParams(f"n must be positive, got {n}")
    g = math.sqrt(2.0 * delta / constants.chi2_q)
    cap = _kl_weight(n, delta, constants)
    root_n = math.sqrt(n)
    per_root_n = cap / root_n
    return WeightCap(cap, per_root_n, g, root_n * (per_root_n / g - 1.0))


def _fixed_point(step, start: float, what: str) -> Tuple[float, float, int]:
    """Iterate C -> step(C) (returning (C', A)) until C stabilizes."""
    c = start
    a = math.nan
    for iteration in range(1, FIXED_POINT_MAX_ITER + 1):
        c_next, a = step(c)
        if abs(c_next - c) <= FIXED_POINT_RTOL * max(1.0, abs(c)):
            return c_next, a, iteration
        c = c_next
    raise DomainError(f"{what}: fixed point did not converge after {FIXED_POINT_MAX_ITER} steps")


def _q_inverse_checked(argument: float, what: str) -> float:
    if not 0.0 < argument < 1.0:
        raise DomainError(f"{what}: Q^-1 argument {argument:.6g} is outside (0, 1)")
    return float(q_inverse(argument))


def weight_bound_V(
    delta: float, n: int, gamma: float, constants: ChannelConstants
) -> WeightCap:
    """Weight cap under V(P_Z, Q0^n) <= delta.

    At least a fraction gamma of the codewords weigh at most
    A sqrt(n), A = (2/sqrt(chi2)) Q^-1((1 - delta)/2 - C/sqrt(n) - gamma), where C is the
    fixed point of C = (B0 + B1 + B3 A(C)^2)/2.
    """
    require_open_unit(delta, "delta")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma!r}")
    dc = detector_constants(constants)
    scale = 2.0 / math.sqrt(constants.chi2_q)
    root_n = math.sqrt(n)

    def pulses(c: float) -> float:
        argument = (1.0 - delta) / 2.0 - c / root_n - gamma
        return scale * _q_inverse_checked(argument, "weight_bound_V")

    def step(c: float) -> Tuple[float, float]:
        a = pulses(c)
        return 0.5 * (dc.b0 + dc.b1 + dc.b3 * a * a), a

    c, _, iterations = _fixed_point(step, 0.5 * (dc.b0 + dc.b1), "weight_bound_V")
    a = pulses(c)
    g = scale * gamma_tv(delta)
    return WeightCap(a * root_n, a, g, c, iterations)


def weight_bound_beta(
    delta: float, alpha: float, n: int, gamma: float, constants: ChannelConstants
) -> WeightCap:
    """Weight cap under beta_alpha(Q0^n, P_Z) >= 1 - alpha - delta.

    At least a fraction gamma of the codewords weigh at most A sqrt(n),
    A = (Q^-1(1 - alpha - delta - C/sqrt(n) - gamma) + Q^-1(alpha)) / sqrt(chi2), with C the
    fixed point of C = B1 + B0 e^{lam^2/2} + 2 B3 A(C)^2.
    """
    require_open_unit(delta, "delta")
    require_open_unit(alpha, "alpha")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma!r}")
    dc = detector_constants(constants)
    root_n = math.sqrt(n)
    if alpha > 0.5 or alpha <= dc.b0 / root_n:
        raise DomainError(
            f"alpha={alpha!r} must lie in (B0/sqrt(n), 1/2] = ({dc.b0 / root_n:.4g}, 0.5]"
        )
    root_chi2 = math.sqrt(constants.chi2_q)
    upsilon = float(q_inverse(alpha))
    lam = float(q_inverse(alpha - dc.b0 / root_n))

    def pulses(c: float) -> float:
        argument = 1.0 - alpha - delta - c / root_n - gamma
        return (_q_inverse_checked(argument, "weight_bound_beta") + upsilon) / root_chi2

    def step(c: float) -> Tuple[float, float]:
        a = pulses(c)
        return dc.b1 + dc.b0 * math.exp(lam * lam / 2.0) + 2.0 * dc.b3 * a * a, a

    start = dc.b1 + dc.b0 * math.exp(lam * lam / 2.0)
    c, _, iterations = _fixed_point(step, start, "weight_bound_beta")
    # codewords lighter than lam sqrt(n)/sqrt(chi2) are outside the detector's reach
    a = max(pulses(c), lam / root_chi2)
    lam_1, ups = lambda_upsilon(delta, alpha)
    g = max(0.0, lam_1 + ups) / root_chi2
    return WeightCap(a * root_n, a, g, c, iterations)


def weight_cap(
    metric: str,
    n: int,
    delta: float,
    constants: ChannelConstants,
    alpha: Optional[float] = None,
    gamma: float = 0.0,
) -> WeightCap:
    """Dispatch to the weight cap of one metric (alpha defaults to (1 - delta)/2 for beta)."""
    if metric == "kl":
        return weight_bound_D(delta, n, constants)
    if metric == "tv":
        return weight_bound_V(delta, n, gamma, constants)
    if metric == "beta":
        alpha = (1.0 - delta) / 2.0 if alpha is None else alpha
        return weight_bound_beta(delta, alpha, n, gamma, constants)
    raise InvalidParams(f"unknown metric {metric!r}; expected one of {METRICS}")


def converse_secondorder(
    metric: str,
    n: int,
    eps: float,
    delta: float,
    alpha_opt: Optional[float],
    constants: ChannelConstants,
) -> SecondOrderEstimate:
    """g D_P sqrt(n) - sqrt(g V_P) Q^-1(eps) n^{1/4} + log(cap) for constant-composition codes.

    g is the first-order weight slope of the metric and cap its finite-n weight cap.
    The band runs from the expression without the log term to the full value.
    """
    require_open_unit(eps, "eps")
    cap = weight_cap(metric, n, delta, constants, alpha_opt)
    first = cap.g * constants.d_p * math.sqrt(n)
    second = -math.sqrt(cap.g * constants.v_p) * float(q_inverse(eps)) * n**0.25
    log_term = math.log(max(cap.cap, 1.0))
    value = first + second + log_term
    logger.debug("converse %s n=%d cap=%.6g value=%.6g", metric, n, cap.cap, value)
    return SecondOrderEstimate(value, first, second, first + second, value)


# ---------------------------------------------------------------------------
# All-codes first-order branch
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateLimit:
    """First-order limit of log M / sqrt(n) for a metric.

    Attributes:
        g: Weight slope g(delta)
        slope: g(delta) D_P
        gamma_n: Subset fraction max(sqrt(eps_n), 1/n), nan when eps_n or n is missing
    """

    g: float
    slope: float
    gamma_n: float


def first_order_rate_limit(
    metric: str,
    delta: float,
    constants: ChannelConstants,
    alpha: Optional[float] = None,
    eps_n: Optional[float] = None,
    n: Optional[int] = None,
) -> RateLimit:
    """g(delta) and g(delta) D_P for all codes; no finite-n constants are attached."""
    root_chi2 = math.sqrt(constants.chi2_q)
    if metric == "kl":
        require_positive(delta, "delta")
        g = math.sqrt(2.0 * delta / constants.chi2_q)
    elif metric == "tv":
        g = 2.0 * gamma_tv(delta) / root_chi2
    elif metric == "beta":
        alpha = (1.0 - delta) / 2.0 if alpha is None else alpha
        lam, ups = lambda_upsilon(delta, alpha)
        g = max(0.0, lam + ups) / root_chi2
    else:
        raise InvalidParams(f"unknown metric {metric!r}; expected one of {METRICS}")
    gamma_n = math.nan
    if eps_n is not None and n is not None:
        gamma_n = max(math.sqrt(eps_n), 1.0 / n)
    return RateLimit(g, g * constants.d_p, gamma_n)


def binary_entropy(p: float) -> float:
    """H_b(p) in nats."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log1p(-p)


def pigeonhole_logM_bound(
    n: int, g: float, log_M: float, log_K: float, log_D_size: float, eps_n: float
) -> float:
    """log M <= (sqrt(n) g + H_b(eta)) / (1 - eta) + log(MK/|D|), eta = (MK/|D|) eps_n.

    g is the first-order slope in nats per sqrt(n) of the light sub-codebook D.

    Raises:
        DomainError: If eta >= 1 or |D| > MK
    """
    excess = log_M + log_K - log_D_size
    if excess < 0:
        raise DomainError("the light subset D cannot exceed M K codewords")
    eta = math.exp(excess) * eps_n
    if not 0.0 <= eta < 1.0:
        raise DomainError(f"eta = (MK/|D|) eps_n = {eta:.6g} must lie in [0, 1)")
    return (math.sqrt(n) * g + binary_entropy(eta)) / (1.0 - eta) + excess

"""Channel constants, second-order expansions and blocklength planners.

Each planner picks the pulse count ell_n of a PPM input law so that the chosen
covertness metric stays below delta - 1/sqrt(n), then sets the message and key
lengths. The O(1) and O(log n) terms of the expansions carry no explicit constants,
so they are reported as labelled corrections or bands, never folded into values.

All lengths are in nats.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .dmc_core import (
    CovertChannelPair,
    GaussianMoments,
    chi_squared,
    kl_divergence,
    q_inverse,
)
from .errors import (
    AbsoluteContinuityViolation,
    ComplexRootRegime,
    DegenerateVariance,
    DomainError,
    InfeasibleBlocklength,
)
from .ppm import score_a
from .utils import require_open_unit, require_positive

logger = logging.getLogger(__name__)

DEFAULT_RHO = 0.1

PROVENANCE_BOUND = "bound"
PROVENANCE_GAUSSIAN = "gaussian-plan"


@dataclass(frozen=True)
class ChannelConstants:
    """Scalar constants of a channel pair.

    Attributes:
        d_p: D(P1||P0)
        v_p: Var of log(P1/P0)(Y) under P1
        t_p: E|log(P1/P0)(Y) - D_P|^3 under P1
        d_q: D(Q1||Q0)
        chi2_q: chi2(Q1||Q0)
        chi2_p: chi2(P1||P0)
        mu_z: Smallest positive probability among Q0 and Q1
        t0: E_{Q0}|A|^3
        kappa3: E_{Q0} A^3
        sigma1_sq: Var_{Q1} A
        t1: E_{Q1}|A - chi2_q|^3
        channel: The channel pair the constants were computed from
    """

    d_p: float
    v_p: float
    t_p: float
    d_q: float
    chi2_q: float
    chi2_p: float
    mu_z: float
    t0: float = 0.0
    kappa3: float = 0.0
    sigma1_sq: float = 0.0
    t1: float = 0.0
    channel: Optional[CovertChannelPair] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.v_p < 0:
            raise DomainError(f"V_P must be nonnegative, got {self.v_p!r}")
        if not self.chi2_q > 0:
            raise DomainError(f"chi2(Q1||Q0) must be positive, got {self.chi2_q!r}")

    @property
    def berry_esseen_ratio(self) -> float:
        """6 T_P / V_P^{3/2}."""
        if self.v_p <= 0:
            raise DegenerateVariance("V_P = 0: receiver LLR is deterministic")
        return 6.0 * self.t_p / self.v_p**1.5

    def as_dict(self) -> Dict[str, float]:
        return {
            "D_P": self.d_p,
            "V_P": self.v_p,
            "T_P": self.t_p,
            "D_Q": self.d_q,
            "chi2_Q": self.chi2_q,
            "chi2_P": self.chi2_p,
            "mu_Z": self.mu_z,
        }


def channel_constants(channel_pair: CovertChannelPair) -> ChannelConstants:
    """Exact finite-sum evaluation of every constant of the channel pair."""
    channel_pair.check_assumptions()
    receiver = GaussianMoments.from_score(channel_pair.llr_main(), channel_pair.p1)
    a = score_a(channel_pair)
    chi2_q = a.chi2
    return ChannelConstants(
        d_p=max(0.0, receiver.mean),
        v_p=receiver.variance,
        t_p=receiver.third_abs_central_moment,
        d_q=kl_divergence(channel_pair.q1, channel_pair.q0),
        chi2_q=chi2_q,
        chi2_p=chi_squared(channel_pair.p1, channel_pair.p0),
        mu_z=min(channel_pair.q0.support_min, channel_pair.q1.support_min),
        t0=a.abs_moment(3),
        kappa3=a.moment(3),
        sigma1_sq=a.moment(2, tilted=True, central=True),
        t1=a.abs_moment(3, tilted=True, central=True),
        channel=channel_pair,
    )


# ---------------------------------------------------------------------------
# Metric parameters and first-order slopes
# ---------------------------------------------------------------------------


def omega(delta: float, constants: ChannelConstants) -> float:
    """sqrt(2 delta / chi2): pulses per sqrt(n) under the relative entropy metric."""
    require_positive(delta, "delta")
    return math.sqrt(2.0 * delta / constants.chi2_q)


def gamma_tv(delta: float) -> float:
    """Gamma = Q^-1((1 - delta)/2)."""
    require_open_unit(delta, "delta")
    return float(q_inverse((1.0 - delta) / 2.0))


def lambda_upsilon(delta: float, alpha: float) -> Tuple[float, float]:
    """(Lambda, Upsilon) = (Q^-1(1 - alpha - delta), Q^-1(alpha))."""
    require_open_unit(alpha, "alpha")
    require_positive(delta, "delta")
    if alpha + delta >= 1.0:
        raise DomainError(f"need alpha + delta < 1, got {alpha + delta!r}")
    return float(q_inverse(1.0 - alpha - delta)), float(q_inverse(alpha))


def key_slope(pulse_slope: float, rho: float, constants: ChannelConstants) -> float:
    """First-order key length per sqrt(n): (1+rho) (ell/sqrt n) [D_Q - D_P]^+."""
    return (1.0 + rho) * pulse_slope * max(0.0, constants.d_q - constants.d_p)


@dataclass(frozen=True)
class FirstOrderSlopes:
    """Leading log M / sqrt(n) constants of the three metrics, with key slopes."""

    omega: float
    slope_d: float
    gamma: float
    slope_v: float
    lam: float
    upsilon: float
    slope_beta: float
    key_slope_d: float
    key_slope_v: float
    key_slope_beta: float

    def as_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


def first_order_slopes(
    delta: float, alpha: float, constants: ChannelConstants, rho: float = DEFAULT_RHO
) -> FirstOrderSlopes:
    """omega D_P, 2 Gamma D_P / sqrt(chi2) and (Lambda + Upsilon) D_P / sqrt(chi2)."""
    root_chi2 = math.sqrt(constants.chi2_q)
    w = omega(delta, constants)
    gamma = gamma_tv(delta)
    lam, ups = lambda_upsilon(delta, alpha)
    pulses_v = 2.0 * gamma / root_chi2
    pulses_b = max(0.0, lam + ups) / root_chi2
    return FirstOrderSlopes(
        omega=w,
        slope_d=w * constants.d_p,
        gamma=gamma,
        slope_v=pulses_v * constants.d_p,
        lam=lam,
        upsilon=ups,
        slope_beta=pulses_b * constants.d_p,
        key_slope_d=key_slope(w, rho, constants),
        key_slope_v=key_slope(pulses_v, rho, constants),
        key_slope_beta=key_slope(pulses_b, rho, constants),
    )


# ---------------------------------------------------------------------------
# Second-order expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecondOrderEstimate:
    """Two-term expansion with its O(log n) band.

    Attributes:
        value: a sqrt(n) - b n^{1/4}
        first_order: a sqrt(n)
        second_order: -b n^{1/4}
        band_low: value minus the achievability log term (2 log n)
        band_high: value plus the converse log term (log of the weight cap)
    """

    value: float
    first_order: float
    second_order: float
    band_low: float
    band_high: float


def _check_eps(eps: float) -> float:
    return require_open_unit(eps, "eps")


def second_order_D(
    n: float, eps: float, delta: float, constants: ChannelConstants
) -> SecondOrderEstimate:
    """sqrt(2 delta/chi2) D_P sqrt(n) - sqrt(sqrt(2 delta/chi2) V_P) Q^-1(eps) n^{1/4}."""
    _check_eps(eps)
    w = omega(delta, constants)
    first = w * constants.d_p * math.sqrt(n)
    second = -math.sqrt(w * constants.v_p) * float(q_inverse(eps)) * n**0.25
    value = first + second
    return SecondOrderEstimate(
        value,
        first,
        second,
        value - 2.0 * math.log(n),
        value + math.log(max(1.0, w * math.sqrt(n))),
    )


@dataclass(frozen=True)
class Envelope:
    """Upper and lower second-order envelopes (nats); lower may be -inf when degenerate."""

    upper: float
    lower: float


def second_order_V_envelopes(
    n: float, eps: float, delta: float, constants: ChannelConstants
) -> Envelope:
    """The two second-order displays for the variational distance metric."""
    _check_eps(eps)
    gamma = gamma_tv(delta)
    root_chi2 = math.sqrt(constants.chi2_q)
    pulses = 2.0 * gamma / root_chi2
    first = pulses * constants.d_p * math.sqrt(n)
    dispersion = math.sqrt(pulses * constants.v_p) * float(q_inverse(eps))
    upper = first - dispersion * n**0.25
    penalty = (
        2.0 * math.sqrt(math.pi) * math.exp(gamma * gamma / 2.0) * constants.d_p
        / (math.sqrt(gamma) * constants.chi2_q**0.25)
    )
    return Envelope(upper, first - (dispersion + penalty) * n**0.25)


def second_order_beta_envelopes(
    n: float, eps: float, delta: float, alpha: float, constants: ChannelConstants
) -> Envelope:
    """The two second-order displays for the beta metric (Lambda in the lower penalty)."""
    _check_eps(eps)
    lam, ups = lambda_upsilon(delta, alpha)
    spread = lam + ups
    if spread <= 0:
        return Envelope(0.0, -math.inf)
    root_chi2 = math.sqrt(constants.chi2_q)
    pulses = spread / root_chi2
    first = pulses * constants.d_p * math.sqrt(n)
    dispersion = math.sqrt(pulses * constants.v_p) * float(q_inverse(eps))
    upper = first - dispersion * n**0.25
    penalty = (
        math.sqrt(2.0 * math.pi)
        * (math.exp(lam * lam / 2.0) + math.exp(ups * ups / 2.0))
        * constants.d_p
        / (math.sqrt(spread) * constants.chi2_q**0.25)
    )
    return Envelope(upper, first - (dispersion + penalty) * n**0.25)


def cubic_root_trig(p: float, q: float) -> float:
    """Largest real root of x^3 - p x + q = 0 in the three-real-roots regime.

    x = 2 sqrt(p/3) cos(arccos(-(3q/(2p)) sqrt(3/p)) / 3).

    Raises:
        ComplexRootRegime: If p <= 0 or the arccos argument leaves [-1, 1]
    """
    if not p > 0:
        raise ComplexRootRegime(f"need p > 0 for three real roots, got p={p!r}")
    argument = -(3.0 * q / (2.0 * p)) * math.sqrt(3.0 / p)
    if abs(argument) > 1.0:
        raise ComplexRootRegime(f"arccos argument {argument!r} outside [-1, 1]")
    return 2.0 * math.sqrt(p / 3.0) * math.cos(math.acos(argument) / 3.0)


def cubic_residual(x: float, p: float, q: float) -> float:
    """Relative residual |x^3 - p x + q| / max(1, p^{3/2})."""
    return abs(x**3 - p * x + q) / max(1.0, p**1.5)


# ---------------------------------------------------------------------------
# Planners
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CodePlan:
    """Planned PPM code at one blocklength.

    Attributes:
        n: Blocklength
        ell_n: Pulse count
        log_m_n: Message length (nats)
        log_k_n: Key length (nats)
        metric: "kl", "tv" or "beta"
        corrections: Dropped terms not included in the values
        provenance: "bound" (Berry-Esseen corrected) or "gaussian-plan"
        parameters: Planner intermediates (omega, t, Gamma, cubic coefficients, ...)
        envelopes: Second-order envelopes for the tv and beta metrics
    """

    n: int
    ell_n: int
    log_m_n: float
    log_k_n: float
    metric: str
    corrections: Tuple[str, ...] = ()
    provenance: str = PROVENANCE_BOUND
    parameters: Dict[str, float] = field(default_factory=dict, compare=False)
    envelopes: Optional[Envelope] = None

    @property
    def log_mk(self) -> float:
        return self.log_m_n + self.log_k_n


def _message_length(
    n: int, ell: int, eps: float, constants: ChannelConstants, berry_esseen: bool
) -> Tuple[float, Tuple[str, ...]]:
    """ell D_P - sqrt(ell V_P) Q^-1(arg) - 2 log n with the corrected or Gaussian arg."""
    if constants.v_p <= 0:
        raise DegenerateVariance("V_P = 0: no message can be planned")
    corrections = ["O(1) terms of the expansion"]
    if berry_esseen:
        argument = eps - (1.0 + constants.berry_esseen_ratio) / math.sqrt(ell)
        if argument <= 0:
            raise InfeasibleBlocklength(
                f"Q^-1 argument eps - (1 + 6T/V^1.5)/sqrt(ell) = {argument:.6g} <= 0 "
                f"at n={n}, ell={ell}"
            )
    else:
        argument = eps
        corrections.append("Berry-Esseen term (1 + 6T_P/V_P^1.5)/sqrt(ell) in Q^-1 argument")
    log_m = (
        ell * constants.d_p
        - math.sqrt(ell * constants.v_p) * float(q_inverse(argument))
        - 2.0 * math.log(n)
    )
    return log_m, tuple(corrections)


def key_length(log_m: float, ell: int, rho: float, constants: ChannelConstants) -> float:
    """log K = max(log M, (1+rho) ell D_Q) - log M."""
    return max(log_m, (1.0 + rho) * ell * constants.d_q) - log_m


def _finish(
    n: int,
    ell: int,
    eps: float,
    rho: float,
    constants: ChannelConstants,
    metric: str,
    berry_esseen: bool,
    parameters: Dict[str, float],
    envelopes: Optional[Envelope] = None,
    extra: Sequence[str] = (),
) -> CodePlan:
    require_positive(rho, "rho")
    log_m, corrections = _message_length(n, ell, eps, constants, berry_esseen)
    plan = CodePlan(
        n=n,
        ell_n=ell,
        log_m_n=log_m,
        log_k_n=key_length(log_m, ell, rho, constants),
        metric=metric,
        corrections=tuple(extra) + corrections,
        provenance=PROVENANCE_BOUND if berry_esseen else PROVENANCE_GAUSSIAN,
        parameters=parameters,
        envelopes=envelopes,
    )
    logger.debug("plan %s n=%d ell=%d log M=%.6g", metric, n, ell, log_m)
    return plan


def plan_D(
    n: int,
    eps: float,
    delta: float,
    rho: float = DEFAULT_RHO,
    constants: Optional[ChannelConstants] = None,
    berry_esseen: bool = True,
) -> CodePlan:
    """Relative entropy planner: ell_n = floor(omega sqrt(n) - t).

    t is the smallest nonnegative integer with ell^2 chi2 / (2n) <= delta - 1/sqrt(n).

    Raises:
        InfeasibleBlocklength: If delta <= 1/sqrt(n), ell_n < 1 or the Q^-1 argument <= 0
    """
    if constants is None:
        raise DomainError("plan_D needs channel constants")
    _check_eps(eps)
    w = omega(delta, constants)
    budget = delta - 1.0 / math.sqrt(n)
    if budget <= 0:
        raise InfeasibleBlocklength(f"delta={delta!r} <= 1/sqrt(n) at n={n}")
    center = w * math.sqrt(n)
    t = max(0, math.ceil(center - math.sqrt(2.0 * n * budget / constants.chi2_q)))
    while t > 0 and (math.floor(center - t + 1)) ** 2 * constants.chi2_q / (2.0 * n) <= budget:
        t -= 1
    while math.floor(center - t) ** 2 * constants.chi2_q / (2.0 * n) > budget:
        t += 1
    ell = math.floor(center - t)
    if ell < 1:
        raise InfeasibleBlocklength(f"no pulse fits the divergence budget at n={n}")
    return _finish(
        n, ell, eps, rho, constants, "kl", berry_esseen, {"omega": w, "t": float(t)}
    )


def _require_null_dominated(constants: ChannelConstants) -> None:
    if constants.channel is not None and not constants.channel.warden_null_dominates:
        raise AbsoluteContinuityViolation("this planner needs Q0 << Q1")


def plan_V(
    n: int,
    eps: float,
    delta: float,
    rho: float = DEFAULT_RHO,
    constants: Optional[ChannelConstants] = None,
    berry_esseen: bool = True,
) -> CodePlan:
    """Variational distance planner; sqrt(ell_n) is the root of
    x^3 - 2 Gamma sqrt(n/chi2) x + 2 sqrt(2 pi) e^{Gamma^2/2} sqrt(n/chi2) = 0.
    """
    if constants is None:
        raise DomainError("plan_V needs channel constants")
    _check_eps(eps)
    _require_null_dominated(constants)
    gamma = gamma_tv(delta)
    scale = math.sqrt(n / constants.chi2_q)
    p = 2.0 * gamma * scale
    q = 2.0 * math.sqrt(2.0 * math.pi) * math.exp(gamma * gamma / 2.0) * scale
    ell = math.floor(cubic_root_trig(p, q) ** 2)
    if ell < 1:
        raise InfeasibleBlocklength(f"cubic root gives no pulse at n={n}")
    return _finish(
        n,
        ell,
        eps,
        rho,
        constants,
        "tv",
        berry_esseen,
        {"Gamma": gamma, "p": p, "q": q},
        second_order_V_envelopes(n, eps, delta, constants),
    )


def plan_beta(
    n: int,
    eps: float,
    delta: float,
    alpha: float,
    rho: float = DEFAULT_RHO,
    constants: Optional[ChannelConstants] = None,
    berry_esseen: bool = True,
) -> CodePlan:
    """Beta planner; sqrt(ell_n) is the root of
    x^3 - (Lambda+Upsilon) s x + sqrt(2 pi)(e^{Lambda^2/2} + e^{Upsilon^2/2}) s, s = sqrt(n/chi2).

    When Lambda + Upsilon <= 0 the first-order pulse budget is zero; the plan then uses a
    single pulse and says so in its corrections.
    """
    if constants is None:
        raise DomainError("plan_beta needs channel constants")
    _check_eps(eps)
    _require_null_dominated(constants)
    lam, ups = lambda_upsilon(delta, alpha)
    envelopes = second_order_beta_envelopes(n, eps, delta, alpha, constants)
    scale = math.sqrt(n / constants.chi2_q)
    p = (lam + ups) * scale
    q = math.sqrt(2.0 * math.pi) * (math.exp(lam * lam / 2.0) + math.exp(ups * ups / 2.0)) * scale
    parameters = {"Lambda": lam, "Upsilon": ups, "p": p, "q": q}
    if p <= 0:
        return _finish(
            n, 1, eps, rho, constants, "beta", berry_esseen, parameters, envelopes,
            ("Lambda + Upsilon <= 0: pulse count capped at 1",),
        )
    ell = math.floor(cubic_root_trig(p, q) ** 2)
    if ell < 1:
        raise InfeasibleBlocklength(f"cubic root gives no pulse at n={n}")
    return _finish(n, ell, eps, rho, constants, "beta", berry_esseen, parameters, envelopes)


def asymptote_gap(plan: CodePlan, slope: float) -> float:
    """Relative gap (slope - log M / sqrt(n)) / slope of a plan to its first-order slope."""
    return (slope - plan.log_m_n / math.sqrt(plan.n)) / slope


# ---------------------------------------------------------------------------
# Metric ordering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderingReport:
    """First-order slopes compared along M_D(delta) <= M_V(sqrt(delta/2)) <= min_a M_beta."""

    n: float
    eps: float
    delta: float
    slope_d: float
    slope_v: float
    slope_beta_min: float
    alpha_star: float
    holds: bool
    ratio_v_d: float

    def as_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


def metric_ordering_check(
    n: float,
    eps: float,
    delta: float,
    constants: ChannelConstants,
    alphas: Optional[Sequence[float]] = None,
    rtol: float = 1e-9,
) -> OrderingReport:
    """Check slope_D(delta) <= slope_V(sqrt(delta/2)) <= min over alpha of slope_beta.

    The slopes are first-order quantities, so n and eps are only echoed in the report.
    The alpha grid always includes the symmetric point (1 - delta')/2.
    """
    require_positive(delta, "delta")
    tv_delta = math.sqrt(delta / 2.0)
    root_chi2 = math.sqrt(constants.chi2_q)
    slope_d = omega(delta, constants) * constants.d_p
    slope_v = 2.0 * gamma_tv(tv_delta) / root_chi2 * constants.d_p
    grid = np.linspace(0.01, 0.99, 99) * (1.0 - tv_delta) if alphas is None else np.asarray(alphas)
    grid = np.append(grid, (1.0 - tv_delta) / 2.0)
    best_alpha, best = math.nan, math.inf
    for alpha in grid:
        if not 0.0 < alpha < 1.0 - tv_delta:
            continue
        lam, ups = lambda_upsilon(tv_delta, float(alpha))
        slope = max(0.0, lam + ups) / root_chi2 * constants.d_p
        if slope < best:
            best, best_alpha = slope, float(alpha)
    tol = rtol * max(1.0, abs(slope_v))
    holds = slope_d <= slope_v + tol and slope_v <= best + tol
    ratio = slope_v / slope_d if slope_d > 0 else math.nan
    return OrderingReport(n, eps, delta, slope_d, slope_v, best, best_alpha, holds, ratio)

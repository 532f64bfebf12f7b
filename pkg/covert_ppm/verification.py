"""Verification suites: exact oracles, concentration bounds, converse sandwich and moments.

Each suite returns a report dictionary with one entry per check. A check carries the
measured value, the reference it is compared against, a signed slack (positive when the
check holds with room) and a pass flag. Suites never raise on a failed check.
"""

import logging
import math
from typing import Any, Callable, Dict, Iterable, List, Optional

import numpy as np

from .adversary import converse_secondorder, detector_roc
from .asymptotics import (
    channel_constants,
    plan_beta,
    plan_D,
    plan_V,
    second_order_beta_envelopes,
    second_order_D,
    second_order_V_envelopes,
)
from .coding import (
    bounded_difference_constants_log,
    error_expectation_bounds,
    generate_codebook,
    induced_output_distribution,
    mcdiarmid_tail,
)
from .config import SUITES, ExperimentConfig
from .dmc_core import (
    CovertChannelPair,
    FiniteDistribution,
    GaussianMoments,
    berry_esseen_bound,
    iid_sum_distribution,
    kl_divergence,
    neyman_pearson,
    q_function,
    random_distribution,
    total_variation,
)
from .errors import (
    ComplexRootRegime,
    CovertError,
    DomainError,
    InfeasibleBlocklength,
    UnknownSuite,
)
from .ppm import (
    EXACT_IDENTITY_FIELDS,
    f_xy_bound,
    f_xz_bound,
    make_ppm,
    ppm_divergence_exact,
    ppm_exact_metrics,
    ppm_moments,
    ppm_output_distribution,
    ppm_ratio_expectation,
)

logger = logging.getLogger(__name__)

LogCallback = Callable[[str, str], None]

EXACT_TOL = 1e-10
ENUMERATION_BUDGET = 4096
RANDOM_CHANNELS = 20
PPM_BETA_ALPHAS = (0.05, 0.21, 0.5, 0.83)
SANDWICH_GRID = (10**3, 10**4, 10**5, 10**6)
MOMENT_WINDOWS = (1, 2, 3, 5, 8, 13)
MCDIARMID_CODEBOOKS = 200
MCDIARMID_LEVEL = 0.1


def _check(
    name: str,
    value: float,
    reference: float,
    slack: float,
    required: bool = True,
    **details: Any,
) -> Dict[str, Any]:
    entry = {
        "name": name,
        "value": value,
        "reference": reference,
        "slack": slack,
        "passed": bool(slack >= 0),
        "required": required,
    }
    entry.update(details)
    return entry


def _close(name: str, value: float, reference: float, tol: float = EXACT_TOL, **details):
    return _check(name, value, reference, tol - abs(value - reference), **details)


def _at_most(name: str, value: float, bound: float, tol: float = 0.0, **details):
    return _check(name, value, bound, bound + tol - value, **details)


def _skipped(name: str, reason: str) -> Dict[str, Any]:
    return {"name": name, "skipped": True, "reason": reason, "passed": True, "required": False}


def random_channel_pair(rng: np.random.Generator, max_outputs: int = 4) -> CovertChannelPair:
    """A channel pair with Dirichlet rows over 2..max_outputs output symbols."""
    k_y = int(rng.integers(2, max_outputs + 1))
    k_z = int(rng.integers(2, max_outputs + 1))
    rows = [random_distribution(rng, k_y) for _ in range(2)]
    rows += [random_distribution(rng, k_z) for _ in range(2)]
    return CovertChannelPair(*rows)


def _default_channel(config: ExperimentConfig) -> CovertChannelPair:
    return config.channel()


# ---------------------------------------------------------------------------
# exact-oracles
# ---------------------------------------------------------------------------


def _beta_breakpoint_checks(rng: np.random.Generator) -> List[Dict[str, Any]]:
    """Likelihood-ratio beta equals the exhaustive search at every LR breakpoint."""
    checks = []
    for trial in range(10):
        size = int(rng.integers(2, 13))
        p = random_distribution(rng, size)
        q = random_distribution(rng, size)
        order = np.argsort(-(q.probs / p.probs), kind="mergesort")
        for alpha in np.cumsum(p.probs[order])[:-1]:
            greedy = neyman_pearson(float(alpha), p, q, "likelihood_ratio").beta
            exhaustive = neyman_pearson(float(alpha), p, q, "exhaustive").beta
            checks.append(
                _close(f"beta_lr_vs_subset[{trial}]", greedy, exhaustive, alpha=float(alpha))
            )
    return checks


def _ppm_enumeration_checks(rng: np.random.Generator) -> List[Dict[str, Any]]:
    """Block-structure KL, TV and beta equal the full |Z|^n enumeration."""
    checks = []
    for index in range(RANDOM_CHANNELS):
        channel = random_channel_pair(rng)
        k = len(channel.q0)
        n = min(10, int(math.log(ENUMERATION_BUDGET) / math.log(k) + 1e-9))
        ell = int(rng.integers(1, min(3, n) + 1))
        params = make_ppm(n, ell)
        full = ppm_output_distribution(channel, params)
        null = channel.q0.power(n)
        exact = ppm_exact_metrics(channel, params)
        tag = f"channel={index},n={n},ell={ell}"
        checks.append(_close(f"ppm_kl[{tag}]", exact.kl, kl_divergence(full, null)))
        checks.append(_close(f"ppm_tv[{tag}]", exact.tv, total_variation(full, null)))
        if not channel.warden_null_dominates:
            continue
        for alpha in PPM_BETA_ALPHAS:
            beta = ppm_exact_metrics(channel, params, alpha=alpha).beta
            expected = neyman_pearson(alpha, null, full, "likelihood_ratio").beta
            checks.append(_close(f"ppm_beta[{tag}]", beta, expected, alpha=alpha))
    return checks


def _receiver_oracle_checks(config: ExperimentConfig) -> List[Dict[str, Any]]:
    """Ratio expectation and eps1 against brute force on the receiver channel."""
    base = CovertChannelPair.bsc(config.p_m, config.p_w)
    receiver_only = CovertChannelPair(base.p0, base.p1, base.p0, base.p1)
    params = make_ppm(8, 2)
    p_y = ppm_output_distribution(receiver_only, params)
    brute_ratio = float(np.sum(p_y.probs**2 / base.p0.power(params.n).probs))
    exact_ratio = ppm_ratio_expectation(base, params).exact
    checks = [_close("ratio_expectation[8,2]", exact_ratio, brute_ratio)]

    gamma = 1.0
    llr = base.llr_main()
    brute_eps1 = 0.0
    for y1 in range(len(base.p1)):
        for y2 in range(len(base.p1)):
            if llr[y1] + llr[y2] <= gamma + 1e-12:
                brute_eps1 += base.p1.probs[y1] * base.p1.probs[y2]
    eps1 = error_expectation_bounds(base, params, 4, gamma).eps1_expectation
    checks.append(_close("eps1[8,2,M=4,gamma=1]", eps1, brute_eps1))
    return checks


def suite_exact_oracles(seed: int, config: ExperimentConfig) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return (
        _beta_breakpoint_checks(rng)
        + _ppm_enumeration_checks(rng)
        + _receiver_oracle_checks(config)
    )


# ---------------------------------------------------------------------------
# concentration
# ---------------------------------------------------------------------------


def _berry_esseen_checks(rng: np.random.Generator) -> List[Dict[str, Any]]:
    """sup |P{S >= x} - Q((x - ES)/sigma)| over atoms stays below 6T/sigma^3."""
    checks = []
    for trial in range(5):
        size = int(rng.integers(2, 5))
        base = random_distribution(rng, size)
        score = rng.normal(size=size)
        per_summand = GaussianMoments.from_score(score, base)
        if per_summand.variance <= 1e-12:
            continue
        for count in (1, 2, 4, 8, 12):
            law = iid_sum_distribution(score, base, count)
            moments = per_summand.iid(count)
            lam = (law.values - moments.mean) / moments.std
            gaussian = q_function(lam)
            tail_ge = np.cumsum(law.probs[::-1])[::-1]
            tail_gt = tail_ge - law.probs
            deviation = float(
                max(np.max(np.abs(tail_ge - gaussian)), np.max(np.abs(tail_gt - gaussian)))
            )
            checks.append(
                _at_most(
                    f"berry_esseen[{trial},count={count}]",
                    deviation,
                    berry_esseen_bound(moments),
                )
            )
    return checks


def _divergence_inequality_checks(rng: np.random.Generator) -> List[Dict[str, Any]]:
    """Pinsker and alpha + beta >= 1 - V on random pairs."""
    checks = []
    for trial in range(10):
        size = int(rng.integers(2, 7))
        p = random_distribution(rng, size)
        q = random_distribution(rng, size)
        tv = total_variation(p, q)
        checks.append(
            _at_most(f"pinsker[{trial}]", tv, math.sqrt(kl_divergence(p, q) / 2.0), 1e-12)
        )
        for alpha in (0.05, 0.2, 0.5):
            result = neyman_pearson(alpha, p, q)
            checks.append(
                _check(
                    f"alpha_plus_beta[{trial},alpha={alpha}]",
                    result.false_alarm + result.beta,
                    1.0 - tv,
                    result.false_alarm + result.beta - (1.0 - tv) + 1e-12,
                )
            )
    return checks


def _tail_bound_checks(channel: CovertChannelPair) -> List[Dict[str, Any]]:
    """Analytic information-density tails dominate their exact values."""
    constants = channel_constants(channel)
    ell = 8
    gamma = ell * constants.d_p - 2.0 * math.sqrt(ell * constants.v_p)
    f_xy = f_xy_bound(channel, ell, gamma)
    checks = [_at_most("f_xy_tail[ell=8]", float(f_xy.exact), f_xy.bound, 1e-12)]
    params = make_ppm(40, 4)
    gamma2 = params.ell * constants.d_q + 0.5
    f_xz = f_xz_bound(channel, params.ell, gamma2, params)
    checks.append(_at_most("f_xz_tail[n=40,ell=4]", float(f_xz.exact), f_xz.bound, 1e-12))
    return checks


def _mcdiarmid_check(rng: np.random.Generator, channel: CovertChannelPair) -> Dict[str, Any]:
    """Upper deviation frequency of V(P_hat_Z, P_Z) over random codebooks."""
    params = make_ppm(8, 2)
    M = 8
    target = ppm_output_distribution(channel, params)
    values = np.array(
        [
            total_variation(
                induced_output_distribution(generate_codebook(params, M, 1, rng), channel),
                target,
            )
            for _ in range(MCDIARMID_CODEBOOKS)
        ]
    )
    log_z = params.n * math.log(len(channel.q0))
    c_tv, _ = bounded_difference_constants_log(math.log(M), log_z, 0.0)
    lam = math.sqrt(-math.log(MCDIARMID_LEVEL) * M * c_tv * c_tv / 2.0)
    bound = mcdiarmid_tail(lam, M, c_tv)
    frequency = float(np.mean(values >= values.mean() + lam))
    sigma = math.sqrt(bound * (1.0 - bound) / MCDIARMID_CODEBOOKS)
    return _at_most(
        "mcdiarmid_tv[n=8,ell=2,M=8]", frequency, bound, 3.0 * sigma, lam=lam, codebooks=len(values)
    )


def suite_concentration(seed: int, config: ExperimentConfig) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    channel = _default_channel(config)
    return (
        _berry_esseen_checks(rng)
        + _divergence_inequality_checks(rng)
        + _tail_bound_checks(channel)
        + [_mcdiarmid_check(rng, channel)]
    )


# ---------------------------------------------------------------------------
# sandwich
# ---------------------------------------------------------------------------


def _roc_checks(rng: np.random.Generator, channels: Iterable[CovertChannelPair]):
    """Exact detector 1 - alpha - beta never exceeds the exact codebook TV."""
    checks = []
    for index, channel in enumerate(channels):
        null_cache: Dict[int, FiniteDistribution] = {}
        for n in (6, 8, 10, 12):
            null = null_cache.setdefault(n, channel.q0.power(n))
            for ell in (1, 2, 3):
                params = make_ppm(n, ell)
                codebook = generate_codebook(params, int(rng.integers(2, 5)), 1, rng)
                tv = total_variation(induced_output_distribution(codebook, channel), null)
                exact, _ = detector_roc(n, ell, channel)
                checks.append(
                    _at_most(
                        f"detector_vs_tv[channel={index},n={n},w={ell}]",
                        exact.tv_lower_bound,
                        tv,
                        1e-12,
                    )
                )
    return checks


def _achievable_side(metric: str, n: int, config: ExperimentConfig, constants):
    """Planner log M_n, or the second-order lower display when no plan exists."""
    c = config
    try:
        if metric == "kl":
            return plan_D(n, c.epsilon, c.delta, c.rho, constants, False).log_m_n, "plan"
        if metric == "tv":
            return plan_V(n, c.epsilon, c.delta, c.rho, constants, False).log_m_n, "plan"
        return plan_beta(n, c.epsilon, c.delta, c.alpha, c.rho, constants, False).log_m_n, "plan"
    except (ComplexRootRegime, InfeasibleBlocklength) as e:
        logger.debug("sandwich n=%d %s: %s, using the lower display", n, metric, e)
    if metric == "kl":
        return second_order_D(n, c.epsilon, c.delta, constants).band_low, "envelope"
    if metric == "tv":
        return second_order_V_envelopes(n, c.epsilon, c.delta, constants).lower, "envelope"
    return second_order_beta_envelopes(n, c.epsilon, c.delta, c.alpha, constants).lower, "envelope"


def _planner_converse_checks(config: ExperimentConfig) -> List[Dict[str, Any]]:
    constants = channel_constants(_default_channel(config))
    checks = []
    for n in SANDWICH_GRID:
        for metric in ("kl", "tv", "beta"):
            name = f"plan_vs_converse[{metric},n={n}]"
            alpha = config.alpha if metric == "beta" else None
            try:
                converse = converse_secondorder(
                    metric, n, config.epsilon, config.delta, alpha, constants
                ).value
            except DomainError as e:
                checks.append(_skipped(name, f"no converse: {e}"))
                continue
            achievable, source = _achievable_side(metric, n, config, constants)
            checks.append(_at_most(name, achievable, converse, source=source))
    return checks


def suite_sandwich(seed: int, config: ExperimentConfig) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    channels = (_default_channel(config), CovertChannelPair.bsc(config.p_m, 0.2))
    return _roc_checks(rng, channels) + _planner_converse_checks(config)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def suite_moments(seed: int, config: ExperimentConfig) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    channels = {
        "default": _default_channel(config),
        "bsc(0.11,0.3)": CovertChannelPair.bsc(0.11, 0.3),
        "random": random_channel_pair(rng, 3),
    }
    checks = []
    for label, channel in channels.items():
        for m in MOMENT_WINDOWS:
            report = ppm_moments(channel, m)
            tag = f"{label},m={m}"
            for tilted in (False, True):
                exact = (report.tilted if tilted else report.null).as_dict()
                closed = (report.closed_tilted if tilted else report.closed_null).as_dict()
                law = "ppm" if tilted else "null"
                for field_name in EXACT_IDENTITY_FIELDS:
                    tol = EXACT_TOL * max(1.0, abs(closed[field_name]))
                    checks.append(
                        _close(
                            f"{field_name}[{law},{tag}]",
                            exact[field_name],
                            closed[field_name],
                            tol,
                        )
                    )
                gap = exact["e_c"] - closed["e_c"]
                checks.append(
                    _check(f"e_c_gap_m2[{law},{tag}]", gap * m * m, 0.0, 0.0, required=False)
                )
            sign = report.e_c_sign
            e_c = report.tilted.e_c
            checks.append(_check(f"e_c_sign[null,{tag}]", sign, -1, -sign - 1))
            checks.append(_check(f"e_c_positive[ppm,{tag}]", e_c, 0.0, e_c))
            divergence = ppm_divergence_exact(channel, make_ppm(2 * m, 2))
            checks.append(_close(f"divergence_vs_e_c[{tag}]", divergence, 2.0 * e_c))
    return checks


SUITE_RUNNERS = {
    "exact-oracles": suite_exact_oracles,
    "concentration": suite_concentration,
    "sandwich": suite_sandwich,
    "moments": suite_moments,
}


def run_verification(
    suite_name: str,
    seed: int = 0,
    config: Optional[ExperimentConfig] = None,
    log_callback: Optional[LogCallback] = None,
) -> Dict[str, Any]:
    """Run one suite and return its report.

    Raises:
        UnknownSuite: If suite_name is not one of SUITES
    """
    runner = SUITE_RUNNERS.get(suite_name)
    if runner is None:
        raise UnknownSuite(suite_name, SUITES)
    config = config or ExperimentConfig()
    try:
        checks = runner(seed, config)
        error = None
    except CovertError as e:
        checks, error = [], str(e)
        logger.error("suite %s aborted: %s", suite_name, e)
    failed = [c["name"] for c in checks if c["required"] and not c["passed"]]
    slacks = [c["slack"] for c in checks if "slack" in c and c["required"]]
    passed = error is None and not failed
    report = {
        "suite": suite_name,
        "seed": seed,
        "passed": passed,
        "checks": checks,
        "failed": failed,
        "error": error,
        "min_slack": min(slacks) if slacks else None,
    }
    message = f"suite {suite_name}: {len(checks)} checks, {len(failed)} failed"
    if log_callback is not None:
        log_callback(message, "INFO" if passed else "WARNING")
    else:
        logger.info(message)
    return report


def run_suites(
    config: ExperimentConfig, log_callback: Optional[LogCallback] = None
) -> Dict[str, Any]:
    """Run config.suites in order under config.seed."""
    reports = {
        name: run_verification(name, config.seed, config, log_callback) for name in config.suites
    }
    return {
        "seed": config.seed,
        "passed": all(r["passed"] for r in reports.values()),
        "suites": reports,
    }

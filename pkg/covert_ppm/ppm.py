"""Pulse-position modulation input law and its induced output statistics.

An (n, ell)-PPM codeword splits the first m*ell positions into ell contiguous
windows of m = n // ell positions and places exactly one pulse, uniformly, in each
window; the r = n mod ell trailing positions stay at the innocent symbol. The induced
warden output law P_Z^{n,ell} is therefore a product of ell identical block laws
P_Z^{m,1} and Q0^r, and everything below exploits that product structure.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import special

from .dmc_core import (
    DEFAULT_ENUMERATION_CAP,
    DEFAULT_TYPE_CLASS_CAP,
    CovertChannelPair,
    FiniteDistribution,
    GaussianMoments,
    SumDistribution,
    chi_squared,
    compositions,
    iid_sum_distribution,
    kl_divergence,
    neyman_pearson_classes,
    q_function,
    q_inverse,
    type_class_count,
)
from .errors import (
    AbsoluteContinuityViolation,
    CombinatorialBlowup,
    DegenerateVariance,
    DomainError,
    InvalidParams,
)

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator, None]

RESIDUAL_SQRT_N = "O(1/sqrt(n))"

# Rounding grid for pooling sequence classes.
CLASS_KEY_QUANTUM = 1e-11


@dataclass(frozen=True)
class PpmParams:
    """Blocklength and pulse count of a PPM input law.

    Attributes:
        n: Blocklength
        ell: Number of pulses (windows)
        m: Window size n // ell
        r: Number of trailing innocent positions n mod ell
    """

    n: int
    ell: int
    m: int = field(init=False)
    r: int = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and isinstance(self.ell, (int, np.integer))):
            raise InvalidParams("n and ell must be integers")
        if not 1 <= self.ell <= self.n:
            raise InvalidParams(f"need 1 <= ell <= n, got n={self.n}, ell={self.ell}")
        object.__setattr__(self, "m", int(self.n) // int(self.ell))
        object.__setattr__(self, "r", int(self.n) % int(self.ell))

    @property
    def support_size(self) -> int:
        return self.m**self.ell

    @property
    def in_regime(self) -> bool:
        """Whether ell = Theta(m) plausibly holds (ell no larger than 4 m)."""
        return self.ell <= 4 * self.m

    def windows(self) -> Tuple[Tuple[int, int], ...]:
        """1-based inclusive (first, last) position of each window."""
        return tuple((i * self.m + 1, (i + 1) * self.m) for i in range(self.ell))

    def window_offsets(self) -> np.ndarray:
        return np.arange(self.ell, dtype=np.int64) * self.m


def make_ppm(n: int, ell: int) -> PpmParams:
    """Validated (n, ell)-PPM parameters."""
    return PpmParams(int(n), int(ell))


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_ppm_codewords(params: PpmParams, count: int, rng_seed: SeedLike) -> np.ndarray:
    """count i.i.d. PPM codewords as a (count, ell) array of sorted 1-based positions."""
    rng = _generator(rng_seed)
    draws = rng.integers(0, params.m, size=(count, params.ell), dtype=np.int64)
    return draws + params.window_offsets() + 1


def sample_ppm_codeword(params: PpmParams, rng_seed: SeedLike) -> Tuple[int, ...]:
    """One PPM codeword: one uniform pulse per window, reproducible for a fixed seed."""
    return tuple(int(i) for i in sample_ppm_codewords(params, 1, rng_seed)[0])


def ppm_support(params: PpmParams, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Every PPM codeword, as an (m**ell, ell) array of 1-based positions."""
    if params.support_size > cap:
        raise CombinatorialBlowup(f"PPM support {params.support_size} exceeds cap {cap}")
    choices = np.array(list(itertools.product(range(params.m), repeat=params.ell)), dtype=np.int64)
    return choices.reshape(-1, params.ell) + params.window_offsets() + 1


# ---------------------------------------------------------------------------
# Warden score A(z) = (Q1(z) - Q0(z)) / Q0(z)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScoreA:
    """Per-symbol likelihood-ratio increment of the warden channel.

    Attributes:
        alphabet: Warden output alphabet
        values: A(z), 0 on symbols outside the support of Q0
        null: Q0
        tilted: Q1
    """

    alphabet: Tuple
    values: np.ndarray
    null: FiniteDistribution
    tilted: FiniteDistribution

    @property
    def chi2(self) -> float:
        return float(np.dot(self.null.probs, self.values**2))

    def moment(self, order: int, tilted: bool = False, central: bool = False) -> float:
        dist = self.tilted if tilted else self.null
        values = self.values
        if central:
            values = values - float(np.dot(dist.probs, values))
        return float(np.dot(dist.probs, values**order))

    def abs_moment(self, order: int, tilted: bool = False, central: bool = False) -> float:
        dist = self.tilted if tilted else self.null
        values = self.values
        if central:
            values = values - float(np.dot(dist.probs, values))
        return float(np.dot(dist.probs, np.abs(values) ** order))

    def gaussian_moments(self, tilted: bool = False) -> GaussianMoments:
        return GaussianMoments.from_score(self.values, self.tilted if tilted else self.null)


def score_a(channel: CovertChannelPair) -> ScoreA:
    """A(z) for the warden channel; needs Q1 << Q0."""
    q0, q1 = channel.q0.probs, channel.q1.probs
    if np.any((q0 <= 0) & (q1 > 0)):
        raise AbsoluteContinuityViolation("A(z) needs Q1 << Q0")
    values = np.where(q0 > 0, (q1 - q0) / np.where(q0 > 0, q0, 1.0), 0.0)
    return ScoreA(channel.q0.alphabet, values, channel.q0, channel.q1)


def _require_null_dominated(channel: CovertChannelPair, what: str) -> None:
    if not channel.warden_null_dominates:
        raise AbsoluteContinuityViolation(f"{what} needs Q0 << Q1")


# ---------------------------------------------------------------------------
# Ratio expectation at the legitimate receiver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PpmRatioExpectation:
    """E_{P_Y}[P_Y / Q_Y] for PPM input, with Q_Y = P0^n.

    Attributes:
        exact: (1 + chi2(P1||P0)/m)^ell
        bound: exp(ell (ell + 1) chi2 / n)
        bound_in_regime: True when r <= m, where bound >= exact is guaranteed
    """

    exact: float
    bound: float
    bound_in_regime: bool


def ppm_ratio_expectation(channel: CovertChannelPair, params: PpmParams) -> PpmRatioExpectation:
    """Second moment of the PPM output likelihood ratio at the receiver."""
    chi2 = chi_squared(channel.p1, channel.p0)
    log_exact = params.ell * math.log1p(chi2 / params.m)
    log_bound = params.ell * (params.ell + 1) * chi2 / params.n
    return PpmRatioExpectation(
        exact=math.exp(min(log_exact, 709.0)),
        bound=math.exp(min(log_bound, 709.0)),
        bound_in_regime=params.r <= params.m,
    )


def log_ppm_ratio_expectation(channel: CovertChannelPair, params: PpmParams) -> float:
    """log of the exact ratio expectation (no overflow for large ell)."""
    return params.ell * math.log1p(chi_squared(channel.p1, channel.p0) / params.m)


# ---------------------------------------------------------------------------
# Exact output distributions (small n)
# ---------------------------------------------------------------------------


def _sequence_indices(k: int, length: int, cap: int) -> np.ndarray:
    size = k**length
    if size > cap:
        raise CombinatorialBlowup(f"{k}^{length} = {size} sequences exceeds cap {cap}")
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.indices((k,) * length).reshape(length, -1).T
    return grid.astype(np.int64)


def ppm_block_distribution(
    channel: CovertChannelPair, m: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> FiniteDistribution:
    """P_Z^{m,1}: warden output of a single window of m positions carrying one pulse."""
    a = score_a(channel)
    k = len(a.alphabet)
    idx = _sequence_indices(k, m, cap)
    q0 = channel.q0.probs
    null = np.prod(q0[idx], axis=1)
    ratio = 1.0 + a.values[idx].sum(axis=1) / m
    probs = np.clip(null * ratio, 0.0, None)
    labels = tuple(itertools.product(a.alphabet, repeat=m))
    return FiniteDistribution(labels, probs / probs.sum())


def ppm_output_distribution(
    channel: CovertChannelPair, params: PpmParams, cap: int = DEFAULT_ENUMERATION_CAP
) -> FiniteDistribution:
    """P_Z^{n,ell} over Z^n, built as (P_Z^{m,1})^ell x Q0^r."""
    k = len(channel.q0)
    if k**params.n > cap:
        raise CombinatorialBlowup(f"|Z|^n = {k ** params.n} exceeds cap {cap}")
    block = ppm_block_distribution(channel, params.m, cap).probs
    probs = np.ones(1)
    for _ in range(params.ell):
        probs = np.multiply.outer(probs, block).ravel()
    for _ in range(params.r):
        probs = np.multiply.outer(probs, channel.q0.probs).ravel()
    labels = tuple(itertools.product(channel.q0.alphabet, repeat=params.n))
    return FiniteDistribution(labels, probs / probs.sum())


# ---------------------------------------------------------------------------
# Block log-likelihood ratio C = log(1 + B), B = (1/m) sum A(Z_j)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockLlrLaw:
    """Laws of C = log dP_Z^{m,1}/dQ0^m over one window.

    Attributes:
        m: Window size
        null: Law of C under Q0^m (None when Q0 is not dominated by Q1)
        ppm: Law of C under the PPM block law
    """

    m: int
    null: Optional[SumDistribution]
    ppm: SumDistribution


def _sum_a_null(a: ScoreA, count: int, cap: int) -> SumDistribution:
    return iid_sum_distribution(a.values, a.null, count, cap)


def _sum_a_tilted(a: ScoreA, m: int, cap: int) -> SumDistribution:
    """Law of A(Z~) + sum of m-1 null scores, Z~ ~ Q1 (the PPM block, by symmetry)."""
    pulse = iid_sum_distribution(a.values, a.tilted, 1, cap)
    return _sum_a_null(a, m - 1, cap).convolve(pulse, cap)


def _to_block_llr(law: SumDistribution, m: int) -> SumDistribution:
    values = np.log1p(law.values / m)
    return SumDistribution.from_atoms(values, law.probs.copy(), 1)


def _atom_distribution(law: SumDistribution) -> FiniteDistribution:
    """The atoms of a law as a distribution over their indices."""
    return FiniteDistribution(tuple(range(len(law))), law.probs / law.probs.sum())


def _ppm_block_llr(channel: CovertChannelPair, m: int, cap: int) -> SumDistribution:
    return _to_block_llr(_sum_a_tilted(score_a(channel), m, cap), m)


def ppm_block_llr_law(
    channel: CovertChannelPair, m: int, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> BlockLlrLaw:
    """Exact laws of the per-window log-likelihood ratio under Q0^m and under PPM.

    Raises:
        AbsoluteContinuityViolation: If Q0 << Q1 fails (the null law has -inf atoms)
        CombinatorialBlowup: If a type enumeration exceeds cap
    """
    if m < 1:
        raise InvalidParams(f"window size must be positive, got {m}")
    _require_null_dominated(channel, "the null block law")
    a = score_a(channel)
    null = _to_block_llr(_sum_a_null(a, m, cap), m)
    ppm = _to_block_llr(_sum_a_tilted(a, m, cap), m)
    return BlockLlrLaw(m, null, ppm)


def ppm_divergence_exact(
    channel: CovertChannelPair, params: PpmParams, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> float:
    """D(P_Z^{n,ell} || Q0^n) = ell * D(P_Z^{m,1} || Q0^m), exactly."""
    block = _ppm_block_llr(channel, params.m, cap)
    return params.ell * max(0.0, block.mean)


def ppm_block_divergence(
    channel: CovertChannelPair, m: int, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> float:
    """D(P_Z^{m,1} || Q0^m)."""
    return max(0.0, _ppm_block_llr(channel, m, cap).mean)


@dataclass(frozen=True)
class PpmExactMetrics:
    """Exact covertness metrics of the PPM output law against Q0^n.

    Attributes:
        kl: D(P_Z^{n,ell} || Q0^n)
        tv: V(P_Z^{n,ell}, Q0^n)
        beta: beta_alpha(Q0^n, P_Z^{n,ell}) from the likelihood-ratio search
            (None when alpha is not given)
        false_alarm: False alarm achieved by the beta test
    """

    kl: float
    tv: float
    beta: Optional[float] = None
    false_alarm: Optional[float] = None


def ppm_llr_laws(
    channel: CovertChannelPair, params: PpmParams, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> Tuple[SumDistribution, Optional[SumDistribution]]:
    """Laws of log dP_Z^{n,ell}/dQ0^n under P_Z^{n,ell} and (when finite) under Q0^n."""
    a = score_a(channel)
    block_ppm = _to_block_llr(_sum_a_tilted(a, params.m, cap), params.m)
    block_fd = _atom_distribution(block_ppm)
    total_ppm = iid_sum_distribution(block_ppm.values, block_fd, params.ell, cap)
    if not channel.warden_null_dominates:
        return total_ppm, None
    block_null = _to_block_llr(_sum_a_null(a, params.m, cap), params.m)
    null_fd = _atom_distribution(block_null)
    total_null = iid_sum_distribution(block_null.values, null_fd, params.ell, cap)
    return total_ppm, total_null


@dataclass(frozen=True, eq=False)
class SequenceClasses:
    """Output sequences of Z^n grouped by PPM log-likelihood ratio and Q0^n mass.

    Attributes:
        llr: log dP_Z^{n,ell}/dQ0^n shared by the sequences of a class
        log_null: log Q0^n of one sequence of the class
        multiplicity: Number of sequences in the class (float, exact below 2**53)
    """

    llr: np.ndarray
    log_null: np.ndarray
    multiplicity: np.ndarray

    def __len__(self) -> int:
        return int(self.llr.size)

    @property
    def null_mass(self) -> np.ndarray:
        """Q0^n mass of one sequence of each class."""
        return np.exp(self.log_null)

    @property
    def alt_mass(self) -> np.ndarray:
        """P_Z^{n,ell} mass of one sequence of each class."""
        return np.exp(self.log_null + self.llr)


def _merge_classes(
    llr: np.ndarray, log_null: np.ndarray, multiplicity: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    keys = np.stack(
        [np.round(llr / CLASS_KEY_QUANTUM), np.round(log_null / CLASS_KEY_QUANTUM)], axis=1
    )
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    merged = np.bincount(inverse, weights=multiplicity)
    return llr[first], log_null[first], merged


def _type_classes(
    scores: np.ndarray, log_q0: np.ndarray, length: int, cap: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(summed score, log Q0 of one sequence, multiplicity) per type of a length."""
    n_types = type_class_count(length, scores.size)
    if n_types > cap:
        raise CombinatorialBlowup(
            f"{n_types} types of length {length} over {scores.size} symbols exceeds cap {cap}"
        )
    counts = compositions(length, scores.size)
    log_mult = special.gammaln(length + 1) - special.gammaln(counts + 1).sum(axis=1)
    return counts @ scores, counts @ log_q0, np.rint(np.exp(log_mult))


def _combine_classes(
    left: Tuple[np.ndarray, np.ndarray, np.ndarray],
    right: Tuple[np.ndarray, np.ndarray, np.ndarray],
    cap: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    size = left[0].size * right[0].size
    if size > cap:
        raise CombinatorialBlowup(f"{size} sequence classes exceeds cap {cap}")
    llr = np.add.outer(left[0], right[0]).ravel()
    log_null = np.add.outer(left[1], right[1]).ravel()
    multiplicity = np.multiply.outer(left[2], right[2]).ravel()
    return _merge_classes(llr, log_null, multiplicity)


def ppm_sequence_classes(
    channel: CovertChannelPair, params: PpmParams, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> SequenceClasses:
    """Classes of interchangeable sequences for tests of Q0^n against P_Z^{n,ell}.

    Sequences sharing both the log-likelihood ratio and the Q0^n mass are
    interchangeable for any deterministic test; the r trailing positions change
    the mass but never the ratio.

    Raises:
        CombinatorialBlowup: If a type enumeration or the class count exceeds cap
    """
    a = score_a(channel)
    mask = a.null.probs > 0
    scores = a.values[mask]
    log_q0 = np.log(a.null.probs[mask])
    sums, block_null, block_mult = _type_classes(scores, log_q0, params.m, cap)
    with np.errstate(divide="ignore"):
        block_llr = np.log1p(np.clip(sums / params.m, -1.0, None))
    block = _merge_classes(block_llr, block_null, block_mult)
    classes = (np.zeros(1), np.zeros(1), np.ones(1))
    for _ in range(params.ell):
        classes = _combine_classes(classes, block, cap)
    if params.r:
        _, tail_null, tail_mult = _type_classes(scores, log_q0, params.r, cap)
        tail = _merge_classes(np.zeros(tail_null.size), tail_null, tail_mult)
        classes = _combine_classes(classes, tail, cap)
    return SequenceClasses(*classes)


def ppm_exact_metrics(
    channel: CovertChannelPair,
    params: PpmParams,
    alpha: Optional[float] = None,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> PpmExactMetrics:
    """Exact D, V and beta_alpha of P_Z^{n,ell} versus Q0^n from the block LLR law.

    The log-likelihood ratio S is a sufficient statistic, so D = E_P[S] and
    V = E_P[(1 - e^{-S})^+].
    beta runs the likelihood-ratio search of neyman_pearson over sequence classes, so
    it equals that search on the enumerated Q0^n and P_Z^{n,ell} for every alpha.
    """
    total_ppm, total_null = ppm_llr_laws(channel, params, cap)
    kl = max(0.0, total_ppm.mean)
    tv = min(1.0, max(0.0, total_ppm.expectation(lambda s: np.clip(-np.expm1(-s), 0.0, None))))
    if alpha is None:
        return PpmExactMetrics(kl, tv)
    if total_null is None:
        raise AbsoluteContinuityViolation("beta_alpha of the PPM law needs Q0 << Q1")
    classes = ppm_sequence_classes(channel, params, cap)
    result = neyman_pearson_classes(
        alpha, classes.null_mass, classes.alt_mass, classes.multiplicity
    )
    return PpmExactMetrics(kl, tv, result.beta, result.false_alarm)


# ---------------------------------------------------------------------------
# Leading-term bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PpmBound:
    """A leading-term bound whose O(1/sqrt(n)) remainder is not evaluated.

    Attributes:
        value: Leading-term value (clipped to [0, 1] for V and beta)
        residual: Order of the unevaluated remainder
        in_regime: False when ell is much larger than m
    """

    value: float
    residual: str = RESIDUAL_SQRT_N
    in_regime: bool = True


def _regime(n: int, ell: int) -> bool:
    return ell == 0 or ell <= 4 * (n // ell)


def ppm_divergence_bound(channel: CovertChannelPair, n: int, ell: int) -> PpmBound:
    """ell^2 chi2(Q1||Q0) / (2n)."""
    chi2 = chi_squared(channel.q1, channel.q0)
    return PpmBound(ell * ell * chi2 / (2.0 * n), in_regime=_regime(n, ell))


def ppm_tv_bound(channel: CovertChannelPair, n: int, ell: int) -> PpmBound:
    """1 - 2Q((ell/2) sqrt(chi2/n)) + 2/sqrt(ell), clipped to [0, 1]."""
    _require_null_dominated(channel, "the variational PPM bound")
    chi2 = chi_squared(channel.q1, channel.q0)
    slack = math.inf if ell == 0 else 2.0 / math.sqrt(ell)
    value = 1.0 - 2.0 * q_function(0.5 * ell * math.sqrt(chi2 / n)) + slack
    return PpmBound(min(1.0, max(0.0, value)), in_regime=_regime(n, ell))


def ppm_beta_bound(channel: CovertChannelPair, n: int, ell: int, alpha: float) -> PpmBound:
    """Q(ell sqrt(chi2/n) - Q^-1(alpha + 1/sqrt(ell))) - 1/sqrt(ell), clipped to [0, 1]."""
    _require_null_dominated(channel, "the beta PPM bound")
    slack = math.inf if ell == 0 else 1.0 / math.sqrt(ell)
    if not 0.0 < alpha + slack < 1.0:
        raise DomainError(f"alpha + 1/sqrt(ell) = {alpha + slack!r} must lie in (0, 1)")
    chi2 = chi_squared(channel.q1, channel.q0)
    value = q_function(ell * math.sqrt(chi2 / n) - q_inverse(alpha + slack)) - slack
    return PpmBound(min(1.0, max(0.0, value)), in_regime=_regime(n, ell))


# ---------------------------------------------------------------------------
# Moments of B and C
# ---------------------------------------------------------------------------

MOMENT_FIELDS = ("e_b", "e_b2", "e_b3", "e_b4", "e_c", "var_c", "third_abs_c")
EXACT_IDENTITY_FIELDS = ("e_b", "e_b2", "e_b3", "e_b4")
LEADING_ORDER = {"e_c": 2, "var_c": 2, "third_abs_c": 2}


@dataclass(frozen=True)
class PpmMoments:
    """Moments of B = (1/m) sum A(Z_j) and C = log(1 + B) over one window."""

    e_b: float
    e_b2: float
    e_b3: float
    e_b4: float
    e_c: float
    var_c: float
    third_abs_c: float

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in MOMENT_FIELDS}


@dataclass(frozen=True)
class PpmMomentsReport:
    """Exact and closed-form window moments under Q0^m and under the PPM block law.

    Attributes:
        m: Window size
        null: Exact moments under Q0^m
        tilted: Exact moments under the PPM block law
        closed_null: Closed forms under Q0^m (exact identities for B, leading terms for C)
        closed_tilted: Closed forms under the PPM block law
        e_c_sign: Sign of the exact null mean of C (-1, 0 or 1)
    """

    m: int
    null: PpmMoments
    tilted: PpmMoments
    closed_null: PpmMoments
    closed_tilted: PpmMoments
    e_c_sign: int

    def gaps(self, tilted: bool = False) -> Dict[str, float]:
        exact = (self.tilted if tilted else self.null).as_dict()
        closed = (self.closed_tilted if tilted else self.closed_null).as_dict()
        return {name: exact[name] - closed[name] for name in MOMENT_FIELDS}


def _moments_from_sum(law: SumDistribution, m: int) -> PpmMoments:
    b = law.values / m
    c = np.log1p(b)
    p = law.probs
    e_c = float(np.dot(p, c))
    return PpmMoments(
        e_b=float(np.dot(p, b)),
        e_b2=float(np.dot(p, b**2)),
        e_b3=float(np.dot(p, b**3)),
        e_b4=float(np.dot(p, b**4)),
        e_c=e_c,
        var_c=float(np.dot(p, (c - e_c) ** 2)),
        third_abs_c=float(np.dot(p, np.abs(c - e_c) ** 3)),
    )


def ppm_moments(
    channel: CovertChannelPair, m: int, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> PpmMomentsReport:
    """Exact window moments by type enumeration next to their closed forms."""
    if m < 1:
        raise InvalidParams(f"window size must be positive, got {m}")
    _require_null_dominated(channel, "window moments")
    a = score_a(channel)
    null = _moments_from_sum(_sum_a_null(a, m, cap), m)
    tilted = _moments_from_sum(_sum_a_tilted(a, m, cap), m)

    chi2 = a.chi2
    k3 = a.moment(3)
    k4 = a.moment(4)
    t2, t3, t4 = a.moment(2, tilted=True), a.moment(3, tilted=True), a.moment(4, tilted=True)
    var_c = chi2 / m
    third_abs = 2.0 * math.sqrt(2.0 / math.pi) * var_c**1.5
    closed_null = PpmMoments(
        e_b=0.0,
        e_b2=chi2 / m,
        e_b3=k3 / m**2,
        e_b4=(k4 + 3.0 * (m - 1) * chi2**2) / m**3,
        e_c=-chi2 / (2.0 * m),
        var_c=var_c,
        third_abs_c=third_abs,
    )
    closed_tilted = PpmMoments(
        e_b=chi2 / m,
        e_b2=((m - 1) * chi2 + t2) / m**2,
        e_b3=(t3 + 3.0 * (m - 1) * chi2**2 + (m - 1) * k3) / m**3,
        e_b4=(
            t4
            + 6.0 * t2 * (m - 1) * chi2
            + 4.0 * chi2 * (m - 1) * k3
            + (m - 1) * k4
            + 3.0 * (m - 1) * (m - 2) * chi2**2
        )
        / m**4,
        e_c=chi2 / (2.0 * m),
        var_c=var_c,
        third_abs_c=third_abs,
    )
    sign = int(np.sign(null.e_c)) if abs(null.e_c) > 1e-300 else 0
    return PpmMomentsReport(m, null, tilted, closed_null, closed_tilted, sign)


# ---------------------------------------------------------------------------
# Information-density tails
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailBound:
    """Analytic bound on an information-density tail next to its exact value.

    Attributes:
        bound: Analytic bound
        exact: Exact tail from the enumerated law (None when not computed)
    """

    bound: float
    exact: Optional[float] = None


def _receiver_llr_moments(channel: CovertChannelPair) -> GaussianMoments:
    return GaussianMoments.from_score(channel.llr_main(), channel.p1)


def receiver_llr_law(
    channel: CovertChannelPair, ell: int, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> SumDistribution:
    """Law of i(X;Y) = sum over the ell pulses of log(P1/P0)(Y_i), Y_i ~ P1."""
    return iid_sum_distribution(channel.llr_main(), channel.p1, ell, cap)


def f_xy_bound(
    channel: CovertChannelPair,
    ell: int,
    gamma: float,
    exact: bool = True,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> TailBound:
    """Bound on F_{XY|Q_Y}(gamma) = P{i(X;Y) <= gamma} for PPM input, Q_Y = P0^n.

    bound = Q((ell D_P - gamma)/sqrt(ell V_P)) + 6 T_P / (sqrt(ell) V_P^{3/2}).
    """
    if ell < 1:
        raise DomainError(f"ell must be positive, got {ell}")
    moments = _receiver_llr_moments(channel)
    if moments.variance <= 0:
        raise DegenerateVariance("receiver LLR has zero variance (P1 == P0)")
    d_p, v_p, t_p = moments.mean, moments.variance, moments.third_abs_central_moment
    bound = q_function((ell * d_p - gamma) / math.sqrt(ell * v_p)) + 6.0 * t_p / (
        math.sqrt(ell) * v_p**1.5
    )
    exact_tail = None
    if exact:
        try:
            exact_tail = receiver_llr_law(channel, ell, cap).cdf(gamma)
        except CombinatorialBlowup:
            logger.debug("f_xy_bound: exact tail skipped for ell=%d", ell)
    return TailBound(bound, exact_tail)


def warden_mu(channel: CovertChannelPair) -> float:
    """mu_Z: smallest positive probability among Q0 and Q1."""
    return min(channel.q0.support_min, channel.q1.support_min)


def _block_density_law(channel: CovertChannelPair, m: int, cap: int) -> SumDistribution:
    """Law of log W(Z|x)/P_Z^{m,1}(Z) over one window under the joint PPM law."""
    a = score_a(channel)
    rest = _sum_a_null(a, m - 1, cap)
    llr = channel.llr_warden()
    values, probs = [], []
    for z, q1z in enumerate(channel.q1.probs):
        if q1z <= 0:
            continue
        values.append(llr[z] - np.log1p((a.values[z] + rest.values) / m))
        probs.append(q1z * rest.probs)
    return SumDistribution.from_atoms(np.concatenate(values), np.concatenate(probs), 1)


def information_density_law(
    channel: CovertChannelPair, params: PpmParams, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> SumDistribution:
    """Exact law of i(X;Z) = log W(Z|X)/P_Z^{n,ell}(Z) under the joint PPM law."""
    block = _block_density_law(channel, params.m, cap)
    n_types = type_class_count(params.ell, len(block))
    if n_types > cap:
        raise CombinatorialBlowup(f"{n_types} type classes for the information density law")
    block_fd = _atom_distribution(block)
    return iid_sum_distribution(block.values, block_fd, params.ell, cap)


def information_density_sup(channel: CovertChannelPair, params: PpmParams) -> float:
    """Largest value of i(X;Z): ell * log(m r_max / (r_max + (m-1) r_min)), r = Q1/Q0."""
    q0, q1 = channel.q0.probs, channel.q1.probs
    support = q0 > 0
    ratio = q1[support] / q0[support]
    r_max, r_min = float(ratio.max()), float(ratio.min())
    m = params.m
    return params.ell * math.log(m * r_max / (r_max + (m - 1) * r_min))


def f_xz_bound(
    channel: CovertChannelPair,
    ell: int,
    gamma: float,
    params: Optional[PpmParams] = None,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> TailBound:
    """Hoeffding bound on the upper tail P{i(X;Z) > gamma}, gamma >= ell D_Q.

    bound = exp(-(gamma - ell D_Q)^2 / (2 ell log^2 mu_Z)). When params is given the
    exact tail relative to P_Z^{n,ell} is returned alongside.
    """
    d_q = kl_divergence(channel.q1, channel.q0)
    if gamma < ell * d_q:
        raise DomainError(f"gamma={gamma!r} is below ell*D_Q={ell * d_q!r}")
    if ell < 1:
        raise DomainError(f"ell must be positive, got {ell}")
    log_mu = math.log(warden_mu(channel))
    bound = math.exp(-((gamma - ell * d_q) ** 2) / (2.0 * ell * log_mu**2))
    exact_tail = None
    if params is not None:
        try:
            exact_tail = information_density_law(channel, params, cap).sf(gamma)
        except CombinatorialBlowup:
            logger.debug("f_xz_bound: exact tail skipped for n=%d ell=%d", params.n, ell)
    return TailBound(bound, exact_tail)


def ppm_log_min_probability(
    channel: CovertChannelPair, params: PpmParams, cap: int = DEFAULT_TYPE_CLASS_CAP
) -> float:
    """log of the smallest positive probability of P_Z^{n,ell}.

    Exact over window types when the enumeration fits under cap; otherwise the lower
    bound ell*(log(1/m) + (m-1) log min Q0 + log min Q1) + r log min Q0.
    """
    q0, q1 = channel.q0.probs, channel.q1.probs
    support = q0 > 0
    log_q0 = np.log(q0[support])
    ratio = q1[support] / q0[support]
    m = params.m
    k = int(support.sum())
    log_min_q0 = float(log_q0.min())
    if type_class_count(m, k) <= cap:
        counts = compositions(m, k)
        weight = counts @ ratio
        feasible = weight > 0
        block = counts[feasible] @ log_q0 + np.log(weight[feasible] / m)
        log_block = float(block.min())
    else:
        log_block = (
            math.log(1.0 / m)
            + (m - 1) * log_min_q0
            + math.log(float(q1[q1 > 0].min()))
        )
    return params.ell * log_block + params.r * log_min_q0

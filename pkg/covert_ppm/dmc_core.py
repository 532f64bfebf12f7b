"""Finite-alphabet probability primitives.

Distributions over small labeled alphabets, the divergences used as covertness
metrics, optimal (deterministic) hypothesis testing, Gaussian tail utilities and the
exact law of sums of i.i.d. finite-valued scores.

All logarithms are natural logarithms.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import (
    Callable,
    Dict,
    Hashable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from scipy import special, stats

from .errors import (
    AbsoluteContinuityViolation,
    AlphabetMismatch,
    AssumptionViolation,
    CombinatorialBlowup,
    DegenerateVariance,
    DomainError,
)

logger = logging.getLogger(__name__)

Symbol = Hashable
ScoreLike = Union[Mapping[Symbol, float], Sequence[float], np.ndarray]

PROB_SUM_TOL = 1e-12
MERGE_RTOL = 1e-12
DEFAULT_TYPE_CLASS_CAP = 10**7
DEFAULT_ENUMERATION_CAP = 2**20
EXHAUSTIVE_ATOM_LIMIT = 20
LLR_CLAMP = 700.0


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability mass function over a small labeled alphabet.

    Attributes:
        alphabet: Symbol labels, unique, in storage order
        probs: Probabilities aligned with alphabet (read-only array)
    """

    alphabet: Tuple[Symbol, ...]
    probs: np.ndarray

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if len(alphabet) != probs.size:
            raise ValueError(
                f"alphabet has {len(alphabet)} labels but {probs.size} probabilities"
            )
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet labels must be unique")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probabilities must be finite and nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOL * max(1.0, math.sqrt(probs.size)):
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "probs", _readonly(probs))

    @classmethod
    def from_mapping(cls, mapping: Mapping[Symbol, float]) -> "FiniteDistribution":
        """Build a distribution from a symbol -> probability mapping."""
        return cls(tuple(mapping.keys()), np.array(list(mapping.values()), dtype=float))

    @classmethod
    def bsc_row(cls, crossover: float, x: int) -> "FiniteDistribution":
        """Output law of a binary symmetric channel for input x."""
        if not 0.0 <= crossover <= 1.0:
            raise DomainError(f"crossover probability must lie in [0, 1], got {crossover!r}")
        row = [1.0 - crossover, crossover] if x == 0 else [crossover, 1.0 - crossover]
        return cls((0, 1), np.array(row))

    def __len__(self) -> int:
        return len(self.alphabet)

    def __repr__(self) -> str:
        pairs = ", ".join(f"{a!r}: {p:.6g}" for a, p in zip(self.alphabet, self.probs))
        return f"FiniteDistribution({{{pairs}}})"

    @cached_property
    def _index(self) -> Dict[Symbol, int]:
        return {symbol: i for i, symbol in enumerate(self.alphabet)}

    def prob(self, symbol: Symbol) -> float:
        """Probability of a symbol (0 for symbols outside the alphabet)."""
        i = self._index.get(symbol)
        return 0.0 if i is None else float(self.probs[i])

    def as_dict(self) -> Dict[Symbol, float]:
        return {a: float(p) for a, p in zip(self.alphabet, self.probs)}

    @property
    def support_min(self) -> float:
        """Smallest positive probability (mu_A)."""
        return float(self.probs[self.probs > 0].min())

    def is_absolutely_continuous(self, other: "FiniteDistribution") -> bool:
        """True if self << other, i.e. other(x) = 0 implies self(x) = 0."""
        p, q = aligned_probs(self, other)
        return not bool(np.any((q <= 0) & (p > 0)))

    def power(self, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> "FiniteDistribution":
        """Product distribution over sequences of length n, in lexicographic order."""
        if n < 0:
            raise DomainError(f"power must be nonnegative, got {n}")
        size = len(self) ** n
        if size > cap:
            raise CombinatorialBlowup(f"|alphabet|^n = {size} exceeds enumeration cap {cap}")
        probs = np.ones(1)
        for _ in range(n):
            probs = np.multiply.outer(probs, self.probs).ravel()
        labels = tuple(itertools.product(self.alphabet, repeat=n))
        return FiniteDistribution(labels, probs / probs.sum())

    @staticmethod
    def mixture(
        weights: Sequence[float], components: Sequence["FiniteDistribution"]
    ) -> "FiniteDistribution":
        """Convex combination of distributions sharing one alphabet."""
        if len(weights) != len(components) or not components:
            raise ValueError("need one weight per component")
        alphabet = components[0].alphabet
        total = np.zeros(len(alphabet))
        for weight, component in zip(weights, components):
            if component.alphabet != alphabet:
                raise AlphabetMismatch("mixture components must share an alphabet")
            total += weight * component.probs
        return FiniteDistribution(alphabet, total / total.sum())


def aligned_probs(
    p_dist: FiniteDistribution, q_dist: FiniteDistribution
) -> Tuple[np.ndarray, np.ndarray]:
    """Return the two probability vectors in p_dist's alphabet order."""
    if p_dist.alphabet == q_dist.alphabet:
        return p_dist.probs, q_dist.probs
    if set(p_dist.alphabet) != set(q_dist.alphabet):
        raise AlphabetMismatch(
            f"alphabets differ: {p_dist.alphabet[:8]!r} vs {q_dist.alphabet[:8]!r}"
        )
    return p_dist.probs, np.array([q_dist.prob(a) for a in p_dist.alphabet])


def kl_divergence(p_dist: FiniteDistribution, q_dist: FiniteDistribution) -> float:
    """Relative entropy D(P||Q) in nats."""
    p, q = aligned_probs(p_dist, q_dist)
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise AbsoluteContinuityViolation("P puts mass on a symbol where Q has none")
    value = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    return max(0.0, value)


def total_variation(p_dist: FiniteDistribution, q_dist: FiniteDistribution) -> float:
    """Variational distance 1/2 sum |P - Q|."""
    p, q = aligned_probs(p_dist, q_dist)
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def chi_squared(p_dist: FiniteDistribution, q_dist: FiniteDistribution) -> float:
    """Chi-squared distance sum (P - Q)^2 / Q."""
    p, q = aligned_probs(p_dist, q_dist)
    zero = q <= 0
    if np.any(p[zero] > 0):
        raise AbsoluteContinuityViolation("P puts mass on a symbol where Q has none")
    keep = ~zero
    return float(np.sum((p[keep] - q[keep]) ** 2 / q[keep]))


# ---------------------------------------------------------------------------
# Optimal deterministic hypothesis testing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisTestResult:
    """Outcome of a deterministic Neyman-Pearson search.

    Attributes:
        beta: Q-mass of the acceptance set T (missed detection)
        false_alarm: P-mass outside T actually achieved (<= alpha)
        excluded: Symbols outside T ((class index, count) pairs for class searches)
        method: "exhaustive" or "likelihood_ratio"
    """

    beta: float
    false_alarm: float
    excluded: Tuple[Symbol, ...]
    method: str


def _best_subset(
    p: np.ndarray, q: np.ndarray, budget: float
) -> Tuple[float, float, List[int]]:
    """Exhaustive 0/1 knapsack: maximize q(E) subject to p(E) <= budget."""
    p_sums = np.zeros(1)
    q_sums = np.zeros(1)
    for pi, qi in zip(p, q):
        p_sums = np.concatenate([p_sums, p_sums + pi])
        q_sums = np.concatenate([q_sums, q_sums + qi])
    feasible = p_sums <= budget + PROB_SUM_TOL
    candidate_q = np.where(feasible, q_sums, -np.inf)
    best_q = candidate_q.max()
    ties = np.nonzero(candidate_q >= best_q - PROB_SUM_TOL * 1e-3)[0]
    best = int(ties[np.argmin(p_sums[ties])])
    chosen = [i for i in range(p.size) if (best >> i) & 1]
    return float(q_sums[best]), float(p_sums[best]), chosen


def _likelihood_ratio_exclusion(
    p: np.ndarray, q: np.ndarray, budget: float, counts: Optional[np.ndarray] = None
) -> Tuple[float, float, np.ndarray]:
    """Greedy exclusion by decreasing Q/P, exact subset search inside small ratio ties.

    Item k stands for counts[k] interchangeable atoms of masses p[k] and q[k]; the
    returned array holds how many of each are excluded. Groups past one that does not
    fit still fill the remaining budget, so between likelihood-ratio breakpoints the
    resulting beta can sit above the knapsack optimum.
    """
    counts = np.ones(p.size) if counts is None else np.asarray(counts, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(p > 0, q / np.where(p > 0, p, 1.0), np.inf)
    order = np.argsort(-ratio, kind="mergesort")
    taken = np.zeros(p.size)
    used_p = 0.0
    gained_q = 0.0
    i = 0
    while i < order.size:
        j = i
        while j + 1 < order.size and math.isclose(
            ratio[order[j + 1]], ratio[order[i]], rel_tol=MERGE_RTOL
        ):
            j += 1
        group = order[i : j + 1]
        i = j + 1
        if np.dot(counts[group], q[group]) <= 0:
            continue
        remaining = budget - used_p
        if np.dot(counts[group], p[group]) <= remaining + PROB_SUM_TOL:
            taken[group] = counts[group]
        elif counts[group].sum() <= EXHAUSTIVE_ATOM_LIMIT:
            members = np.repeat(group, counts[group].astype(np.int64))
            _, _, local = _best_subset(p[members], q[members], remaining)
            np.add.at(taken, members[local], 1.0)
        else:
            room = remaining
            for k in group[np.argsort(-p[group], kind="mergesort")]:
                if p[k] <= 0 or counts[k] * p[k] <= room + PROB_SUM_TOL:
                    take = counts[k]
                else:
                    take = max(0.0, math.floor((room + PROB_SUM_TOL) / p[k]))
                taken[k] = take
                room -= take * float(p[k])
        used_p += float(np.dot(taken[group], p[group]))
        gained_q += float(np.dot(taken[group], q[group]))
    return gained_q, used_p, taken


def neyman_pearson(
    alpha: float,
    p_dist: FiniteDistribution,
    q_dist: FiniteDistribution,
    method: str = "auto",
) -> HypothesisTestResult:
    """Search the deterministic set T minimizing Q(T) subject to P(X \\ T) <= alpha.

    Args:
        alpha: False-alarm budget in [0, 1]
        p_dist: Null hypothesis P
        q_dist: Alternative Q
        method: "auto" (exhaustive for supports of at most 20 atoms), "exhaustive"
            or "likelihood_ratio". The likelihood-ratio path is exact at every
            likelihood-ratio breakpoint and an upper bound on beta in between.

    Returns:
        HypothesisTestResult with beta = Q(T) and the achieved false alarm
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    p, q = aligned_probs(p_dist, q_dist)
    support = np.nonzero((p > 0) | (q > 0))[0]
    ps, qs = p[support], q[support]
    if method == "auto":
        method = "exhaustive" if support.size <= EXHAUSTIVE_ATOM_LIMIT else "likelihood_ratio"
    if method == "exhaustive":
        if support.size > EXHAUSTIVE_ATOM_LIMIT:
            raise CombinatorialBlowup(
                f"exhaustive search over {support.size} atoms exceeds {EXHAUSTIVE_ATOM_LIMIT}"
            )
        gained, used, chosen = _best_subset(ps, qs, alpha)
    elif method == "likelihood_ratio":
        gained, used, taken = _likelihood_ratio_exclusion(ps, qs, alpha)
        chosen = [int(k) for k in np.nonzero(taken)[0]]
    else:
        raise ValueError(f"unknown method {method!r}")
    beta = min(1.0, max(0.0, float(qs.sum()) - gained))
    excluded = tuple(p_dist.alphabet[int(support[k])] for k in chosen)
    return HypothesisTestResult(beta, min(used, alpha), excluded, method)


def neyman_pearson_classes(
    alpha: float,
    null_mass: np.ndarray,
    alt_mass: np.ndarray,
    multiplicity: np.ndarray,
) -> HypothesisTestResult:
    """Likelihood-ratio Neyman-Pearson search over classes of interchangeable atoms.

    Class k holds multiplicity[k] atoms, each of null mass null_mass[k] and alternative
    mass alt_mass[k]. The result equals neyman_pearson(..., "likelihood_ratio") on the
    expanded atoms; excluded lists (class index, atoms excluded) pairs.
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    p = np.asarray(null_mass, dtype=float).reshape(-1)
    q = np.asarray(alt_mass, dtype=float).reshape(-1)
    counts = np.asarray(multiplicity, dtype=float).reshape(-1)
    if not p.size == q.size == counts.size:
        raise ValueError("class arrays must have equal length")
    if np.any(p < 0) or np.any(q < 0) or np.any(counts < 0):
        raise ValueError("class masses and multiplicities must be nonnegative")
    support = np.nonzero(((p > 0) | (q > 0)) & (counts > 0))[0]
    ps, qs, cs = p[support], q[support], counts[support]
    p_total = float(np.dot(cs, ps))
    q_total = float(np.dot(cs, qs))
    if p_total <= 0 or q_total <= 0:
        raise ValueError("class masses must carry positive total mass")
    ps, qs = ps / p_total, qs / q_total
    gained, used, taken = _likelihood_ratio_exclusion(ps, qs, alpha, cs)
    beta = min(1.0, max(0.0, float(np.dot(cs, qs)) - gained))
    excluded = tuple((int(support[k]), int(taken[k])) for k in np.nonzero(taken)[0])
    return HypothesisTestResult(beta, min(used, alpha), excluded, "likelihood_ratio")


def beta_alpha(
    alpha: float,
    p_dist: FiniteDistribution,
    q_dist: FiniteDistribution,
    method: str = "auto",
) -> float:
    """Optimal missed-detection probability beta_alpha(P, Q) over deterministic tests."""
    return neyman_pearson(alpha, p_dist, q_dist, method).beta


def beta_distance(alpha: float, p_dist: FiniteDistribution, q_dist: FiniteDistribution) -> float:
    """Hypothesis-testing quasi-metric d_alpha(P, Q) = 1 - alpha - beta_alpha(Q, P)."""
    return 1.0 - alpha - beta_alpha(alpha, q_dist, p_dist)


def quasi_metric_bound(d_pq: float, kl_rp: float, min_q: float) -> float:
    """Triangle-type bound d(R, Q) <= d(P, Q) + D(R||P) + sqrt(D(R||P)) max(1, log 1/min Q).

    Holds for the variational distance and the beta quasi-metric. min_q may be a
    product-distribution minimum; pass its log through min_q=exp(log_min) only when
    representable, otherwise use quasi_metric_bound_log.
    """
    if kl_rp < 0:
        raise DomainError("relative entropy must be nonnegative")
    return quasi_metric_bound_log(d_pq, kl_rp, math.log(min_q))


def quasi_metric_bound_log(d_pq: float, kl_rp: float, log_min_q: float) -> float:
    """quasi_metric_bound with the reference minimum given as a log."""
    return d_pq + kl_rp + math.sqrt(kl_rp) * max(1.0, -log_min_q)


# ---------------------------------------------------------------------------
# Gaussian utilities
# ---------------------------------------------------------------------------


def q_function(x):
    """Gaussian tail Q(x) = 0.5 * erfc(x / sqrt(2)); accepts scalars and arrays."""
    result = 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(result) if np.ndim(result) == 0 else result


def q_inverse(p):
    """Inverse Gaussian tail, Newton-refined from the normal isf."""
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"Q^-1 needs p in (0, 1), got {p!r}")
    x = stats.norm.isf(arr)
    for _ in range(3):
        density = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        safe_density = np.where(density > 0, density, 1.0)
        step = np.where(density > 0, (q_function(x) - arr) / safe_density, 0.0)
        x = x + step
        if np.all(np.abs(step) <= 1e-12 * np.maximum(1.0, np.abs(x))):
            break
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class GaussianMoments:
    """First two moments and third absolute central moment of a (sum of) score(s).

    Attributes:
        mean: Mean (per summand or total)
        variance: Variance
        third_abs_central_moment: E|X - mean|^3 (per summand) or its sum T (total)
    """

    mean: float
    variance: float
    third_abs_central_moment: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise DomainError(f"variance must be nonnegative, got {self.variance!r}")
        if not self.third_abs_central_moment >= 0:
            raise DomainError("third absolute central moment must be nonnegative")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @classmethod
    def from_score(cls, score: ScoreLike, base: FiniteDistribution) -> "GaussianMoments":
        """Per-summand moments of score(X), X ~ base."""
        values = _score_vector(score, base)
        mask = base.probs > 0
        p, v = base.probs[mask], values[mask]
        mean = float(np.dot(p, v))
        centered = v - mean
        return cls(
            mean,
            float(np.dot(p, centered**2)),
            float(np.dot(p, np.abs(centered) ** 3)),
        )

    @classmethod
    def from_sum(cls, law: "SumDistribution") -> "GaussianMoments":
        return cls(law.mean, law.variance, law.third_abs_central_moment)

    def iid(self, count: int) -> "GaussianMoments":
        """Totals for count i.i.d. summands (sigma^2 = n var, T = n t)."""
        return GaussianMoments(
            self.mean * count, self.variance * count, self.third_abs_central_moment * count
        )


def berry_esseen_bound(moments: GaussianMoments, lam: float = 0.0) -> float:
    """Berry-Esseen constant 6 T / sigma^3 bounding |P{S - ES >= lam sigma} - Q(lam)|.

    The bound is uniform in lam; lam is accepted for interface symmetry with
    berry_esseen_interval.
    """
    del lam
    if moments.variance <= 0:
        raise DegenerateVariance("Berry-Esseen bound needs positive variance")
    return 6.0 * moments.third_abs_central_moment / moments.std**3


def berry_esseen_interval(moments: GaussianMoments, lam: float) -> Tuple[float, float]:
    """Interval [Q(lam) - b, Q(lam) + b] clipped to [0, 1] containing the exact tail."""
    bound = berry_esseen_bound(moments)
    center = q_function(lam)
    return max(0.0, center - bound), min(1.0, center + bound)


# ---------------------------------------------------------------------------
# Exact laws of sums
# ---------------------------------------------------------------------------


def _merge_atoms(values: np.ndarray, probs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    keep = probs > 0
    values, probs = values[keep], probs[keep]
    if values.size == 0:
        return np.zeros(1), np.ones(1)
    order = np.argsort(values, kind="mergesort")
    values, probs = values[order], probs[order]
    if values.size == 1:
        return values, probs
    scale = np.maximum(np.maximum(np.abs(values[1:]), np.abs(values[:-1])), 1.0)
    new_group = np.diff(values) > MERGE_RTOL * scale
    group_ids = np.concatenate([[0], np.cumsum(new_group)])
    starts = np.concatenate([[0], np.nonzero(new_group)[0] + 1])
    return values[starts], np.bincount(group_ids, weights=probs)


@dataclass(frozen=True, eq=False)
class SumDistribution:
    """Exact law of a sum of finite-valued scores.

    Attributes:
        values: Atom values, strictly increasing (read-only array)
        probs: Atom probabilities aligned with values
        count: Number of summands
    """

    values: np.ndarray
    probs: np.ndarray
    count: int

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if values.shape != probs.shape or values.size == 0:
            raise ValueError("values and probs must be nonempty and of equal length")
        if values.size > 1 and not np.all(np.diff(values) > 0):
            raise ValueError("atom values must be strictly increasing")
        if np.any(probs < 0):
            raise ValueError("atom probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-10 * max(self.count, 1):
            raise ValueError(f"atom probabilities sum to {total!r}")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "probs", _readonly(probs))

    @classmethod
    def from_atoms(
        cls,
        values: Union[Sequence[float], np.ndarray],
        probs: Union[Sequence[float], np.ndarray],
        count: int,
    ) -> "SumDistribution":
        """Sort and merge raw atoms (values equal within the merge tolerance)."""
        merged_v, merged_p = _merge_atoms(
            np.asarray(values, dtype=float), np.asarray(probs, dtype=float)
        )
        return cls(merged_v, merged_p, count)

    @classmethod
    def point_mass(cls, value: float = 0.0, count: int = 0) -> "SumDistribution":
        return cls(np.array([value]), np.array([1.0]), count)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def atoms(self) -> Dict[float, float]:
        return {float(v): float(p) for v, p in zip(self.values, self.probs)}

    @property
    def mean(self) -> float:
        return float(np.dot(self.probs, self.values))

    @property
    def variance(self) -> float:
        return float(np.dot(self.probs, (self.values - self.mean) ** 2))

    @property
    def third_abs_central_moment(self) -> float:
        return float(np.dot(self.probs, np.abs(self.values - self.mean) ** 3))

    def moment(self, order: int, central: bool = False, absolute: bool = False) -> float:
        shifted = self.values - self.mean if central else self.values
        if absolute:
            shifted = np.abs(shifted)
        return float(np.dot(self.probs, shifted**order))

    def _tol(self, x: float) -> float:
        return MERGE_RTOL * max(1.0, abs(x))

    def cdf(self, x: float) -> float:
        """P{S <= x}."""
        if x == math.inf:
            return 1.0
        if x == -math.inf:
            return 0.0
        return float(min(1.0, self.probs[self.values <= x + self._tol(x)].sum()))

    def sf(self, x: float) -> float:
        """P{S > x}."""
        if x == math.inf:
            return 0.0
        if x == -math.inf:
            return 1.0
        return float(min(1.0, self.probs[self.values > x + self._tol(x)].sum()))

    def tail_ge(self, x: float) -> float:
        """P{S >= x}."""
        if x == -math.inf:
            return 1.0
        if x == math.inf:
            return 0.0
        return float(min(1.0, self.probs[self.values >= x - self._tol(x)].sum()))

    def expectation(self, func: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.probs, func(self.values)))

    def map(self, func: Callable[[np.ndarray], np.ndarray]) -> "SumDistribution":
        """Law of func(S), atoms re-merged."""
        return SumDistribution.from_atoms(func(self.values), self.probs.copy(), self.count)

    def convolve(
        self, other: "SumDistribution", cap: int = DEFAULT_TYPE_CLASS_CAP
    ) -> "SumDistribution":
        """Law of S + S' for independent S, S'."""
        size = len(self) * len(other)
        if size > cap:
            raise CombinatorialBlowup(f"convolution of {len(self)}x{len(other)} atoms exceeds cap")
        values = np.add.outer(self.values, other.values).ravel()
        probs = np.multiply.outer(self.probs, other.probs).ravel()
        return SumDistribution.from_atoms(values, probs, self.count + other.count)


def _score_vector(score: ScoreLike, base: FiniteDistribution) -> np.ndarray:
    if isinstance(score, Mapping):
        if set(score.keys()) != set(base.alphabet):
            raise AlphabetMismatch("score alphabet differs from base alphabet")
        return np.array([float(score[a]) for a in base.alphabet])
    values = np.asarray(score, dtype=float).reshape(-1)
    if values.size != len(base):
        raise AlphabetMismatch(f"score has {values.size} entries for {len(base)} symbols")
    return values


def type_class_count(count: int, alphabet_size: int) -> int:
    """Number of compositions of count into alphabet_size parts."""
    if alphabet_size <= 0:
        return 1 if count == 0 else 0
    return math.comb(count + alphabet_size - 1, alphabet_size - 1)


def compositions(count: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length parts summing to count."""
    if parts == 1:
        return np.array([[count]], dtype=np.int64)
    if parts == 2:
        first = np.arange(count, -1, -1, dtype=np.int64)
        return np.stack([first, count - first], axis=1)
    bars = np.array(
        list(itertools.combinations(range(count + parts - 1), parts - 1)), dtype=np.int64
    ).reshape(-1, parts - 1)
    padded = np.hstack(
        [
            np.full((bars.shape[0], 1), -1, dtype=np.int64),
            bars,
            np.full((bars.shape[0], 1), count + parts - 1, dtype=np.int64),
        ]
    )
    return np.diff(padded, axis=1) - 1


def iid_sum_distribution(
    score: ScoreLike,
    base: FiniteDistribution,
    count: int,
    cap: int = DEFAULT_TYPE_CLASS_CAP,
) -> SumDistribution:
    """Exact law of sum_{i<=count} score(X_i), X_i i.i.d. ~ base, by type classes.

    Symbols with equal score are pooled before enumerating, so the number of type
    classes is C(count + k - 1, k - 1) with k the number of distinct scores carrying
    mass.

    Raises:
        CombinatorialBlowup: If the number of type classes exceeds cap
    """
    if count < 0:
        raise DomainError(f"count must be nonnegative, got {count}")
    values = _score_vector(score, base)
    if count == 0:
        return SumDistribution.point_mass(0.0, 0)
    mask = base.probs > 0
    distinct, pooled = _merge_atoms(values[mask], base.probs[mask])
    k = distinct.size
    n_types = type_class_count(count, k)
    if n_types > cap:
        raise CombinatorialBlowup(
            f"{n_types} type classes for count={count} over {k} scores exceeds cap {cap}"
        )
    counts = compositions(count, k)
    log_probs = (
        special.gammaln(count + 1)
        - special.gammaln(counts + 1).sum(axis=1)
        + counts @ np.log(pooled)
    )
    probs = np.exp(log_probs)
    sums = counts @ distinct
    return SumDistribution.from_atoms(sums, probs / probs.sum(), count)


# ---------------------------------------------------------------------------
# Channel pair
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CovertChannelPair:
    """The two binary-input DMCs: P0, P1 to the legitimate receiver, Q0, Q1 to the warden.

    Attributes:
        p0: Receiver output law for input 0 (innocent symbol)
        p1: Receiver output law for input 1
        q0: Warden output law for input 0
        q1: Warden output law for input 1
        allow_degenerate: Skip the absolute continuity checks (test doubles only);
            receiver LLRs are then clamped at +-700 nats
    """

    p0: FiniteDistribution
    p1: FiniteDistribution
    q0: FiniteDistribution
    q1: FiniteDistribution
    allow_degenerate: bool = False

    def __post_init__(self):
        if self.p0.alphabet != self.p1.alphabet:
            raise AlphabetMismatch("P0 and P1 must share the receiver output alphabet")
        if self.q0.alphabet != self.q1.alphabet:
            raise AlphabetMismatch("Q0 and Q1 must share the warden output alphabet")
        if not self.allow_degenerate:
            self.check_assumptions()

    @classmethod
    def bsc(cls, p_main: float, p_warden: float) -> "CovertChannelPair":
        """Binary symmetric channels with the given crossover probabilities."""
        return cls(
            FiniteDistribution.bsc_row(p_main, 0),
            FiniteDistribution.bsc_row(p_main, 1),
            FiniteDistribution.bsc_row(p_warden, 0),
            FiniteDistribution.bsc_row(p_warden, 1),
        )

    def check_assumptions(self) -> None:
        """Require Q1 << Q0, P1 << P0 and Q1 != Q0."""
        if not self.q1.is_absolutely_continuous(self.q0):
            raise AssumptionViolation("warden channel violates Q1 << Q0")
        if not self.p1.is_absolutely_continuous(self.p0):
            raise AssumptionViolation("receiver channel violates P1 << P0")
        if total_variation(self.q1, self.q0) <= 0:
            raise AssumptionViolation("Q1 == Q0: the warden channel carries no signal")

    @property
    def warden_null_dominates(self) -> bool:
        """True if Q0 << Q1, needed by the variational and beta results."""
        return self.q0.is_absolutely_continuous(self.q1)

    def llr_main(self) -> np.ndarray:
        """Per-symbol log(P1/P0) over the receiver alphabet (clamped for test doubles)."""
        p0, p1 = self.p0.probs, self.p1.probs
        llr = np.zeros(p0.size)
        both = (p0 > 0) & (p1 > 0)
        llr[both] = np.log(p1[both] / p0[both])
        llr[(p0 <= 0) & (p1 > 0)] = LLR_CLAMP
        llr[(p1 <= 0) & (p0 > 0)] = -LLR_CLAMP
        return np.clip(llr, -LLR_CLAMP, LLR_CLAMP)

    def llr_warden(self) -> np.ndarray:
        """Per-symbol log(Q1/Q0) on the support of Q1 (-inf where Q1 = 0)."""
        q0, q1 = self.q0.probs, self.q1.probs
        with np.errstate(divide="ignore", invalid="ignore"):
            llr = np.log(q1) - np.log(q0)
        return np.where(q1 > 0, llr, -np.inf)

    def receiver_output(self, x: int) -> FiniteDistribution:
        return self.p1 if x else self.p0

    def warden_output(self, x: int) -> FiniteDistribution:
        return self.q1 if x else self.q0


def random_distribution(
    rng: np.random.Generator, size: int, alphabet: Optional[Sequence[Symbol]] = None
) -> FiniteDistribution:
    """Dirichlet(1,...,1) draw, for randomized property checks."""
    probs = rng.dirichlet(np.ones(size))
    labels = tuple(alphabet) if alphabet is not None else tuple(range(size))
    return FiniteDistribution(labels, probs)

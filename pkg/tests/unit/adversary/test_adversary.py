"""Tests for the warden's detector, weight caps and converse bounds."""

import math

import numpy as np
import pytest

from covert_ppm.adversary import (
    DetectorSpec,
    RocPoint,
    beta_upper_bound_from_wmin,
    binary_entropy,
    converse_logM_from_weight,
    converse_secondorder,
    detector_constants,
    detector_roc,
    detector_statistic_law,
    first_order_rate_limit,
    pigeonhole_logM_bound,
    tv_lower_bound_from_wmin,
    weight_bound_beta,
    weight_bound_D,
    weight_bound_V,
    weight_cap,
)
from covert_ppm.asymptotics import ChannelConstants, first_order_slopes, plan_D
from covert_ppm.coding import Codebook, induced_output_distribution
from covert_ppm.dmc_core import FiniteDistribution, kl_divergence, total_variation
from covert_ppm.errors import (
    DegenerateVariance,
    DomainError,
    InfeasibleWeight,
    InvalidParams,
    PreconditionViolation,
)
from covert_ppm.ppm import score_a

EPS = 1e-3
DELTA = 0.01
ALPHA = 0.2


class TestDetector:
    """Test the threshold detector and its exact statistic law."""

    def test_midpoint_threshold(self, default_channel, default_constants):
        """Test tau = (w/2) chi2."""
        spec = DetectorSpec.midpoint(default_channel, 10)
        assert spec.tau == pytest.approx(5.0 * default_constants.chi2_q)

    def test_statistic_and_rejection(self, default_channel):
        """Test the summed score over output indices."""
        spec = DetectorSpec(score_a(default_channel), 0.0)
        outputs = np.array([[1, 1, 0], [0, 0, 0]])
        values = spec.score.values
        np.testing.assert_allclose(
            spec.statistic(outputs), [2 * values[1] + values[0], 3 * values[0]]
        )
        np.testing.assert_array_equal(spec.rejects(outputs), [True, False])

    def test_non_finite_threshold(self, default_channel):
        """Test that an infinite threshold is rejected."""
        with pytest.raises(DomainError):
            DetectorSpec(score_a(default_channel), math.inf)

    def test_statistic_law_moments(self, default_channel, default_constants):
        """Test mean w chi2 and variance n sigma0^2 + w (sigma1^2 - sigma0^2)."""
        n, w = 60, 12
        law = detector_statistic_law(n, w, default_channel)
        chi2 = default_constants.chi2_q
        assert law.mean == pytest.approx(w * chi2, rel=1e-9)
        expected_var = n * chi2 + w * (default_constants.sigma1_sq - chi2)
        assert law.variance == pytest.approx(expected_var, rel=1e-9)

    def test_statistic_law_weight_range(self, default_channel):
        """Test that w must lie in [0, n]."""
        with pytest.raises(InvalidParams):
            detector_statistic_law(5, 6, default_channel)

    def test_roc_point_validation(self):
        """Test probabilities outside [0, 1]."""
        with pytest.raises(DomainError):
            RocPoint(1.2, 0.1, "exact")
        assert RocPoint(0.1, 0.3, "exact").tv_lower_bound == pytest.approx(0.6)

    def test_exact_roc_witnesses_tv(self, default_channel):
        """Test 1 - alpha - beta <= V(W^n(.|x), Q0^n) for one weight-3 codeword."""
        n = 10
        exact, _ = detector_roc(n, 3, default_channel)
        book = Codebook(n, 1, 1, (((1, 2, 3),),))
        induced = induced_output_distribution(book, default_channel)
        tv = total_variation(induced, default_channel.q0.power(n))
        assert exact.mode == "exact"
        assert exact.tv_lower_bound <= tv + 1e-12

    def test_bound_roc_dominates_exact(self, default_channel):
        """Test that the Berry-Esseen point is no better than the exact one."""
        exact, bound = detector_roc(400, 40, default_channel)
        assert bound.mode == "berry_esseen"
        assert exact.false_alarm <= bound.false_alarm
        assert exact.missed_detection <= bound.missed_detection

    def test_roc_weight_range(self, default_channel):
        """Test that w_min must be positive."""
        with pytest.raises(InvalidParams):
            detector_roc(10, 0, default_channel)


class TestDetectorConstants:
    """Test the Berry-Esseen constants of the detector statistic."""

    def test_values(self, default_constants):
        """Test B0 and B1 of the default channel and the formula table."""
        dc = detector_constants(default_constants)
        assert dc.b0 == pytest.approx(6.09, abs=0.02)
        assert dc.b1 == pytest.approx(6.09, abs=0.05)
        assert dc.b1 >= dc.b0 - 1e-12
        assert dc.b2 >= 0.0
        assert set(dc.as_dict()) == {"B0", "B1", "B2", "B3"}
        assert set(dc.formulas) == {"B0", "B1", "B2", "B3"}

    def test_degenerate(self):
        """Test that a zero tilted variance is rejected."""
        constants = ChannelConstants(1.0, 1.0, 1.0, 0.1, 0.1, 1.0, 0.1, sigma1_sq=0.0)
        with pytest.raises(DegenerateVariance):
            detector_constants(constants)


class TestWeightConverses:
    """Test bounds derived from codeword weight."""

    def test_tv_lower_bound_grows_with_weight(self, default_channel):
        """Test that heavier codewords are easier to detect."""
        n = 10**6
        values = [tv_lower_bound_from_wmin(n, w, default_channel) for w in (200, 1000, 5000)]
        assert values[0] < values[1] < values[2]
        assert values[2] <= 1.0

    def test_beta_upper_bound(self, default_channel):
        """Test the precondition and the [0, 1] range."""
        n = 10**6
        with pytest.raises(PreconditionViolation):
            beta_upper_bound_from_wmin(n, 10, ALPHA, default_channel)
        value = beta_upper_bound_from_wmin(n, 20000, ALPHA, default_channel)
        assert 0.0 <= value <= 1.0

    def test_converse_from_weight(self, default_constants):
        """Test the corrected form and the leading fallback."""
        heavy = converse_logM_from_weight(10**4, EPS, default_constants)
        assert heavy.mode == "corrected"
        light = converse_logM_from_weight(100, EPS, default_constants)
        assert light.mode == "leading"
        with pytest.raises(InfeasibleWeight):
            converse_logM_from_weight(100, EPS, default_constants, strict=True)

    def test_converse_weight_domain(self, default_constants):
        """Test weights below one or above n."""
        with pytest.raises(InvalidParams):
            converse_logM_from_weight(0.5, EPS, default_constants)
        with pytest.raises(InvalidParams):
            converse_logM_from_weight(20, EPS, default_constants, n=10)


class TestWeightCaps:
    """Test the weight caps of the three metrics."""

    def test_kl_cap_solves_budget(self, default_channel, default_constants):
        """Test n D((1-mu) Q0 + mu Q1 || Q0) = delta at mu = cap / n."""
        n = 10**6
        cap = weight_bound_D(DELTA, n, default_constants)
        mu = cap.cap / n
        mixed = FiniteDistribution.mixture([1.0 - mu, mu], [default_channel.q0, default_channel.q1])
        assert n * kl_divergence(mixed, default_channel.q0) == pytest.approx(DELTA, rel=1e-6)
        assert cap.per_root_n == pytest.approx(cap.g, rel=0.01)
        assert float(cap) == cap.cap

    def test_kl_cap_without_channel(self):
        """Test the quadratic approximation when only constants are known."""
        constants = ChannelConstants(1.0, 1.0, 1.0, 0.02, 0.04, 1.0, 0.4)
        cap = weight_bound_D(DELTA, 10**4, constants)
        assert cap.cap == pytest.approx(math.sqrt(2e4 * DELTA / 0.04))
        assert cap.constant == pytest.approx(0.0, abs=1e-9)

    def test_kl_cap_whole_block(self, default_constants):
        """Test that a loose budget allows every position to carry a pulse."""
        assert weight_bound_D(0.5, 10, default_constants).cap == 10.0

    def test_tv_cap(self, default_constants):
        """Test the fixed point and that finite-n corrections raise the cap."""
        cap = weight_bound_V(DELTA, 10**6, 0.0, default_constants)
        assert cap.iterations >= 1
        assert cap.per_root_n >= cap.g
        with pytest.raises(DomainError):
            weight_bound_V(DELTA, 100, 0.0, default_constants)
        with pytest.raises(DomainError):
            weight_bound_V(DELTA, 10**6, 1.5, default_constants)

    def test_beta_cap(self, default_constants):
        """Test the beta cap and its alpha range."""
        cap = weight_bound_beta(DELTA, ALPHA, 10**8, 0.0, default_constants)
        assert cap.per_root_n >= cap.g
        with pytest.raises(DomainError):
            weight_bound_beta(DELTA, 0.6, 10**8, 0.0, default_constants)
        with pytest.raises(DomainError):
            weight_bound_beta(DELTA, ALPHA, 100, 0.0, default_constants)

    @staticmethod
    def _nondecreasing(values):
        return all(later >= earlier * (1.0 - 1e-9) for earlier, later in zip(values, values[1:]))

    @pytest.mark.parametrize(
        "metric,gammas",
        [("tv", np.linspace(0.0, 0.45, 10)), ("beta", np.linspace(0.0, 0.75, 16))],
    )
    def test_caps_nondecreasing_in_gamma(self, default_constants, metric, gammas):
        """Test that a larger guaranteed fraction of light codewords never lowers the cap."""
        if metric == "tv":
            caps = [weight_bound_V(DELTA, 10**6, g, default_constants).cap for g in gammas]
        else:
            caps = [
                weight_bound_beta(DELTA, ALPHA, 10**8, g, default_constants).cap for g in gammas
            ]
        assert self._nondecreasing(caps)
        assert caps[-1] > caps[0]

    @pytest.mark.parametrize("gamma", [0.0, 0.1, 0.3])
    def test_caps_nondecreasing_in_delta(self, default_constants, gamma):
        """Test that a looser covertness budget never lowers the cap."""
        deltas = (0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3)
        tv = [weight_bound_V(d, 10**6, gamma, default_constants).cap for d in deltas]
        beta = [weight_bound_beta(d, ALPHA, 10**8, gamma, default_constants).cap for d in deltas]
        assert self._nondecreasing(tv)
        assert self._nondecreasing(beta)

    def test_gamma_past_the_budget(self, default_constants):
        """Test that gamma leaving no Q^-1 argument is rejected."""
        with pytest.raises(DomainError):
            weight_bound_V(DELTA, 10**6, 0.9, default_constants)
        with pytest.raises(DomainError):
            weight_bound_beta(DELTA, ALPHA, 10**8, 0.9, default_constants)

    def test_dispatch(self, default_constants):
        """Test metric dispatch."""
        assert weight_cap("kl", 10**6, DELTA, default_constants).cap == pytest.approx(
            weight_bound_D(DELTA, 10**6, default_constants).cap
        )
        with pytest.raises(InvalidParams):
            weight_cap("hellinger", 10**6, DELTA, default_constants)


class TestConverse:
    """Test the second-order converse and the first-order limits."""

    def test_converse_above_plan(self, default_constants):
        """Test that the planned message length sits below the converse."""
        n = 10**6
        converse = converse_secondorder("kl", n, EPS, DELTA, None, default_constants)
        plan = plan_D(n, EPS, DELTA, constants=default_constants, berry_esseen=False)
        assert plan.log_m_n <= converse.value
        assert converse.band_low <= converse.value
        assert converse.value == pytest.approx(
            converse.first_order + converse.second_order + (converse.value - converse.band_low)
        )

    def test_rate_limits_match_slopes(self, default_constants):
        """Test that the all-codes limits reproduce the first-order slopes."""
        slopes = first_order_slopes(DELTA, ALPHA, default_constants)
        assert first_order_rate_limit("kl", DELTA, default_constants).slope == pytest.approx(
            slopes.slope_d
        )
        assert first_order_rate_limit("tv", DELTA, default_constants).slope == pytest.approx(
            slopes.slope_v
        )
        beta = first_order_rate_limit(
            "beta", DELTA, default_constants, alpha=ALPHA, eps_n=0.01, n=50
        )
        assert beta.slope == pytest.approx(slopes.slope_beta)
        assert beta.gamma_n == pytest.approx(0.1)
        assert math.isnan(first_order_rate_limit("kl", DELTA, default_constants).gamma_n)

    def test_binary_entropy(self):
        """Test H_b at the center and the endpoints."""
        assert binary_entropy(0.5) == pytest.approx(math.log(2.0))
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_pigeonhole(self):
        """Test the light-subset bound and its domain."""
        value = pigeonhole_logM_bound(100, 1.0, 0.0, 0.0, 0.0, 0.1)
        assert value == pytest.approx((10.0 + binary_entropy(0.1)) / 0.9)
        with pytest.raises(DomainError):
            pigeonhole_logM_bound(100, 1.0, 0.0, 0.0, 1.0, 0.1)
        with pytest.raises(DomainError):
            pigeonhole_logM_bound(100, 1.0, 3.0, 0.0, 0.0, 0.1)

"""Tests for channel constants, first-order slopes, expansions and planners."""

import math

import pytest

from covert_ppm.asymptotics import (
    PROVENANCE_GAUSSIAN,
    ChannelConstants,
    asymptote_gap,
    channel_constants,
    cubic_residual,
    cubic_root_trig,
    first_order_slopes,
    gamma_tv,
    key_length,
    lambda_upsilon,
    metric_ordering_check,
    omega,
    plan_beta,
    plan_D,
    plan_V,
    second_order_beta_envelopes,
    second_order_D,
    second_order_V_envelopes,
)
from covert_ppm.dmc_core import q_inverse
from covert_ppm.errors import (
    ComplexRootRegime,
    DegenerateVariance,
    DomainError,
    InfeasibleBlocklength,
)

EPS = 1e-3
DELTA = 0.01
ALPHA = 0.2


class TestChannelConstants:
    """Test exact constants of the default channel pair."""

    def test_values(self, default_constants):
        """Test D_P, V_P, chi2(Q1||Q0) and D_Q."""
        assert default_constants.d_p == pytest.approx(1.6308, abs=1e-4)
        assert default_constants.v_p == pytest.approx(1.7115, abs=1e-4)
        assert default_constants.chi2_q == pytest.approx(0.040404, abs=1e-6)
        assert default_constants.d_q == pytest.approx(0.0201, abs=1e-4)
        assert default_constants.mu_z == pytest.approx(0.45)

    def test_as_dict_keys(self, default_constants):
        """Test the report keys."""
        assert set(default_constants.as_dict()) == {
            "D_P",
            "V_P",
            "T_P",
            "D_Q",
            "chi2_Q",
            "chi2_P",
            "mu_Z",
        }

    def test_invalid_constants(self):
        """Test that a zero chi2 and a negative variance are rejected."""
        with pytest.raises(DomainError):
            ChannelConstants(1.0, 1.0, 1.0, 0.1, 0.0, 1.0, 0.1)
        with pytest.raises(DomainError):
            ChannelConstants(1.0, -1.0, 1.0, 0.1, 0.1, 1.0, 0.1)

    def test_degenerate_variance(self):
        """Test that the Berry-Esseen ratio needs a positive variance."""
        constants = ChannelConstants(0.0, 0.0, 0.0, 0.1, 0.1, 0.0, 0.1)
        with pytest.raises(DegenerateVariance):
            constants.berry_esseen_ratio


class TestFirstOrderSlopes:
    """Test the leading log M / sqrt(n) constants."""

    def test_metric_parameters(self, default_constants):
        """Test omega, Gamma, Lambda and Upsilon."""
        expected = math.sqrt(0.02 / 0.040404)
        assert omega(DELTA, default_constants) == pytest.approx(expected, rel=1e-4)
        assert gamma_tv(DELTA) == pytest.approx(0.012533, abs=1e-5)
        lam, ups = lambda_upsilon(DELTA, ALPHA)
        assert lam == pytest.approx(-0.8064, abs=1e-4)
        assert ups == pytest.approx(0.8416, abs=1e-4)

    def test_slopes(self, default_constants):
        """Test the three first-order slopes."""
        slopes = first_order_slopes(DELTA, ALPHA, default_constants)
        assert slopes.slope_d == pytest.approx(1.1473, abs=1e-3)
        assert slopes.slope_v == pytest.approx(0.2034, abs=1e-3)
        assert slopes.slope_beta == pytest.approx(0.2856, abs=1e-3)

    def test_key_slopes_vanish_for_strong_receiver(self, default_constants):
        """Test that no key is needed when D_P exceeds D_Q."""
        slopes = first_order_slopes(DELTA, ALPHA, default_constants)
        assert slopes.key_slope_d == 0.0
        assert slopes.key_slope_v == 0.0
        assert slopes.key_slope_beta == 0.0
        assert set(slopes.as_dict()) >= {"omega", "slope_d", "slope_v", "slope_beta"}

    def test_key_slope_for_weak_receiver(self, bsc_pair):
        """Test a positive key slope when the warden channel is better."""
        constants = channel_constants(bsc_pair(0.3, 0.1))
        slopes = first_order_slopes(DELTA, ALPHA, constants, rho=0.5)
        expected = 1.5 * slopes.omega * (constants.d_q - constants.d_p)
        assert slopes.key_slope_d == pytest.approx(expected)

    @pytest.mark.parametrize("delta,alpha", [(0.5, 0.5), (0.01, 0.0), (0.01, 1.0)])
    def test_lambda_upsilon_domain(self, delta, alpha):
        """Test that alpha + delta must stay below one with alpha in (0, 1)."""
        with pytest.raises(DomainError):
            lambda_upsilon(delta, alpha)


class TestSecondOrder:
    """Test second-order expansions and envelopes."""

    def test_second_order_d(self, default_constants):
        """Test the two terms and the log band."""
        n = 10**6
        estimate = second_order_D(n, EPS, DELTA, default_constants)
        w = omega(DELTA, default_constants)
        assert estimate.first_order == pytest.approx(w * default_constants.d_p * 1000.0)
        expected_second = -math.sqrt(w * default_constants.v_p) * q_inverse(EPS) * n**0.25
        assert estimate.second_order == pytest.approx(expected_second)
        assert estimate.value == pytest.approx(estimate.first_order + estimate.second_order)
        assert estimate.band_low == pytest.approx(estimate.value - 2.0 * math.log(n))
        assert estimate.band_low < estimate.value < estimate.band_high

    def test_envelopes_ordered(self, default_constants):
        """Test lower <= upper for both envelope pairs over a grid."""
        for n in (10**3, 10**5, 10**8):
            v = second_order_V_envelopes(n, EPS, DELTA, default_constants)
            b = second_order_beta_envelopes(n, EPS, DELTA, ALPHA, default_constants)
            assert v.lower < v.upper
            assert b.lower < b.upper

    def test_envelope_upper_tracks_slope(self, default_constants):
        """Test that upper / sqrt(n) approaches the first-order slope."""
        slopes = first_order_slopes(DELTA, ALPHA, default_constants)
        n = 10**14
        v = second_order_V_envelopes(n, EPS, DELTA, default_constants)
        assert v.upper / math.sqrt(n) == pytest.approx(slopes.slope_v, rel=0.01)

    def test_eps_domain(self, default_constants):
        """Test that eps must lie in (0, 1)."""
        with pytest.raises(DomainError):
            second_order_D(1000, 0.0, DELTA, default_constants)


class TestCubic:
    """Test the trigonometric root of x^3 - p x + q."""

    @pytest.mark.parametrize("p,q", [(3.0, 1.0), (100.0, 50.0), (6711.0, 31311.0)])
    def test_root_solves_cubic(self, p, q):
        """Test that the root has a negligible residual and is the largest one."""
        x = cubic_root_trig(p, q)
        assert cubic_residual(x, p, q) < 1e-9
        assert x >= math.sqrt(p / 3.0)

    @pytest.mark.parametrize("p,q", [(0.0, 1.0), (-1.0, 0.0), (1.0, 10.0)])
    def test_complex_regime(self, p, q):
        """Test that a single real root raises ComplexRootRegime."""
        with pytest.raises(ComplexRootRegime):
            cubic_root_trig(p, q)


class TestPlanners:
    """Test the code planners."""

    def test_plan_d_budget(self, default_constants):
        """Test that ell_n is the largest pulse count inside the divergence budget."""
        n = 10**6
        plan = plan_D(n, EPS, DELTA, constants=default_constants, berry_esseen=False)
        budget = DELTA - 1.0 / math.sqrt(n)
        chi2 = default_constants.chi2_q
        assert plan.ell_n**2 * chi2 / (2.0 * n) <= budget
        assert (plan.ell_n + 1) ** 2 * chi2 / (2.0 * n) > budget
        assert plan.metric == "kl"
        assert plan.provenance == PROVENANCE_GAUSSIAN

    def test_plan_d_message_length(self, default_constants):
        """Test log M = ell D_P - sqrt(ell V_P) Q^-1(eps) - 2 log n without key."""
        n = 10**6
        plan = plan_D(n, EPS, DELTA, constants=default_constants, berry_esseen=False)
        ell = plan.ell_n
        expected = (
            ell * default_constants.d_p
            - math.sqrt(ell * default_constants.v_p) * q_inverse(EPS)
            - 2.0 * math.log(n)
        )
        assert plan.log_m_n == pytest.approx(expected)
        assert plan.log_k_n == 0.0
        assert plan.log_mk == plan.log_m_n
        assert any("Berry-Esseen" in c for c in plan.corrections)

    @pytest.mark.parametrize("n", [10**3, 10**4])
    def test_plan_d_infeasible(self, default_constants, n):
        """Test that delta <= 1/sqrt(n) leaves no divergence budget."""
        with pytest.raises(InfeasibleBlocklength):
            plan_D(n, EPS, DELTA, constants=default_constants, berry_esseen=False)

    def test_plan_d_needs_constants(self):
        """Test that constants are required."""
        with pytest.raises(DomainError):
            plan_D(10**6, EPS, DELTA)

    def test_plan_approaches_slope_from_below(self, default_constants):
        """Test a shrinking positive gap: below 4% at 1e8 and below 1% at 1e12."""
        slope = first_order_slopes(DELTA, ALPHA, default_constants).slope_d
        gaps = {
            10**k: asymptote_gap(
                plan_D(10**k, EPS, DELTA, constants=default_constants, berry_esseen=False), slope
            )
            for k in range(6, 13)
        }
        values = list(gaps.values())
        assert all(gap > 0.0 for gap in values)
        assert all(later < earlier for earlier, later in zip(values, values[1:]))
        assert gaps[10**8] < 0.04
        assert gaps[10**12] < 0.01

    def test_plan_v_complex_at_small_delta(self, default_constants):
        """Test that a tight variational budget has no real cubic root."""
        with pytest.raises(ComplexRootRegime):
            plan_V(10**6, EPS, DELTA, constants=default_constants, berry_esseen=False)

    def test_plan_v_loose_budget(self, default_constants):
        """Test the variational planner where the cubic has three real roots."""
        plan = plan_V(10**6, EPS, 0.5, constants=default_constants, berry_esseen=False)
        p, q = plan.parameters["p"], plan.parameters["q"]
        assert plan.ell_n == math.floor(cubic_root_trig(p, q) ** 2)
        assert plan.envelopes is not None
        assert plan.envelopes.lower < plan.envelopes.upper
        assert plan.metric == "tv"

    def test_plan_beta_complex_at_small_delta(self, default_constants):
        """Test that the beta planner hits the complex-root regime at these settings."""
        with pytest.raises(ComplexRootRegime):
            plan_beta(10**6, EPS, DELTA, ALPHA, constants=default_constants, berry_esseen=False)

    def test_key_length(self, default_constants):
        """Test log K = max(log M, (1+rho) ell D_Q) - log M."""
        assert key_length(100.0, 50, 0.1, default_constants) == 0.0
        expected = 1.1 * 50 * default_constants.d_q - 0.5
        assert key_length(0.5, 50, 0.1, default_constants) == pytest.approx(expected)


class TestMetricOrdering:
    """Test the ordering of the three first-order slopes."""

    def test_ordering_holds(self, default_constants):
        """Test D(delta) <= V(sqrt(delta/2)) <= min over alpha of beta."""
        report = metric_ordering_check(10**6, EPS, DELTA, default_constants)
        assert report.holds
        assert report.ratio_v_d > 1.0
        tv_delta = math.sqrt(DELTA / 2.0)
        assert report.alpha_star == pytest.approx((1.0 - tv_delta) / 2.0, abs=0.02)
        assert report.slope_beta_min == pytest.approx(report.slope_v, rel=1e-6)

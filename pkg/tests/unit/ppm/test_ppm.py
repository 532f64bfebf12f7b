"""Tests for PPM input laws, exact output metrics and leading-term bounds."""

import math

import numpy as np
import pytest

from covert_ppm.dmc_core import (
    CovertChannelPair,
    FiniteDistribution,
    chi_squared,
    kl_divergence,
    neyman_pearson,
    total_variation,
)
from covert_ppm.errors import (
    AbsoluteContinuityViolation,
    CombinatorialBlowup,
    DomainError,
    InvalidParams,
)
from covert_ppm.ppm import (
    EXACT_IDENTITY_FIELDS,
    PpmParams,
    f_xy_bound,
    f_xz_bound,
    information_density_law,
    information_density_sup,
    make_ppm,
    ppm_beta_bound,
    ppm_block_distribution,
    ppm_block_llr_law,
    ppm_divergence_bound,
    ppm_divergence_exact,
    ppm_exact_metrics,
    ppm_log_min_probability,
    ppm_moments,
    ppm_output_distribution,
    ppm_sequence_classes,
    ppm_ratio_expectation,
    ppm_support,
    ppm_tv_bound,
    sample_ppm_codeword,
    sample_ppm_codewords,
    score_a,
)


class TestPpmParams:
    """Test PPM parameter validation and window layout."""

    def test_window_layout(self):
        """Test m, r and the 1-based window boundaries."""
        params = make_ppm(10, 3)
        assert params.m == 3
        assert params.r == 1
        assert params.windows() == ((1, 3), (4, 6), (7, 9))
        assert params.support_size == 27

    @pytest.mark.parametrize("n,ell", [(5, 0), (5, 6), (5, -1)])
    def test_invalid_pulse_count(self, n, ell):
        """Test that ell outside [1, n] is rejected."""
        with pytest.raises(InvalidParams):
            PpmParams(n, ell)

    def test_non_integer(self):
        """Test that non-integer blocklengths are rejected."""
        with pytest.raises(InvalidParams):
            PpmParams(10.5, 2)

    def test_regime_flag(self):
        """Test that ell much larger than m is flagged."""
        assert make_ppm(100, 5).in_regime
        assert not make_ppm(100, 50).in_regime


class TestPpmSampling:
    """Test codeword sampling and support enumeration."""

    def test_one_pulse_per_window(self):
        """Test that every pulse lands inside its own window."""
        params = make_ppm(23, 4)
        words = sample_ppm_codewords(params, 500, 3)
        assert words.shape == (500, 4)
        for j, (first, last) in enumerate(params.windows()):
            assert words[:, j].min() >= first
            assert words[:, j].max() <= last

    def test_reproducible(self):
        """Test that a fixed seed gives the same codewords."""
        params = make_ppm(30, 5)
        np.testing.assert_array_equal(
            sample_ppm_codewords(params, 20, 11), sample_ppm_codewords(params, 20, 11)
        )

    def test_single_codeword(self):
        """Test that one codeword is the first row of the batch draw."""
        params = make_ppm(30, 5)
        word = sample_ppm_codeword(params, 11)
        assert isinstance(word, tuple)
        assert all(isinstance(i, int) for i in word)
        assert word == tuple(sample_ppm_codewords(params, 1, 11)[0])

    def test_support(self):
        """Test that the support lists every pulse pattern once."""
        params = make_ppm(7, 2)
        support = ppm_support(params)
        assert support.shape == (9, 2)
        assert len({tuple(row) for row in support}) == 9

    def test_support_cap(self):
        """Test that a large support raises CombinatorialBlowup."""
        with pytest.raises(CombinatorialBlowup):
            ppm_support(make_ppm(40, 4), cap=1000)


class TestExactOutputLaw:
    """Test the exact warden output law of a PPM input."""

    def test_single_position_window_is_q1(self, default_channel):
        """Test that a window of size one always carries the pulse."""
        block = ppm_block_distribution(default_channel, 1)
        np.testing.assert_allclose(block.probs, default_channel.q1.probs)

    def test_block_law_normalized(self, default_channel):
        """Test that the block law is a distribution."""
        block = ppm_block_distribution(default_channel, 4)
        assert len(block) == 16
        assert block.probs.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("n,ell", [(8, 2), (7, 3), (6, 1)])
    def test_kl_and_tv_match_enumeration(self, default_channel, n, ell):
        """Test the LLR-based metrics against full enumeration of Z^n."""
        params = make_ppm(n, ell)
        output = ppm_output_distribution(default_channel, params)
        null = default_channel.q0.power(n)
        metrics = ppm_exact_metrics(default_channel, params)
        assert metrics.kl == pytest.approx(kl_divergence(output, null), rel=1e-9, abs=1e-14)
        assert metrics.tv == pytest.approx(total_variation(output, null), rel=1e-9, abs=1e-14)
        assert ppm_divergence_exact(default_channel, params) == pytest.approx(metrics.kl, rel=1e-12)

    def test_random_channels_match_enumeration(self, random_channels):
        """Test exact metrics on random non-binary channels."""
        params = make_ppm(6, 2)
        for channel in random_channels(3, seed=5, max_outputs=3):
            output = ppm_output_distribution(channel, params)
            null = channel.q0.power(6)
            metrics = ppm_exact_metrics(channel, params)
            assert metrics.kl == pytest.approx(kl_divergence(output, null), rel=1e-8, abs=1e-12)
            assert metrics.tv == pytest.approx(
                total_variation(output, null), rel=1e-8, abs=1e-12
            )

    def test_block_llr_law(self, default_channel):
        """Test the per-window LLR laws against the enumerated block law."""
        law = ppm_block_llr_law(default_channel, 4)
        block = ppm_block_distribution(default_channel, 4)
        assert law.m == 4
        assert law.ppm.mean == pytest.approx(
            kl_divergence(block, default_channel.q0.power(4)), rel=1e-9
        )
        assert float(np.dot(law.null.probs, np.exp(law.null.values))) == pytest.approx(1.0)
        assert float(np.dot(law.ppm.probs, np.exp(-law.ppm.values))) == pytest.approx(1.0)

    def test_block_llr_law_window(self, default_channel):
        """Test that an empty window is rejected."""
        with pytest.raises(InvalidParams):
            ppm_block_llr_law(default_channel, 0)

    @pytest.mark.timeout(120)
    @pytest.mark.parametrize("n,ell", [(10, 1), (6, 2), (8, 2), (9, 2), (7, 3), (10, 3)])
    def test_beta_matches_enumeration(self, bsc_pair, n, ell):
        """Test beta against the likelihood-ratio search on Z^n, off the breakpoints too."""
        channel = bsc_pair(0.1, 0.3)
        params = make_ppm(n, ell)
        output = ppm_output_distribution(channel, params)
        null = channel.q0.power(n)
        for alpha in np.linspace(0.01, 0.99, 99):
            expected = neyman_pearson(float(alpha), null, output, "likelihood_ratio")
            metrics = ppm_exact_metrics(channel, params, alpha=float(alpha))
            assert metrics.beta == pytest.approx(expected.beta, abs=1e-10)
            assert metrics.false_alarm == pytest.approx(expected.false_alarm, abs=1e-10)

    @pytest.mark.timeout(60)
    def test_beta_matches_enumeration_random_channels(self, random_channels):
        """Test beta on random non-binary channels with trailing positions."""
        params = make_ppm(7, 2)
        for channel in random_channels(3, seed=9, max_outputs=3):
            output = ppm_output_distribution(channel, params)
            null = channel.q0.power(7)
            for alpha in (0.05, 0.21, 0.5, 0.83):
                expected = neyman_pearson(alpha, null, output, "likelihood_ratio").beta
                beta = ppm_exact_metrics(channel, params, alpha=alpha).beta
                assert beta == pytest.approx(expected, abs=1e-10)

    def test_sequence_classes_cover_z_n(self, default_channel):
        """Test that the classes count every sequence of Z^n once, with both laws normalized."""
        params = make_ppm(9, 2)
        classes = ppm_sequence_classes(default_channel, params)
        assert classes.multiplicity.sum() == pytest.approx(2**9)
        assert np.dot(classes.multiplicity, classes.null_mass) == pytest.approx(1.0)
        assert np.dot(classes.multiplicity, classes.alt_mass) == pytest.approx(1.0)

    def test_output_enumeration_cap(self, default_channel):
        """Test that large blocklengths refuse enumeration."""
        with pytest.raises(CombinatorialBlowup):
            ppm_output_distribution(default_channel, make_ppm(30, 3), cap=4096)

    def test_beta_detector_bounded_by_tv(self, default_channel):
        """Test 1 - alpha - beta <= V for the likelihood-ratio detector."""
        metrics = ppm_exact_metrics(default_channel, make_ppm(40, 4), alpha=0.2)
        assert 0.0 <= metrics.beta <= 1.0
        assert metrics.false_alarm <= 0.2 + 1e-12
        assert 1.0 - metrics.false_alarm - metrics.beta <= metrics.tv + 1e-12

    def test_score_needs_absolute_continuity(self):
        """Test that A(z) refuses Q1 not dominated by Q0."""
        channel = CovertChannelPair(
            FiniteDistribution.bsc_row(0.1, 0),
            FiniteDistribution.bsc_row(0.1, 1),
            FiniteDistribution((0, 1), [1.0, 0.0]),
            FiniteDistribution((0, 1), [0.5, 0.5]),
            allow_degenerate=True,
        )
        with pytest.raises(AbsoluteContinuityViolation):
            score_a(channel)


class TestLeadingTermBounds:
    """Test the closed-form PPM covertness bounds."""

    def test_divergence_bound_formula(self, default_channel):
        """Test ell^2 chi2 / (2n)."""
        chi2 = chi_squared(default_channel.q1, default_channel.q0)
        bound = ppm_divergence_bound(default_channel, 10**4, 30)
        assert bound.value == pytest.approx(900 * chi2 / 2e4)
        assert bound.residual == "O(1/sqrt(n))"

    def test_divergence_bound_near_exact(self, default_channel):
        """Test that the leading term tracks the exact divergence for large windows."""
        params = make_ppm(4000, 20)
        exact = ppm_divergence_exact(default_channel, params)
        bound = ppm_divergence_bound(default_channel, 4000, 20).value
        assert exact == pytest.approx(bound, rel=0.05)

    def test_tv_bound_clipped(self, default_channel):
        """Test that the variational bound lies in [0, 1]."""
        for ell in (1, 10, 100):
            value = ppm_tv_bound(default_channel, 10**5, ell).value
            assert 0.0 <= value <= 1.0
        assert ppm_tv_bound(default_channel, 10**5, 1).value == 1.0

    def test_beta_bound_domain(self, default_channel):
        """Test that alpha + 1/sqrt(ell) must stay below one."""
        with pytest.raises(DomainError):
            ppm_beta_bound(default_channel, 10**4, 1, 0.5)
        value = ppm_beta_bound(default_channel, 10**6, 400, 0.05).value
        assert 0.0 <= value <= 1.0

    def test_ratio_expectation(self, default_channel):
        """Test the exact second moment and its exponential bound."""
        params = make_ppm(100, 10)
        chi2 = chi_squared(default_channel.p1, default_channel.p0)
        result = ppm_ratio_expectation(default_channel, params)
        assert result.exact == pytest.approx((1.0 + chi2 / 10) ** 10)
        assert result.bound_in_regime
        assert result.bound >= result.exact


class TestWindowMoments:
    """Test exact window moments against their closed forms."""

    @pytest.mark.parametrize("m", [1, 3, 8])
    def test_identities_hold(self, default_channel, m):
        """Test that the B-moment identities are exact under both laws."""
        report = ppm_moments(default_channel, m)
        for tilted in (False, True):
            exact = (report.tilted if tilted else report.null).as_dict()
            closed = (report.closed_tilted if tilted else report.closed_null).as_dict()
            for name in EXACT_IDENTITY_FIELDS:
                assert exact[name] == pytest.approx(
                    closed[name], abs=1e-10 * max(1.0, abs(closed[name]))
                ), name

    def test_signs_of_c(self, default_channel):
        """Test that E[C] is negative under the null and positive under PPM."""
        report = ppm_moments(default_channel, 5)
        assert report.e_c_sign == -1
        assert report.tilted.e_c > 0

    def test_doubling_identity(self, default_channel):
        """Test D(P_Z^{2m,2} || Q0^{2m}) = 2 E_PPM[C] for window m."""
        report = ppm_moments(default_channel, 6)
        assert ppm_divergence_exact(default_channel, make_ppm(12, 2)) == pytest.approx(
            2.0 * report.tilted.e_c, rel=1e-10
        )

    def test_invalid_window(self, default_channel):
        """Test that a zero window is rejected."""
        with pytest.raises(InvalidParams):
            ppm_moments(default_channel, 0)


class TestInformationDensityTails:
    """Test tail bounds on the information densities."""

    def test_receiver_tail(self, default_channel, default_constants):
        """Test that the exact receiver tail sits under its bound."""
        ell = 8
        gamma = ell * default_constants.d_p - 2.0 * math.sqrt(ell * default_constants.v_p)
        tail = f_xy_bound(default_channel, ell, gamma)
        assert tail.exact is not None
        assert tail.exact <= tail.bound

    def test_receiver_tail_without_exact(self, default_channel):
        """Test that exact=False skips the enumeration."""
        assert f_xy_bound(default_channel, 4, 1.0, exact=False).exact is None

    def test_receiver_tail_domain(self, default_channel):
        """Test that ell must be positive."""
        with pytest.raises(DomainError):
            f_xy_bound(default_channel, 0, 0.0)

    def test_warden_tail(self, default_channel):
        """Test the Hoeffding bound against the exact warden tail."""
        params = make_ppm(40, 4)
        d_q = kl_divergence(default_channel.q1, default_channel.q0)
        tail = f_xz_bound(default_channel, 4, 4 * d_q + 0.5, params=params)
        assert tail.exact is not None
        assert tail.exact <= tail.bound + 1e-12

    def test_warden_tail_domain(self, default_channel):
        """Test that gamma below ell D_Q is rejected."""
        with pytest.raises(DomainError):
            f_xz_bound(default_channel, 4, 0.0)

    def test_density_supremum(self, default_channel):
        """Test that no atom of i(X;Z) exceeds the closed-form supremum."""
        params = make_ppm(12, 3)
        law = information_density_law(default_channel, params)
        assert law.values.max() <= information_density_sup(default_channel, params) + 1e-12

    def test_log_min_probability(self, default_channel):
        """Test the smallest output probability against enumeration."""
        params = make_ppm(7, 2)
        output = ppm_output_distribution(default_channel, params)
        smallest = float(output.probs[output.probs > 0].min())
        assert ppm_log_min_probability(default_channel, params) == pytest.approx(
            math.log(smallest), rel=1e-9
        )

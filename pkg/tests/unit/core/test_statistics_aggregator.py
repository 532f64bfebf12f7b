"""Tests for statistics aggregation and unit conversion."""

import math
from unittest.mock import Mock

import pytest

from covert_ppm.statistics_aggregator import (
    ProgressReporter,
    aggregate_key_statistics,
    binomial_sigma,
    convert_information,
    format_information,
    wilson_interval,
)


class TestInformationUnits:
    """Test nats/bits conversion and formatting."""

    def test_convert(self):
        """Test that log 2 nats is one bit."""
        assert convert_information(math.log(2.0), "bits") == pytest.approx(1.0)
        assert convert_information(1.5, "nats") == 1.5

    def test_format(self):
        """Test formatting in both units."""
        assert format_information(12.5) == "12.5 nats"
        assert format_information(math.log(2.0) * 3, "bits") == "3 bits"

    def test_unknown_unit(self):
        """Test that unknown units raise ValueError."""
        with pytest.raises(ValueError):
            convert_information(1.0, "hartleys")
        with pytest.raises(ValueError):
            format_information(1.0, "dits")


class TestBinomialIntervals:
    """Test Wilson intervals and binomial spread."""

    def test_wilson_contains_estimate(self):
        """Test that the interval brackets the empirical rate."""
        low, high = wilson_interval(30, 1000)
        assert low < 0.03 < high
        assert 0.0 <= low and high <= 1.0

    def test_wilson_zero_failures(self):
        """Test that zero failures give a zero lower bound and a positive upper bound."""
        low, high = wilson_interval(0, 100)
        assert low == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < high < 0.05

    def test_wilson_narrows_with_trials(self):
        """Test that more trials give a tighter interval."""
        small = wilson_interval(10, 100)
        large = wilson_interval(1000, 10000)
        assert large[1] - large[0] < small[1] - small[0]

    def test_wilson_no_trials(self):
        """Test that no trials give the vacuous interval."""
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_binomial_sigma(self):
        """Test sqrt(p(1-p)/n)."""
        assert binomial_sigma(0.5, 100) == pytest.approx(0.05)
        assert binomial_sigma(0.0, 100) == 0.0
        assert binomial_sigma(0.5, 0) == math.inf


class TestAggregateKeyStatistics:
    """Test per-key error aggregation."""

    def test_aggregate(self):
        """Test totals, average and worst key."""
        result = aggregate_key_statistics(
            {
                0: {"errors": 2, "trials": 100},
                1: {"errors": 9, "trials": 100},
                2: {"errors": 1, "trials": 50},
            }
        )
        assert result["total_errors"] == 12
        assert result["total_trials"] == 250
        assert result["average_error"] == pytest.approx(12 / 250)
        assert result["max_error"] == pytest.approx(0.09)
        assert result["worst_key"] == 1

    def test_aggregate_empty(self):
        """Test that no keys give zero rates and no worst key."""
        result = aggregate_key_statistics({})
        assert result["total_trials"] == 0
        assert result["average_error"] == 0.0
        assert result["worst_key"] is None


class TestProgressReporter:
    """Test the thread-safe progress counter."""

    def test_callback_stride(self):
        """Test that the callback fires on each stride and at completion."""
        callback = Mock()
        reporter = ProgressReporter(total=5, update_callback=callback, every=2)
        for _ in range(5):
            reporter.advance()
        assert reporter.completed == 5
        assert [c.args for c in callback.call_args_list] == [(2, 5), (4, 5), (5, 5)]

    def test_without_callback(self):
        """Test counting with no callback."""
        reporter = ProgressReporter(total=3)
        assert reporter.advance(2) == 2
        assert reporter.advance() == 3

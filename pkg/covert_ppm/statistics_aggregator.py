"""Statistics aggregation utilities for Monte Carlo runs and report formatting."""

import math
import threading
from typing import Any, Callable, Dict, Optional, Tuple

from scipy import stats

NATS_PER_BIT = math.log(2.0)


def format_information(value_nats: float, unit: str = "nats") -> str:
    """Format an amount of information in the requested unit.

    Args:
        value_nats: Amount in nats
        unit: "nats" or "bits"

    Returns:
        Formatted string (e.g., "12.5 nats", "18.03 bits")
    """
    if unit == "bits":
        return f"{value_nats / NATS_PER_BIT:.4g} bits"
    if unit == "nats":
        return f"{value_nats:.4g} nats"
    raise ValueError(f"unknown unit {unit!r}")


def convert_information(value_nats: float, unit: str = "nats") -> float:
    """Convert nats to the requested unit."""
    if unit == "bits":
        return value_nats / NATS_PER_BIT
    if unit == "nats":
        return value_nats
    raise ValueError(f"unknown unit {unit!r}")


def wilson_interval(
    failures: int, trials: int, confidence: float = 0.95
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Args:
        failures: Number of observed events
        trials: Number of trials
        confidence: Two-sided confidence level

    Returns:
        (low, high) bounds on the event probability
    """
    if trials <= 0:
        return 0.0, 1.0
    z = float(stats.norm.isf((1.0 - confidence) / 2.0))
    phat = failures / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def binomial_sigma(probability: float, trials: int) -> float:
    """Standard deviation of an empirical frequency over trials."""
    if trials <= 0:
        return math.inf
    return math.sqrt(max(probability * (1.0 - probability), 0.0) / trials)


def aggregate_key_statistics(key_statistics: Dict[int, Dict[str, Any]]) -> Dict[str, Any]:
    """Aggregate per-key error counts.

    Args:
        key_statistics: Mapping key index -> {"errors": int, "trials": int}

    Returns:
        Dictionary with total_errors, total_trials, average_error, max_error and worst_key
    """
    total_errors = sum(s.get("errors", 0) for s in key_statistics.values())
    total_trials = sum(s.get("trials", 0) for s in key_statistics.values())
    rates = {
        key: s["errors"] / s["trials"] for key, s in key_statistics.items() if s.get("trials")
    }
    worst_key = max(rates, key=lambda k: rates[k]) if rates else None
    return {
        "total_errors": total_errors,
        "total_trials": total_trials,
        "average_error": total_errors / total_trials if total_trials else 0.0,
        "max_error": rates[worst_key] if worst_key is not None else 0.0,
        "worst_key": worst_key,
    }


class ProgressReporter:
    """Thread-safe progress counter for fanned-out experiment tasks."""

    def __init__(
        self,
        total: int,
        update_callback: Optional[Callable[[int, int], None]] = None,
        every: int = 1,
    ):
        """Initialize progress reporter.

        Args:
            total: Number of tasks expected
            update_callback: Called with (completed, total) after every `every` tasks
            every: Reporting stride
        """
        self.total = total
        self.update_callback = update_callback
        self.every = max(1, every)
        self._completed = 0
        self._lock = threading.Lock()

    @property
    def completed(self) -> int:
        with self._lock:
            return self._completed

    def advance(self, count: int = 1) -> int:
        """Mark tasks as done and notify the callback when a stride is crossed."""
        with self._lock:
            before = self._completed
            self._completed += count
            done = self._completed
        crossed = done // self.every > before // self.every or done >= self.total
        if self.update_callback is not None and crossed:
            self.update_callback(done, self.total)
        return done

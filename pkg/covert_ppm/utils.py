"""Small validation and log-domain helpers shared across modules."""

import math
from typing import List, Union

from .errors import DomainError

Number = Union[int, float]


def is_valid_probability(value: float) -> bool:
    """Check if a value is a finite probability in [0, 1]."""
    try:
        return math.isfinite(value) and 0.0 <= value <= 1.0
    except TypeError:
        return False


def require_open_unit(value: float, name: str) -> float:
    """Return value if it lies in (0, 1), else raise DomainError."""
    if not (is_valid_probability(value) and 0.0 < value < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def require_positive(value: float, name: str) -> float:
    """Return value if it is finite and > 0, else raise DomainError."""
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive, got {value!r}")
    return float(value)


def log_of(value: Number) -> float:
    """Natural log that also accepts Python integers too large for a float."""
    if value <= 0:
        raise DomainError(f"log of non-positive value {value!r}")
    return math.log(value)


def exp_neg_exp(log_x: float) -> float:
    """Evaluate exp(-x) given log x, without overflow for huge x."""
    if log_x > 709.0:
        return 0.0
    return math.exp(-math.exp(log_x))


def safe_exp(x: float) -> float:
    """exp(x) saturated at float max instead of raising OverflowError."""
    if x > 709.0:
        return math.inf
    return math.exp(x)


def parse_float_list(text: str) -> List[float]:
    """Parse a comma separated list of floats ("0.55, 0.45")."""
    items = [item.strip() for item in text.split(",") if item.strip()]
    return [float(item) for item in items]

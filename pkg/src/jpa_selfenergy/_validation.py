"""Small argument checks used at public entry points."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


def check_positive(value, name: str) -> float:
    """Return ``value`` as a float, raising if it is not finite and > 0."""
    try:
        x = float(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return x


def check_nonnegative(value, name: str) -> float:
    """Return ``value`` as a float, raising if it is negative or not finite."""
    try:
        x = float(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"{name} must be non-negative and finite, got {value!r}")
    return x


def positive_array(values, name: str) -> np.ndarray:
    """Convert to a float array and require every entry to be finite and > 0."""
    arr = np.asarray(values, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0)):
        raise DomainError(f"{name} must be positive and finite everywhere")
    return arr

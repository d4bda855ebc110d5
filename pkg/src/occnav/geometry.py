"""Small shared 2D helpers used across the package."""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to the interval (-pi, pi]."""
    return math.pi - (math.pi - a) % TWO_PI


def wrap_angles(a: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_angle`."""
    return np.pi - (np.pi - np.asarray(a, dtype=float)) % TWO_PI


def unit_from_angle(a: float) -> np.ndarray:
    return np.array([math.cos(a), math.sin(a)])


def as_point(p) -> np.ndarray:
    """Coerce to a finite (2,) float array."""
    q = np.asarray(p, dtype=float).reshape(-1)
    if q.shape != (2,):
        raise ValueError(f"expected a 2D point, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError(f"point coordinates must be finite, got {q}")
    return q

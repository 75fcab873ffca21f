"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class DegenerateLevelError(RuntimeError):
    """A level-set computation met a vanishing gradient where one is required."""


def as_float(x, name: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a real number, got {x!r}") from exc
    if np.isnan(v):
        raise ValidationError(f"{name} must not be NaN")
    return v


def as_finite_float(x, name: str) -> float:
    v = as_float(x, name)
    if not np.isfinite(v):
        raise ValidationError(f"{name} must be finite, got {v!r}")
    return v


def check_positive(x, name: str) -> float:
    v = as_finite_float(x, name)
    if v <= 0:
        raise ValidationError(f"{name} must be positive, got {v!r}")
    return v


def check_nonnegative_time(t, name: str = "t") -> float:
    """Times may be any nonnegative real, including +inf (the symmetrization limit)."""
    v = as_float(t, name)
    if v < 0:
        raise ValidationError(f"{name} must be >= 0, got {v!r}")
    return v


def as_float_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must have {ndim} dimension(s), got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite everywhere")
    return arr


def check_axis(axis: int, dim: int) -> int:
    axis = int(axis)
    if not 0 <= axis < dim:
        raise ValidationError(f"axis must be in [0, {dim}), got {axis}")
    return axis

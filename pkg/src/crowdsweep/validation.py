"""Input validation helpers used across the package."""

import numpy as np

from .errors import ParameterOutOfRange, PreconditionViolated


def check_positions(X, *, name="X", dim=None):
    """Validate an (N, d) array of particle positions.

    Accepts anything array-like, returns a float64 C-contiguous copy.
    Raises ``PreconditionViolated`` on wrong shape or non-finite entries.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise PreconditionViolated(f"{name} must be an (N, d) array, got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise PreconditionViolated(f"{name} must have dimension {dim}, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise PreconditionViolated(f"{name} contains non-finite coordinates")
    return np.ascontiguousarray(X)


def check_point(x, *, name="x", dim=None):
    """Validate a single point, returned as a 1-d float64 array."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if dim is not None and x.shape[0] != dim:
        raise PreconditionViolated(f"{name} must have dimension {dim}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise PreconditionViolated(f"{name} is not finite")
    return x


def check_scalar(value, *, name, minimum=None, maximum=None, strict_min=False):
    """Validate a finite scalar, optionally inside an interval."""
    value = float(value)
    if not np.isfinite(value):
        raise ParameterOutOfRange(f"{name} must be finite, got {value}")
    if minimum is not None:
        if strict_min and value <= minimum:
            raise ParameterOutOfRange(f"{name} must be > {minimum}, got {value}")
        if not strict_min and value < minimum:
            raise ParameterOutOfRange(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ParameterOutOfRange(f"{name} must be <= {maximum}, got {value}")
    return value


def check_unit_interval(t, *, name="t"):
    """Validate a parameter in [0, 1]."""
    return check_scalar(t, name=name, minimum=0.0, maximum=1.0)


def check_rng(seed_or_rng):
    """Coerce a seed or Generator into a numpy Generator (PCG64, 64-bit seed)."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.Generator(np.random.PCG64(int(seed_or_rng)))

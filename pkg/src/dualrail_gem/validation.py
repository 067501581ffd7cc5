"""Input checks shared by the estimators and the config layer."""
import numbers

import numpy as np

from .polarisation import PolarisationState


def check_pulses(X, *, ensure_2d=True, allow_empty=False):
    """Return pulse envelopes as a complex ``(n_pulses, n_samples)`` array.

    A single 1-D envelope is promoted to one row.  NaN/inf and object dtypes
    are rejected.
    """
    arr = np.asarray(X)
    if arr.dtype == object:
        raise ValueError("pulse envelopes must be numeric")
    arr = arr.astype(complex)
    if arr.ndim == 1 and ensure_2d:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 1-D envelope or 2-D array of envelopes, got shape {arr.shape}")
    if not allow_empty and arr.shape[1] < 2:
        raise ValueError("pulse envelopes need at least two samples")
    if not np.all(np.isfinite(arr)):
        raise ValueError("pulse envelopes contain NaN or inf")
    return arr


def check_scalar(x, name, *, min_val=None, max_val=None, include_min=True, kind=numbers.Real):
    """Validate a scalar parameter and return it."""
    if isinstance(x, bool) or not isinstance(x, kind):
        raise TypeError(f"{name} must be {kind.__name__}, got {type(x).__name__}")
    if min_val is not None and (x < min_val or (x == min_val and not include_min)):
        op = ">=" if include_min else ">"
        raise ValueError(f"{name} {op} {min_val} required, got {x}")
    if max_val is not None and x > max_val:
        raise ValueError(f"{name} <= {max_val} required, got {x}")
    return x


def check_polarisation(p):
    """Accept a PolarisationState, a label ('H', 'V', ...) or an (a_L, a_R) pair."""
    if isinstance(p, PolarisationState):
        return p.normalized()
    if isinstance(p, str):
        return PolarisationState.from_label(p)
    a = np.asarray(p, dtype=complex).ravel()
    if a.size != 2:
        raise ValueError("polarisation must be a label or an (a_L, a_R) pair")
    return PolarisationState(complex(a[0]), complex(a[1])).normalized()

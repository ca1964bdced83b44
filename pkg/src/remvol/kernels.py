"""Backend dispatch for the event-window accumulation kernels.

The compiled extension is preferred when it imported cleanly; the
NumPy implementation is the fallback.  Set REMVOL_PURE_PYTHON=1 to
force the fallback (used by the equivalence tests and the benchmark).
Both backends implement the same three functions and agree to float
accumulation order.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("REMVOL_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND

__all__ = ["BACKEND", "window_stats", "omori_stats", "bootstrap_stats"]


def _coerce(values, included, events):
    values = np.ascontiguousarray(values, dtype=np.float64)
    included = np.ascontiguousarray(included, dtype=np.uint8)
    events = np.ascontiguousarray(events, dtype=np.int64)
    if included.shape != values.shape:
        raise ValueError("included mask must match values length")
    if events.size and (events.min() < 0 or events.max() >= values.size):
        raise ValueError("event index out of range")
    return values, included, events


def window_stats(values, included, events, step: int, t_max: int):
    """Per-lag (count, sum, sum-of-squares) over event windows.

    Lag k looks at index t' + step*k for every event t'; out-of-range
    or excluded bars simply do not contribute.
    """
    values, included, events = _coerce(values, included, events)
    if step not in (-1, 1):
        raise ValueError("step must be +1 or -1")
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    return _impl.window_stats(values, included, events, step, t_max)


def omori_stats(values, included, events, step: int, t_max: int, thresh: float):
    """Per-lag stats of cumulative exceedance counts over event windows.

    Returns (contributing, sum, sum-of-squares) of the per-event counts
    #{1 <= j <= k : value at t' + step*j > thresh}, with counts frozen
    where windows leave the series.
    """
    values, included, events = _coerce(values, included, events)
    if step not in (-1, 1):
        raise ValueError("step must be +1 or -1")
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    return _impl.omori_stats(values, included, events, step, t_max, float(thresh))


def bootstrap_stats(values, included, events, step: int, t_max: int, weights):
    """Weighted per-lag window sums for a batch of bootstrap replicates.

    weights is (B, n_events); returns (ws, wc, wz) where ws[b, k] and
    wc[b, k] are the weighted value sum and weighted contributor count
    at lag k for replicate b, and wz[b] weights the event values
    themselves (the numerator of the replicate's Z).
    """
    values, included, events = _coerce(values, included, events)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[1] != events.size:
        raise ValueError("weights must have shape (B, n_events)")
    if step not in (-1, 1):
        raise ValueError("step must be +1 or -1")
    return _impl.bootstrap_stats(values, included, events, step, t_max, weights)

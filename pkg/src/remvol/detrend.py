"""Intraday volatility pattern estimation and removal.

High-frequency volatility carries a strong time-of-day modulation.  The
pattern D(s) is the across-day mean volatility at intraday slot s;
dividing each bar by the pattern of its slot yields the normalized
volatility r(t) whose per-slot mean is 1 by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .series import DataError, VolatilitySeries, _freeze, _included_sigma

__all__ = ["IntradayPattern", "estimate_pattern", "normalize"]


@dataclass(frozen=True)
class IntradayPattern:
    """Mean volatility per intraday slot.

    ``pattern[s]`` averages the non-excluded bars observed at slot s
    across all trading days; ``degenerate[s]`` flags slots whose mean is
    exactly 0 (possible only if every day is flat there).  ``day_count``
    is the number of trading days the estimate saw.
    """

    pattern: np.ndarray
    day_count: int
    degenerate: np.ndarray

    def __post_init__(self):
        pat = np.asarray(self.pattern, dtype=np.float64)
        if np.any(pat < 0):
            raise DataError("pattern values must be non-negative")
        object.__setattr__(self, "pattern", _freeze(pat))
        object.__setattr__(self, "degenerate", _freeze(np.asarray(self.degenerate, dtype=bool)))

    def __len__(self) -> int:
        return self.pattern.size


def estimate_pattern(vol: VolatilitySeries) -> IntradayPattern:
    """Estimate the intraday pattern of a minute-scale series.

    The slot mean runs over the bars actually present at that slot, so a
    slot missing on some days (the first day has no bar at slot 0, and
    missing bars are tolerated) is averaged over the days that have it.

    Raises
    ------
    DataError
        For daily data, or when trading days have differing slot
        layouts.
    """
    if vol.bar_interval == 0:
        raise DataError("daily data has no intraday pattern")
    sizes = vol.day_sizes
    if sizes.size and not np.all(sizes == sizes[0]):
        raise DataError("ragged trading days: slot layouts differ")
    n_slots = vol.slots_per_day
    inc = vol.included
    slots = vol.slot_index[inc]
    vals = vol.values[inc]
    count = np.bincount(slots, minlength=n_slots).astype(np.float64)
    total = np.bincount(slots, weights=vals, minlength=n_slots)
    with np.errstate(invalid="ignore"):
        pattern = np.where(count > 0, total / np.maximum(count, 1), 0.0)
    return IntradayPattern(
        pattern=pattern,
        day_count=int(sizes.size),
        degenerate=pattern == 0.0,
    )


def normalize(vol: VolatilitySeries, pattern: IntradayPattern) -> VolatilitySeries:
    """Divide each bar by the pattern of its slot: r(t) = |R(t)|/D(s).

    Bars at degenerate slots (D = 0) keep value 0 when their own value
    is 0; a nonzero value at a degenerate slot is an error.  sigma is
    recomputed on r over the included bars, so downstream selection uses
    the normalized scale.
    """
    if len(pattern) != vol.slots_per_day:
        raise DataError(
            f"pattern has {len(pattern)} slots, series has {vol.slots_per_day}"
        )
    d = pattern.pattern[vol.slot_index]
    degen = pattern.degenerate[vol.slot_index]
    # Excluded bars never contribute downstream, so only an included bar
    # can "hit" a degenerate slot (e.g. slot 0 under overnight exclusion).
    if np.any(degen & vol.included & (vol.values > 0)):
        raise DataError("nonzero volatility at a degenerate pattern slot")
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(degen, 0.0, vol.values / np.where(degen, 1.0, d))
    return replace(
        vol,
        values=r,
        sigma=_included_sigma(r, vol.excluded),
        normalized=True,
    )

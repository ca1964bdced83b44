"""Price ingestion, log-returns, and volatility series.

The volatility of a price series is the absolute log-return
|R(t)| = |ln P(t+1) - ln P(t)|.  A bar t spans observations t and t+1;
its trading day, intraday slot, and calendar date follow the later
endpoint, so a close-to-open move is reported under the session it
opens.  sigma is the arithmetic mean of the volatilities over bars not
excluded by the active overnight policy.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from datetime import datetime

import numpy as np

__all__ = [
    "DataError",
    "PriceSeries",
    "VolatilitySeries",
    "ingest_prices",
    "compute_returns",
    "apply_overnight_policy",
]


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PriceSeries:
    """An ordered price history split into trading days.

    Parameters
    ----------
    timestamps : ndarray of datetime64[s]
        Strictly increasing observation times.
    prices : ndarray of float
        Positive prices, one per timestamp.
    bar_interval : int
        Bar length in minutes; 0 denotes daily data.
    day_boundaries : ndarray of int
        Indices of the first observation of each trading day (always
        starts with 0).  Days are delimited by the calendar date of the
        timestamp; no venue holiday calendar is consulted.
    """

    timestamps: np.ndarray
    prices: np.ndarray
    bar_interval: int
    day_boundaries: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        px = np.asarray(self.prices, dtype=np.float64)
        if ts.shape != px.shape or ts.ndim != 1:
            raise DataError("timestamps and prices must be 1-D and equal length")
        if ts.size >= 2 and not np.all(ts[1:] > ts[:-1]):
            raise DataError("timestamps must be strictly increasing")
        if np.any(px <= 0) or not np.all(np.isfinite(px)):
            raise DataError("all prices must be positive and finite")
        db = np.asarray(self.day_boundaries, dtype=np.int64)
        object.__setattr__(self, "timestamps", _freeze(ts))
        object.__setattr__(self, "prices", _freeze(px))
        object.__setattr__(self, "day_boundaries", _freeze(db))

    def __len__(self) -> int:
        return self.prices.size

    @property
    def observations(self) -> list[tuple[datetime, float]]:
        """Observations as (timestamp, price) pairs."""
        stamps = self.timestamps.astype("datetime64[s]").tolist()
        return list(zip(stamps, self.prices.tolist()))

    @property
    def n_days(self) -> int:
        return self.day_boundaries.size

    @property
    def day_sizes(self) -> np.ndarray:
        """Observation count of each trading day."""
        ends = np.append(self.day_boundaries[1:], len(self))
        return ends - self.day_boundaries

    def obs_dates(self) -> np.ndarray:
        """Calendar date of every observation, as datetime64[D]."""
        return self.timestamps.astype("datetime64[D]")

    def obs_day_index(self) -> np.ndarray:
        """Trading-day ordinal of every observation."""
        n = len(self)
        idx = np.zeros(n, dtype=np.int64)
        idx[self.day_boundaries[1:]] = 1
        return np.cumsum(idx)


@dataclass(frozen=True)
class VolatilitySeries:
    """Per-bar volatilities with day/slot structure and exclusion mask.

    ``values[t]`` is |R(t)| for raw series or the normalized r(t) after
    detrending.  ``signs[t]`` keeps the sign of R(t) for crash/rally
    tagging.  ``excluded`` marks bars removed by the active overnight
    policy; excluded bars never contribute to any average and are never
    selected as events, but they stay in place so lag arithmetic keeps
    the original integer time axis.
    """

    values: np.ndarray
    signs: np.ndarray
    overnight_mask: np.ndarray
    excluded: np.ndarray
    slot_index: np.ndarray
    day_index: np.ndarray
    day_sizes: np.ndarray
    bar_interval: int
    sigma: float
    normalized: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if np.any(vals < 0):
            raise DataError("volatilities must be non-negative")
        for name in ("values", "signs", "overnight_mask", "excluded",
                     "slot_index", "day_index", "day_sizes"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name))))

    def __len__(self) -> int:
        return self.values.size

    @property
    def included(self) -> np.ndarray:
        """Boolean mask of bars that participate in averages."""
        return ~self.excluded

    @property
    def slots_per_day(self) -> int:
        """Observation slots per trading day (maximum over days)."""
        return int(self.day_sizes.max()) if self.day_sizes.size else 0


def _included_sigma(values: np.ndarray, excluded: np.ndarray) -> float:
    kept = values[~excluded]
    if kept.size == 0:
        raise DataError("overnight policy excludes every bar")
    return float(kept.mean())


def ingest_prices(source, bar_interval: int) -> PriceSeries:
    """Parse a price CSV into a PriceSeries.

    Parameters
    ----------
    source : path, str, or file-like
        CSV with one ``timestamp,price`` record per line, timestamp in
        ISO-8601.  Lines beginning with ``#`` are ignored; a single
        leading header row is tolerated.
    bar_interval : int
        Bar length in minutes; 0 for daily data.

    Raises
    ------
    DataError
        On a malformed row (reported with its line number), a
        non-positive price, or unsorted timestamps.
    """
    if bar_interval < 0:
        raise DataError("bar_interval must be >= 0")
    close = False
    if hasattr(source, "read"):
        stream = source
    else:
        stream = open(source, "rb")
        close = True
    try:
        raw = stream.read()
    finally:
        if close:
            stream.close()
    if isinstance(raw, bytes):
        text = raw.decode("utf-8")
    else:
        text = raw

    stamps: list[np.datetime64] = []
    prices: list[float] = []
    first_row = True
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if '"' in stripped:
            parts = next(csv.reader(io.StringIO(stripped)))
        else:
            parts = stripped.split(",")
        if len(parts) < 2:
            raise DataError(f"line {lineno}: expected 'timestamp,price'")
        ts_text, px_text = parts[0].strip(), parts[1].strip()
        try:
            ts = datetime.fromisoformat(ts_text)
            px = float(px_text)
        except ValueError:
            if first_row:
                # Optional header row.
                first_row = False
                continue
            raise DataError(f"line {lineno}: malformed row {stripped!r}") from None
        first_row = False
        if not np.isfinite(px) or px <= 0:
            raise DataError(f"line {lineno}: non-positive price {px_text!r}")
        stamps.append(np.datetime64(ts, "s"))
        prices.append(px)

    if not stamps:
        raise DataError("no data rows in input")
    ts_arr = np.array(stamps, dtype="datetime64[s]")
    if ts_arr.size >= 2 and not np.all(ts_arr[1:] > ts_arr[:-1]):
        bad = int(np.argmin(ts_arr[1:] > ts_arr[:-1]))
        raise DataError(f"timestamps not strictly increasing at row {bad + 2}")

    dates = ts_arr.astype("datetime64[D]")
    new_day = np.ones(ts_arr.size, dtype=bool)
    new_day[1:] = dates[1:] != dates[:-1]
    boundaries = np.flatnonzero(new_day)
    return PriceSeries(ts_arr, np.array(prices), bar_interval, boundaries)


def compute_returns(prices: PriceSeries) -> VolatilitySeries:
    """Compute per-bar volatilities |R(t)| = |ln P(t+1) - ln P(t)|.

    The result has exactly ``len(prices) - 1`` bars.  ``overnight_mask``
    is true where the bar spans a day boundary; for daily data it is all
    false, since every daily return is an inter-day return by
    construction.  No exclusion policy is active yet.
    """
    if len(prices) < 2:
        raise DataError("need at least 2 observations to compute returns")
    logp = np.log(prices.prices)
    returns = np.diff(logp)
    values = np.abs(returns)
    signs = np.sign(returns).astype(np.int8)

    obs_day = prices.obs_day_index()
    obs_in_day = np.arange(len(prices)) - prices.day_boundaries[obs_day]
    # Bar t follows its later endpoint, observation t+1.
    day_index = obs_day[1:]
    slot_index = obs_in_day[1:]
    if prices.bar_interval == 0:
        overnight = np.zeros(values.size, dtype=bool)
    else:
        overnight = obs_day[1:] != obs_day[:-1]
    excluded = np.zeros(values.size, dtype=bool)
    return VolatilitySeries(
        values=values,
        signs=signs,
        overnight_mask=overnight,
        excluded=excluded,
        slot_index=slot_index,
        day_index=day_index,
        day_sizes=prices.day_sizes,
        bar_interval=prices.bar_interval,
        sigma=_included_sigma(values, excluded),
    )


def apply_overnight_policy(vol: VolatilitySeries, exclude: bool) -> VolatilitySeries:
    """Return a copy with overnight bars excluded or restored.

    With ``exclude`` true, overnight bars are flagged excluded for all
    downstream selection and averaging, and sigma is recomputed over the
    included bars.  With false, any exclusion is lifted.
    """
    excluded = vol.overnight_mask.copy() if exclude else np.zeros(len(vol), dtype=bool)
    return replace(
        vol,
        excluded=excluded,
        sigma=_included_sigma(vol.values, excluded),
    )

"""Shared builders for the test suite."""

from __future__ import annotations

import io

import numpy as np

from remvol.series import PriceSeries, VolatilitySeries, compute_returns, ingest_prices


def price_csv(rows: list[str], header: bool = False) -> io.BytesIO:
    lines = (["timestamp,price"] if header else []) + rows
    return io.BytesIO(("\n".join(lines) + "\n").encode())


def daily_prices(prices, start="1990-01-01") -> PriceSeries:
    """PriceSeries of daily observations from a plain price list."""
    n = len(prices)
    days = np.arange(n, dtype=np.int64)
    stamps = (np.datetime64(start, "D") + days).astype("datetime64[s]")
    return PriceSeries(stamps, np.asarray(prices, dtype=float), 0, days)


def minute_prices(prices, per_day: int, interval: int = 5,
                  start="1990-01-01T09:00:00") -> PriceSeries:
    """PriceSeries with per_day observations per calendar date."""
    n = len(prices)
    assert n % per_day == 0
    day = np.repeat(np.arange(n // per_day), per_day)
    slot = np.tile(np.arange(per_day), n // per_day)
    stamps = (np.datetime64(start, "s")
              + day * np.timedelta64(1, "D").astype("timedelta64[s]")
              + slot * np.timedelta64(interval * 60, "s"))
    bounds = np.arange(0, n, per_day, dtype=np.int64)
    return PriceSeries(stamps, np.asarray(prices, dtype=float), interval, bounds)


def vol_from_values(values, signs=None, bar_interval=0, overnight=None,
                    excluded=None, slots=None, days=None,
                    day_sizes=None) -> VolatilitySeries:
    """Hand-built VolatilitySeries for unit tests."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if signs is None:
        signs = np.ones(n, dtype=np.int8)
    if overnight is None:
        overnight = np.zeros(n, dtype=bool)
    if excluded is None:
        excluded = np.zeros(n, dtype=bool)
    if slots is None:
        slots = np.zeros(n, dtype=np.int64)
    if days is None:
        days = np.arange(n, dtype=np.int64)
    if day_sizes is None:
        day_sizes = np.ones(n + 1, dtype=np.int64)
    sigma = float(values[~np.asarray(excluded, dtype=bool)].mean())
    return VolatilitySeries(
        values=values, signs=np.asarray(signs, dtype=np.int8),
        overnight_mask=np.asarray(overnight, dtype=bool),
        excluded=np.asarray(excluded, dtype=bool),
        slot_index=np.asarray(slots, dtype=np.int64),
        day_index=np.asarray(days, dtype=np.int64),
        day_sizes=np.asarray(day_sizes, dtype=np.int64),
        bar_interval=bar_interval, sigma=sigma,
    )

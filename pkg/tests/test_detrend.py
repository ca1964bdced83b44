"""Tests for intraday pattern estimation and removal."""

import math

import numpy as np
import pytest

from helpers import vol_from_values
from oracles import oracle_pattern
from remvol.detrend import estimate_pattern, normalize
from remvol.series import DataError


def _minute_vol(values, per_day, excluded=None, bar_interval=5):
    values = np.asarray(values, dtype=float)
    n = values.size
    assert n % per_day == 0
    n_days = n // per_day
    slots = np.tile(np.arange(per_day, dtype=np.int64), n_days)
    days = np.repeat(np.arange(n_days, dtype=np.int64), per_day)
    day_sizes = np.full(n_days, per_day, dtype=np.int64)
    return vol_from_values(values, excluded=excluded, slots=slots, days=days,
                           day_sizes=day_sizes, bar_interval=bar_interval)


class TestEstimatePattern:
    def test_constant_series_pattern(self):
        vol = _minute_vol([0.5] * 12, per_day=4)
        pat = estimate_pattern(vol)
        np.testing.assert_allclose(pat.pattern, 0.5, rtol=0, atol=1e-15)
        assert pat.day_count == 3
        assert not pat.degenerate.any()

    def test_two_day_means(self):
        # Slot means: (1+3)/2 = 2 and (2+6)/2 = 4.
        vol = _minute_vol([1.0, 2.0, 3.0, 6.0], per_day=2)
        pat = estimate_pattern(vol)
        np.testing.assert_allclose(pat.pattern, [2.0, 4.0], atol=1e-15)

    def test_matches_oracle_with_exclusions(self, rng):
        values = rng.uniform(0.1, 2.0, size=60)
        excluded = rng.random(60) < 0.2
        vol = _minute_vol(values, per_day=6, excluded=excluded)
        pat = estimate_pattern(vol)
        expect = oracle_pattern(values, excluded, vol.slot_index, 6)
        np.testing.assert_allclose(pat.pattern, expect, atol=1e-14)

    def test_daily_series_rejected(self):
        vol = vol_from_values([1.0, 2.0, 3.0])
        with pytest.raises(DataError, match="intraday"):
            estimate_pattern(vol)

    def test_ragged_days_rejected(self):
        vol = vol_from_values(
            [1.0, 2.0, 3.0], bar_interval=5,
            slots=[0, 1, 0], days=[0, 0, 1], day_sizes=[2, 1])
        with pytest.raises(DataError, match="ragged"):
            estimate_pattern(vol)


class TestNormalize:
    def test_unit_mean_per_slot(self, rng):
        # After removal every slot has unit mean volatility.
        values = rng.uniform(0.05, 3.0, size=40 * 8)
        vol = _minute_vol(values, per_day=8)
        flat = normalize(vol, estimate_pattern(vol))
        for s in range(8):
            sel = flat.values[flat.slot_index == s]
            assert abs(sel.mean() - 1.0) < 1e-12

    def test_removes_injected_u_shape(self, rng):
        per_day, n_days = 10, 200
        base = rng.uniform(0.5, 1.5, size=per_day * n_days)
        slots = np.tile(np.arange(per_day), n_days)
        shape = 1.0 + 1.5 * ((slots - (per_day - 1) / 2) / per_day) ** 2
        vol = _minute_vol(base * shape, per_day=per_day)
        flat = normalize(vol, estimate_pattern(vol))
        # Per-slot variance of the slot means shrinks by a large factor.
        def slot_spread(v):
            means = np.array([v.values[v.slot_index == s].mean()
                              for s in range(per_day)])
            return np.var(means / means.mean())
        assert slot_spread(flat) < slot_spread(vol) / 100

    def test_idempotent(self, rng):
        values = rng.uniform(0.1, 2.0, size=30 * 5)
        vol = _minute_vol(values, per_day=5)
        flat = normalize(vol, estimate_pattern(vol))
        pat2 = estimate_pattern(flat)
        np.testing.assert_allclose(pat2.pattern, 1.0, atol=1e-12)

    def test_sigma_recomputed_and_flagged(self, rng):
        values = rng.uniform(0.1, 2.0, size=20 * 4)
        vol = _minute_vol(values, per_day=4)
        flat = normalize(vol, estimate_pattern(vol))
        assert flat.normalized
        assert not vol.normalized
        assert math.isclose(flat.sigma, flat.values[~flat.excluded].mean(),
                            rel_tol=1e-15)

    def test_degenerate_slot_zero_passes_through(self):
        # Slot 1 is flagged degenerate; its zero values normalize to 0.
        vol = _minute_vol([1.0, 0.0, 2.0, 0.0], per_day=2)
        pat = estimate_pattern(vol)
        assert pat.degenerate[1]
        flat = normalize(vol, pat)
        np.testing.assert_array_equal(flat.values[flat.slot_index == 1], 0.0)

    def test_degenerate_slot_nonzero_rejected(self):
        flat_pat = estimate_pattern(_minute_vol([1.0, 0.0, 2.0, 0.0], per_day=2))
        busy = _minute_vol([1.0, 0.5, 2.0, 0.5], per_day=2)
        with pytest.raises(DataError, match="degenerate"):
            normalize(busy, flat_pat)

    def test_pattern_length_must_match(self, rng):
        vol4 = _minute_vol(rng.uniform(0.1, 2.0, size=12), per_day=4)
        vol3 = _minute_vol(rng.uniform(0.1, 2.0, size=12), per_day=3)
        with pytest.raises(DataError, match="slots"):
            normalize(vol3, estimate_pattern(vol4))

"""Tests for the synthetic series generator."""

import math

import numpy as np
import pytest

from remvol.series import DataError, compute_returns
from remvol.synth import GeneratorSpec, draw_shock_times, generate


def _envelope_oracle(spec):
    """s(t)/sigma0 recomputed from the documented formula."""
    s = np.ones(spec.n_bars)
    p_pre = spec.p_post if spec.kind == "omori_symmetric" else spec.p_pre
    cut = spec.env_cutoff if spec.env_cutoff > 0 else spec.n_bars
    for t_e, _mag in spec.shocks:
        for t in range(spec.n_bars):
            dt = abs(t - t_e)
            if dt > cut:
                continue
            p = p_pre if t < t_e else spec.p_post
            s[t] += spec.K * (dt + spec.tau_env) ** -p
    return s


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(DataError, match="kind"):
            GeneratorSpec(kind="brownian", n_bars=10)

    def test_iid_null_takes_no_shocks(self):
        with pytest.raises(DataError, match="no shocks"):
            GeneratorSpec(kind="iid_null", n_bars=10, shocks=((5, 3.0),))

    def test_shock_time_range(self):
        with pytest.raises(DataError, match="outside"):
            GeneratorSpec(kind="omori_symmetric", n_bars=10, shocks=((10, 3.0),))

    def test_shock_magnitude_positive(self):
        with pytest.raises(DataError, match="magnitude"):
            GeneratorSpec(kind="omori_symmetric", n_bars=10, shocks=((5, 0.0),))

    def test_exponent_range(self):
        with pytest.raises(DataError, match="p_post"):
            GeneratorSpec(kind="omori_symmetric", n_bars=10, p_post=1.5)

    def test_price_overflow_guard(self):
        spec = GeneratorSpec(kind="iid_null", n_bars=100, base_scale=100.0)
        with pytest.raises(DataError, match="price range"):
            generate(spec)


class TestGenerate:
    def test_deterministic(self):
        spec = GeneratorSpec(kind="omori_symmetric", n_bars=500,
                             shocks=((250, 8.0),), K=2.0, seed=42)
        a = generate(spec)
        b = generate(spec)
        np.testing.assert_array_equal(a.prices, b.prices)
        np.testing.assert_array_equal(a.timestamps, b.timestamps)

    def test_shape_and_grid(self):
        ps = generate(GeneratorSpec(kind="iid_null", n_bars=300, seed=1))
        assert len(ps) == 301
        assert ps.n_days == 301
        assert ps.bar_interval == 0
        assert ps.prices[0] == 100.0
        vol = compute_returns(ps)
        assert len(vol) == 300

    def test_zero_shock_equals_iid_null(self):
        sym = generate(GeneratorSpec(kind="omori_symmetric", n_bars=400,
                                     shocks=(), K=0.0, seed=9))
        null = generate(GeneratorSpec(kind="iid_null", n_bars=400, seed=9))
        np.testing.assert_array_equal(sym.prices, null.prices)

    def test_symmetric_equals_asymmetric_with_equal_exponents(self):
        kw = dict(n_bars=2000, shocks=((600, 8.0), (1400, 8.0)),
                  p_post=0.4, tau_env=1.0, K=3.0, env_cutoff=150, seed=5)
        sym = generate(GeneratorSpec(kind="omori_symmetric", **kw))
        asym = generate(GeneratorSpec(kind="omori_asymmetric", p_pre=0.4, **kw))
        np.testing.assert_array_equal(sym.prices, asym.prices)

    def test_shock_returns_forced(self):
        spec = GeneratorSpec(kind="omori_symmetric", n_bars=1000,
                             shocks=((200, 10.0), (700, 6.0)),
                             K=2.0, seed=3, shock_sign=-1)
        vol = compute_returns(generate(spec))
        assert vol.values[200] == pytest.approx(10.0 * spec.base_scale, rel=1e-12)
        assert vol.values[700] == pytest.approx(6.0 * spec.base_scale, rel=1e-12)
        assert vol.signs[200] == -1 and vol.signs[700] == -1

    def test_half_normal_scale_matches_envelope(self):
        # |R(t)| / s(t) is half-normal: mean sqrt(2/pi) within 3 se.
        spec = GeneratorSpec(kind="omori_asymmetric", n_bars=60_000,
                             shocks=tuple((int(t), 8.0) for t in
                                          np.arange(2000, 60_000, 2000)),
                             p_pre=0.8, p_post=0.4, tau_env=1.0, K=3.0,
                             env_cutoff=500, seed=17)
        vol = compute_returns(generate(spec))
        s = _envelope_oracle(spec) * spec.base_scale
        keep = np.ones(spec.n_bars, dtype=bool)
        keep[[int(t) for t, _m in spec.shocks]] = False
        z = vol.values[keep] / s[keep]
        mean = z.mean()
        se = z.std(ddof=1) / math.sqrt(z.size)
        assert abs(mean - math.sqrt(2 / math.pi)) < 3 * se

    def test_envelope_asymmetry_visible(self):
        # Slow pre-decay (small p_pre) leaves more variance before the
        # shock than after, at matched distances.
        spec = GeneratorSpec(kind="omori_asymmetric", n_bars=30_000,
                             shocks=tuple((int(t), 8.0) for t in
                                          np.arange(1500, 30_000, 1500)),
                             p_pre=0.2, p_post=1.2, tau_env=1.0, K=8.0,
                             env_cutoff=400, seed=23)
        vol = compute_returns(generate(spec))
        pre = np.concatenate([vol.values[t - 60:t - 5]
                              for t, _m in spec.shocks])
        post = np.concatenate([vol.values[t + 6:t + 61]
                               for t, _m in spec.shocks])
        assert pre.mean() > 1.2 * post.mean()


class TestDrawShockTimes:
    def test_count_spacing_and_range(self):
        times = draw_shock_times(100_000, 100, 500, seed=4)
        arr = np.array(times)
        assert arr.size == 100
        assert np.all(np.diff(arr) >= 500)
        assert arr.min() >= 500
        assert arr.max() < 100_000 - 500 + 500  # margin + packed offsets stay in range
        assert arr.max() < 100_000

    def test_deterministic(self):
        assert draw_shock_times(50_000, 20, 300, seed=8) == \
            draw_shock_times(50_000, 20, 300, seed=8)

    def test_infeasible_packing_rejected(self):
        with pytest.raises(DataError, match="spacing"):
            draw_shock_times(1000, 50, 100, seed=0)

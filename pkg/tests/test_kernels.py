"""Backend equivalence: compiled kernels against the NumPy fallback."""

import numpy as np
import pytest

from remvol import _kernels_py, kernels


def _random_case(rng, n=800, n_events=25):
    values = rng.lognormal(sigma=1.0, size=n)
    included = (rng.random(n) > 0.15).astype(np.uint8)
    events = np.sort(rng.choice(n, size=n_events, replace=False)).astype(np.int64)
    return values, included, events


needs_compiled = pytest.mark.skipif(
    kernels.BACKEND != "compiled", reason="compiled backend unavailable")


class TestBackendEquivalence:
    @needs_compiled
    @pytest.mark.parametrize("step", [1, -1])
    def test_window_stats(self, rng, step):
        for _ in range(10):
            values, included, events = _random_case(rng)
            got = kernels._impl.window_stats(values, included, events, step, 60)
            ref = _kernels_py.window_stats(values, included, events, step, 60)
            for g, r in zip(got, ref):
                np.testing.assert_allclose(g, r, rtol=0, atol=1e-12)

    @needs_compiled
    @pytest.mark.parametrize("step", [1, -1])
    def test_omori_stats(self, rng, step):
        for _ in range(10):
            values, included, events = _random_case(rng)
            thresh = float(np.quantile(values, 0.9))
            got = kernels._impl.omori_stats(values, included, events, step, 60, thresh)
            ref = _kernels_py.omori_stats(values, included, events, step, 60, thresh)
            for g, r in zip(got, ref):
                np.testing.assert_allclose(g, r, rtol=0, atol=1e-12)

    @needs_compiled
    @pytest.mark.parametrize("step", [1, -1])
    def test_bootstrap_stats(self, rng, step):
        values, included, events = _random_case(rng, n=600, n_events=18)
        m = events.size
        weights = rng.multinomial(m, np.full(m, 1 / m), size=40).astype(float)
        got = kernels._impl.bootstrap_stats(values, included, events, step, 50, weights)
        ref = _kernels_py.bootstrap_stats(values, included, events, step, 50, weights)
        for g, r in zip(got, ref):
            np.testing.assert_allclose(g, r, rtol=1e-12, atol=1e-9)

    @needs_compiled
    def test_edge_events(self, rng):
        # Events at both series edges and a fully excluded stretch.
        n = 100
        values = rng.lognormal(sigma=1.0, size=n)
        included = np.ones(n, dtype=np.uint8)
        included[40:60] = 0
        events = np.array([0, 1, 50, 98, 99], dtype=np.int64)
        for step in (1, -1):
            got = kernels._impl.window_stats(values, included, events, step, 120)
            ref = _kernels_py.window_stats(values, included, events, step, 120)
            for g, r in zip(got, ref):
                np.testing.assert_allclose(g, r, rtol=0, atol=1e-12)


class TestDispatcher:
    def test_backend_name(self):
        assert kernels.BACKEND in ("compiled", "python")

    def test_window_consistency_with_direct_mean(self, rng):
        values, included, events = _random_case(rng, n=300, n_events=10)
        cnt, s1, _s2 = kernels.window_stats(values, included, events, 1, 0)
        kept = included[events].astype(bool)
        assert cnt[0] == kept.sum()
        assert s1[0] == pytest.approx(values[events][kept].sum(), rel=1e-15)

    def test_bad_step_rejected(self, rng):
        values, included, events = _random_case(rng, n=50, n_events=3)
        with pytest.raises(ValueError, match="step"):
            kernels.window_stats(values, included, events, 2, 10)

    def test_out_of_range_event_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            kernels.window_stats(np.ones(5), np.ones(5), np.array([7]), 1, 2)

    def test_weights_shape_rejected(self, rng):
        values, included, events = _random_case(rng, n=50, n_events=4)
        with pytest.raises(ValueError, match="weights"):
            kernels.bootstrap_stats(values, included, events, 1, 5,
                                    np.ones((3, 7)))

"""NumPy fallback for the event-window accumulation kernels.

Mirrors the compiled extension in `_kernels.pyx` function by function.
The accumulations are chunked over events so memory stays bounded at
CHUNK x (t_max + 1) doubles regardless of event count.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# Bounds per-chunk scratch to ~32 MB at t_max = 1000.
CHUNK = 4096


def _window(values, included, events, step, t_max, chunk_events):
    """Yield (ok, x) for a chunk: in-window mask and masked values."""
    n = values.size
    lags = np.arange(t_max + 1, dtype=np.int64)
    j = events[chunk_events, None] + step * lags[None, :]
    ok = (j >= 0) & (j < n)
    jc = np.clip(j, 0, n - 1)
    ok &= included[jc].astype(bool)
    x = np.where(ok, values[jc], 0.0)
    return ok, x


def window_stats(values, included, events, step, t_max):
    """Per-lag count, sum, and sum of squares of event-window values.

    An event at t' contributes its value at t' + step*k to lag k iff
    that index is inside the series and not excluded.
    """
    L = t_max + 1
    cnt = np.zeros(L, dtype=np.int64)
    s1 = np.zeros(L)
    s2 = np.zeros(L)
    for lo in range(0, events.size, CHUNK):
        sel = slice(lo, lo + CHUNK)
        ok, x = _window(values, included, events, step, t_max, sel)
        cnt += ok.sum(axis=0)
        s1 += x.sum(axis=0)
        s2 += (x * x).sum(axis=0)
    return cnt, s1, s2


def omori_stats(values, included, events, step, t_max, thresh):
    """Per-lag stats of cumulative exceedance counts.

    For each event, count bars with value > thresh over lags 1..k (in
    range and included); return the per-lag contributing-event count and
    the sum and sum of squares of the per-event counts.  Counts freeze
    where a window runs off the series edge.
    """
    L = t_max + 1
    contrib = np.zeros(L, dtype=np.int64)
    s1 = np.zeros(L)
    s2 = np.zeros(L)
    for lo in range(0, events.size, CHUNK):
        sel = slice(lo, lo + CHUNK)
        ok, x = _window(values, included, events, step, t_max, sel)
        hits = ok & (x > thresh)
        hits[:, 0] = False
        counts = np.cumsum(hits, axis=1, dtype=np.float64)
        contrib += ok.sum(axis=0)
        s1 += counts.sum(axis=0)
        s2 += (counts * counts).sum(axis=0)
    return contrib, s1, s2


def bootstrap_stats(values, included, events, step, t_max, weights):
    """Weighted window sums for bootstrap replicates.

    weights has shape (B, n_events); row b holds the resample
    multiplicity of each event.  Returns (ws, wc, wz): per-replicate
    weighted value sums and weighted contributor counts per lag, plus
    the weighted sum of the event values themselves.
    """
    B = weights.shape[0]
    L = t_max + 1
    ws = np.zeros((B, L))
    wc = np.zeros((B, L))
    wz = np.zeros(B)
    for lo in range(0, events.size, CHUNK):
        sel = slice(lo, lo + CHUNK)
        ok, x = _window(values, included, events, step, t_max, sel)
        w = weights[:, sel]
        ws += w @ x
        wc += w @ ok.astype(np.float64)
        wz += w @ values[events[sel]]
    return ws, wc, wz

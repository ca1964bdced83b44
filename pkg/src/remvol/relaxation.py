"""Event-conditioned relaxation curves.

Given a set of large-fluctuation events at times t', the remanent
(post) and anti-remanent (pre) volatility at lag t is

    v(t) = [<|R(t' +/- t)|>_c - sigma] / Z,    Z = <|R(t')|>_c - sigma,

where <.>_c averages over the events whose lag-t bar is inside the
series and not excluded.  v(0) = 1 by construction.  The cumulative
curve V(t) = sum_{k=1..t} v(k) is what the power-law model is fitted
to, and the Omori count N(t) is the mean number of bars within lag t
whose volatility exceeds a second threshold zeta_1 * sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .events import EventSet
from .series import DataError, VolatilitySeries, _freeze

__all__ = ["RelaxationCurve", "remanent", "cumulate", "omori_count"]

DIRECTIONS = ("pre", "post")
KINDS = ("remanent_v", "cumulative_V", "omori_N")


def _step(direction: str) -> int:
    if direction not in DIRECTIONS:
        raise DataError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return 1 if direction == "post" else -1


@dataclass(frozen=True)
class RelaxationCurve:
    """A per-lag curve conditioned on events.

    ``values[k]`` is the curve at lag ``lags[k]``; ``contributing[k]``
    counts the events whose lag-k bar is in range and included;
    ``event_dispersion[k]`` is the standard deviation across events
    (for cumulative curves, the quadrature prefix of the per-lag
    dispersions; see `cumulate`).  ``Z`` is the normalization
    <|R(t')|>_c - sigma of the source event set.
    """

    direction: str
    lags: np.ndarray
    values: np.ndarray
    contributing: np.ndarray
    event_dispersion: np.ndarray
    Z: float
    kind: str

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise DataError(f"bad direction {self.direction!r}")
        if self.kind not in KINDS:
            raise DataError(f"bad curve kind {self.kind!r}")
        for name in ("lags", "values", "contributing", "event_dispersion"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name))))
        if not (self.lags.size == self.values.size == self.contributing.size
                == self.event_dispersion.size):
            raise DataError("curve arrays must have equal length")

    def __len__(self) -> int:
        return self.lags.size

    @property
    def t_max(self) -> int:
        return int(self.lags[-1]) if len(self) else 0


def _truncate(cnt: np.ndarray) -> int:
    """Length of the leading run of lags with at least one contributor."""
    zero = np.flatnonzero(cnt == 0)
    return int(zero[0]) if zero.size else cnt.size


def _event_stats(vol: VolatilitySeries, events: EventSet, direction: str, t_max: int):
    if len(events) == 0:
        raise DataError("empty event set")
    if t_max < 1:
        raise DataError("t_max must be >= 1")
    return kernels.window_stats(
        vol.values, vol.included, events.indices, _step(direction), t_max
    )


def remanent(vol: VolatilitySeries, events: EventSet, direction: str,
             t_max: int) -> RelaxationCurve:
    """Compute v(t) for lags 0..t_max.

    An event contributes at lag t iff t' +/- t lies inside the series
    and is not excluded; ``contributing`` records the varying sample
    size.  Lags from the first zero-contributor lag onward are
    truncated.  Z is taken from the lag-0 statistics, so v(0) = 1
    exactly.

    Raises
    ------
    DataError
        On an empty event set or non-positive Z.
    """
    cnt, s1, s2 = _event_stats(vol, events, direction, t_max)
    L = _truncate(cnt)
    cnt, s1, s2 = cnt[:L], s1[:L], s2[:L]
    mean = s1 / cnt
    z = mean[0] - vol.sigma
    if z <= 0:
        raise DataError(f"normalization Z = {z:.3g} is not positive")
    v = (mean - vol.sigma) / z
    var = np.maximum(s2 / cnt - mean * mean, 0.0)
    disp = np.sqrt(var) / z
    return RelaxationCurve(
        direction=direction,
        lags=np.arange(L, dtype=np.int64),
        values=v,
        contributing=cnt,
        event_dispersion=disp,
        Z=float(z),
        kind="remanent_v",
    )


def cumulate(curve: RelaxationCurve) -> RelaxationCurve:
    """Prefix-sum a remanent curve: V(t) = sum_{k=1..t} v(k), V(0) = 0.

    The omitted v(0) = 1 term is absorbed by the fitted amplitude.  The
    dispersion column is the quadrature prefix
    sqrt(sum_{k<=t} dispersion(k)^2), the standard deviation of V(t)
    under independent per-lag event noise.
    """
    if curve.kind != "remanent_v":
        raise DataError(f"cumulate expects a remanent_v curve, got {curve.kind}")
    v = curve.values.copy()
    v[0] = 0.0
    d2 = curve.event_dispersion ** 2
    d2[0] = 0.0
    return RelaxationCurve(
        direction=curve.direction,
        lags=curve.lags.copy(),
        values=np.cumsum(v),
        contributing=curve.contributing.copy(),
        event_dispersion=np.sqrt(np.cumsum(d2)),
        Z=curve.Z,
        kind="cumulative_V",
    )


def omori_count(vol: VolatilitySeries, events: EventSet, zeta1: float,
                direction: str, t_max: int) -> RelaxationCurve:
    """Mean cumulative exceedance count N(t) around events.

    ``values[t]`` is the mean over all events of the number of lags
    1 <= k <= t whose bar is in range, included, and has volatility
    above zeta_1 * sigma.  The mean keeps the full event count as
    denominator at every lag; an event whose window is cut off by a
    series edge simply stops accumulating.
    """
    if len(events) == 0:
        raise DataError("empty event set")
    if t_max < 1:
        raise DataError("t_max must be >= 1")
    if zeta1 <= 0:
        raise DataError("zeta1 must be positive")
    thresh = zeta1 * vol.sigma
    contrib, s1, s2 = kernels.omori_stats(
        vol.values, vol.included, events.indices, _step(direction), t_max, thresh
    )
    L = _truncate(contrib)
    contrib, s1, s2 = contrib[:L], s1[:L], s2[:L]
    m = len(events)
    mean = s1 / m
    var = np.maximum(s2 / m - mean * mean, 0.0)
    # Z is not used by the counts but is carried for reporting parity
    # with the other curve kinds.
    ev_mean = float(vol.values[events.indices].mean())
    return RelaxationCurve(
        direction=direction,
        lags=np.arange(L, dtype=np.int64),
        values=mean,
        contributing=contrib,
        event_dispersion=np.sqrt(var),
        Z=ev_mean - vol.sigma,
        kind="omori_N",
    )

"""Large-fluctuation event selection and tagging.

An event is a bar whose volatility exceeds zeta times the series
average sigma.  Events carry a sign tag (crash for negative return,
rally for positive) and an origin tag (endogenous, exogenous, or
untagged) assigned from a calendar of externally identified dates.
"""

from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass, replace
from datetime import date, datetime
from typing import Callable

import numpy as np

from .series import DataError, PriceSeries, VolatilitySeries, _freeze

__all__ = [
    "EventSet",
    "EventCalendar",
    "read_calendar",
    "select_events",
    "tag_origins",
    "filter_events",
]

log = logging.getLogger(__name__)

SIGN_TAGS = ("crash", "rally")
ORIGIN_TAGS = ("endogenous", "exogenous", "untagged")
FILTERS = ("all", "crash", "rally", "endogenous", "exogenous")


@dataclass(frozen=True)
class EventSet:
    """Selected event bars with their tags.

    ``indices`` are strictly increasing bar indices t' with
    value > zeta * source_sigma on the selection series.
    """

    indices: np.ndarray
    zeta: float
    sign_tags: np.ndarray
    origin_tags: np.ndarray
    source_sigma: float

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.size >= 2 and not np.all(np.diff(idx) > 0):
            raise DataError("event indices must be strictly increasing")
        object.__setattr__(self, "indices", _freeze(idx))
        object.__setattr__(self, "sign_tags", _freeze(np.asarray(self.sign_tags, dtype="U10")))
        object.__setattr__(self, "origin_tags", _freeze(np.asarray(self.origin_tags, dtype="U10")))

    def __len__(self) -> int:
        return self.indices.size

    def counts(self) -> dict[str, int]:
        """Tag histogram, for reporting."""
        out = {"total": len(self)}
        for tag in SIGN_TAGS:
            out[tag] = int(np.count_nonzero(self.sign_tags == tag))
        for tag in ORIGIN_TAGS:
            out[tag] = int(np.count_nonzero(self.origin_tags == tag))
        return out


@dataclass(frozen=True)
class EventCalendar:
    """Externally identified exogenous dates: (date, origin, note)."""

    entries: tuple

    def __post_init__(self):
        seen = set()
        for d, origin, _note in self.entries:
            if not isinstance(d, date):
                raise DataError(f"calendar date {d!r} is not a date")
            if origin != "exogenous":
                raise DataError(f"calendar origin must be 'exogenous', got {origin!r}")
            if d in seen:
                raise DataError(f"duplicate calendar date {d}")
            seen.add(d)

    def dates(self) -> set:
        return {d for d, _o, _n in self.entries}

    def __len__(self) -> int:
        return len(self.entries)


def read_calendar(source) -> EventCalendar:
    """Parse a calendar CSV with rows ``date,origin,note``.

    Dates are ``YYYY-MM-DD``; origin is the literal ``exogenous``; the
    note is free text (quoted if it contains commas).  ``#`` lines and
    an optional header are skipped.
    """
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
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    entries = []
    first_row = True
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = next(csv.reader(io.StringIO(stripped)))
        if len(parts) < 2:
            raise DataError(f"calendar line {lineno}: expected 'date,origin,note'")
        try:
            d = datetime.strptime(parts[0].strip(), "%Y-%m-%d").date()
        except ValueError:
            if first_row:
                first_row = False
                continue
            raise DataError(f"calendar line {lineno}: bad date {parts[0]!r}") from None
        first_row = False
        note = parts[2].strip() if len(parts) > 2 else ""
        entries.append((d, parts[1].strip(), note))
    return EventCalendar(entries=tuple(entries))


def select_events(vol: VolatilitySeries, zeta: float) -> EventSet:
    """Select bars with value > zeta * sigma (strict inequality).

    Excluded (overnight) bars are never selected when the exclusion
    policy is active.  Sign tags follow the return sign.

    Raises
    ------
    DataError
        When sigma is 0 (constant series gives no selection scale).
    """
    if vol.sigma == 0:
        raise DataError("sigma is 0; cannot select events on a constant series")
    if zeta <= 1:
        warnings.warn(f"zeta = {zeta} is not well above 1; selection may be dense")
    mask = vol.included & (vol.values > zeta * vol.sigma)
    idx = np.flatnonzero(mask)
    signs = np.where(vol.signs[idx] < 0, "crash", "rally")
    return EventSet(
        indices=idx,
        zeta=float(zeta),
        sign_tags=signs,
        origin_tags=np.full(idx.size, "untagged", dtype="U10"),
        source_sigma=vol.sigma,
    )


def _event_dates(events: EventSet, prices: PriceSeries) -> np.ndarray:
    # Bar t' spans observations t' and t'+1; the event is dated by the
    # later endpoint, the session on which the move is reported.
    return prices.obs_dates()[events.indices + 1]


def tag_origins(events: EventSet, calendar: EventCalendar, prices: PriceSeries) -> EventSet:
    """Tag events exogenous when their date appears in the calendar.

    All other events become endogenous.  Calendar dates matching no
    trading day in the price series draw a warning but are not fatal.
    Tag counts are logged.
    """
    if len(events) and events.indices[-1] + 1 >= len(prices):
        raise DataError("event index beyond the price series")
    ev_dates = _event_dates(events, prices)
    cal = np.array(sorted(calendar.dates()), dtype="datetime64[D]")
    exo = np.isin(ev_dates, cal)
    origin = np.where(exo, "exogenous", "endogenous")

    trading = np.unique(prices.obs_dates())
    missing = cal[~np.isin(cal, trading)]
    for d in missing:
        warnings.warn(f"calendar date {d} matches no trading day")

    tagged = replace(events, origin_tags=origin)
    c = tagged.counts()
    log.info("tagged %d events: %d exogenous, %d endogenous",
             c["total"], c["exogenous"], c["endogenous"])
    return tagged


def filter_events(events: EventSet, predicate: str | Callable[[str, str], bool]) -> EventSet:
    """Subset an EventSet by tag, preserving order and tags.

    ``predicate`` is either one of the named filters ("all", "crash",
    "rally", "endogenous", "exogenous") or a callable taking
    (sign_tag, origin_tag) and returning truth.
    """
    if isinstance(predicate, str):
        name = predicate
        if name not in FILTERS:
            raise DataError(f"unknown filter {name!r}; expected one of {FILTERS}")
        if name == "all":
            pred = lambda s, o: True
        elif name in SIGN_TAGS:
            pred = lambda s, o: s == name
        else:
            pred = lambda s, o: o == name
    else:
        pred = predicate
    keep = np.fromiter(
        (bool(pred(s, o)) for s, o in zip(events.sign_tags, events.origin_tags)),
        dtype=bool,
        count=len(events),
    )
    return replace(
        events,
        indices=events.indices[keep],
        sign_tags=events.sign_tags[keep],
        origin_tags=events.origin_tags[keep],
    )

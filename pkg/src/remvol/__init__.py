"""remvol: event-conditioned volatility relaxation analysis.

From a raw price series to fitted pre/post-event power-law exponents:
ingest prices, compute volatilities, optionally remove the intraday
pattern, select large-fluctuation events by threshold, build remanent
and anti-remanent relaxation curves with their cumulatives and Omori
counts, and fit the cumulative power law with bootstrap errors and a
KS goodness-of-fit check.  A synthetic generator with known ground
truth validates every estimator.
"""

from .detrend import IntradayPattern, estimate_pattern, normalize
from .events import (EventCalendar, EventSet, filter_events, read_calendar,
                     select_events, tag_origins)
from .fitting import (FitConfig, FitError, PowerLawFit, bootstrap_error,
                      fit_cumulative, ks_test, tail_slope)
from .kernels import BACKEND
from .relaxation import RelaxationCurve, cumulate, omori_count, remanent
from .series import (DataError, PriceSeries, VolatilitySeries,
                     apply_overnight_policy, compute_returns, ingest_prices)
from .synth import GeneratorSpec, draw_shock_times, generate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DataError",
    "EventCalendar",
    "EventSet",
    "FitConfig",
    "FitError",
    "GeneratorSpec",
    "IntradayPattern",
    "PowerLawFit",
    "PriceSeries",
    "RelaxationCurve",
    "VolatilitySeries",
    "apply_overnight_policy",
    "bootstrap_error",
    "compute_returns",
    "cumulate",
    "draw_shock_times",
    "estimate_pattern",
    "filter_events",
    "fit_cumulative",
    "generate",
    "ingest_prices",
    "ks_test",
    "normalize",
    "omori_count",
    "read_calendar",
    "remanent",
    "select_events",
    "tag_origins",
    "tail_slope",
    "__version__",
]

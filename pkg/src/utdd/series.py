"""Uniformly spaced time series: container, differencing, calendar features, CSV I/O.

Everything downstream (stationarity testing, embedding fits, drift scoring)
works on the types defined here.  All containers are immutable after
construction and all operations are pure functions, so values can be shared
freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from .errors import CsvFormatError, InvalidArgumentError

__all__ = [
    "TimeSeries",
    "FeatureSpec",
    "ResidualStats",
    "FEATURE_KINDS",
    "diff",
    "extract_feature",
    "residual_stats",
    "parse_utc",
    "format_utc",
    "read_series_csv",
    "write_series_csv",
    "read_timestamp_table",
    "write_timestamp_table",
]

_US_PER_SECOND = 1_000_000
_US_PER_HOUR = 3_600 * _US_PER_SECOND
_US_PER_DAY = 24 * _US_PER_HOUR


def _coerce_utc(dt: datetime) -> datetime:
    """Naive datetimes are taken to be UTC; aware ones are converted."""
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def parse_utc(text: str) -> datetime:
    """Parse an ISO-8601 UTC timestamp such as ``2020-08-01T00:00:00Z``."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {text!r} lacks a UTC offset")
    return dt.astimezone(timezone.utc)


def format_utc(dt: datetime) -> str:
    """Render a datetime as ISO-8601 UTC with a ``Z`` suffix."""
    dt = _coerce_utc(dt)
    if dt.microsecond:
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly spaced, real-valued series.

    The timestamp of index ``n`` is ``start + n * step`` and is never stored
    per point.  ``step`` is in seconds and must be positive; values must be
    finite.  The backing array is made read-only at construction.

    Parameters
    ----------
    start : datetime
        Timestamp of the first point.  Naive datetimes are interpreted as UTC.
    step : float
        Spacing between consecutive points, in seconds.
    values : array_like
        One-dimensional sequence of finite floats, length >= 1.
    """

    start: datetime
    step: float
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", _coerce_utc(self.start))
        step = float(self.step)
        if not (math.isfinite(step) and step > 0):
            raise InvalidArgumentError("step must be a positive number of seconds")
        object.__setattr__(self, "step", step)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise InvalidArgumentError("values must be a one-dimensional, non-empty sequence")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("values must be finite (no NaN or infinity)")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def timestamp(self, index: int) -> datetime:
        """Timestamp of the point at ``index``."""
        return self.start + timedelta(seconds=index * self.step)

    def timestamps(self) -> list[datetime]:
        """Timestamps of every point, in order."""
        return [self.timestamp(i) for i in range(len(self))]

    def epoch_us(self) -> np.ndarray:
        """Microseconds since the Unix epoch for every point (int64)."""
        base = round(self.start.timestamp() * _US_PER_SECOND)
        offsets = np.rint(np.arange(len(self)) * (self.step * _US_PER_SECOND))
        return base + offsets.astype(np.int64)

    def window(self, start_at: datetime, end_before: datetime) -> "TimeSeries":
        """Sub-series with ``start_at <= timestamp < end_before`` (half-open).

        Raises :class:`InvalidArgumentError` when the bounds are inverted or
        no points fall inside them.
        """
        start_at = _coerce_utc(start_at)
        end_before = _coerce_utc(end_before)
        if end_before <= start_at:
            raise InvalidArgumentError("window end must be after window start")
        lo = (start_at - self.start).total_seconds() / self.step
        hi = (end_before - self.start).total_seconds() / self.step
        # ceil with a small slack so exact grid hits land on the grid point
        i_lo = max(0, math.ceil(lo - 1e-9))
        i_hi = min(len(self), math.ceil(hi - 1e-9))
        if i_hi <= i_lo:
            raise InvalidArgumentError(
                f"window [{format_utc(start_at)}, {format_utc(end_before)}) selects no points"
            )
        return TimeSeries(self.timestamp(i_lo), self.step, self.values[i_lo:i_hi])


_CALENDAR_CARDINALITY = {
    "hour_of_day": 24,
    "day_of_week": 7,
    "month_of_year": 12,
    "is_weekend": 2,
    "is_holiday": 2,
}

FEATURE_KINDS = tuple(_CALENDAR_CARDINALITY) + ("exogenous",)


@dataclass(frozen=True)
class FeatureSpec:
    """One categorical feature derivable from the time grid (or supplied codes).

    Code conventions:

    * ``hour_of_day``: 0..23
    * ``day_of_week``: Monday=0 .. Sunday=6
    * ``month_of_year``: January=0 .. December=11
    * ``is_weekend``: 1 on Saturday/Sunday, else 0
    * ``is_holiday``: 1 on dates listed in ``holiday_dates``, else 0
    * ``exogenous``: caller-supplied codes in ``[0, cardinality)`` aligned to
      the target series

    Calendar kinds fill their cardinality automatically; passing a mismatched
    one is an error.  All calendar math is UTC with the proleptic Gregorian
    calendar; there is no timezone or DST handling.
    """

    kind: str
    cardinality: int = 0
    holiday_dates: Optional[frozenset] = None
    exogenous_codes: Optional[tuple] = None

    def __post_init__(self) -> None:
        if self.kind not in FEATURE_KINDS:
            raise InvalidArgumentError(
                f"unknown feature kind {self.kind!r}; expected one of {FEATURE_KINDS}"
            )
        if self.kind == "exogenous":
            if self.cardinality < 1:
                raise InvalidArgumentError("exogenous features must declare a positive cardinality")
        else:
            expected = _CALENDAR_CARDINALITY[self.kind]
            if self.cardinality not in (0, expected):
                raise InvalidArgumentError(
                    f"{self.kind} has cardinality {expected}, not {self.cardinality}"
                )
            object.__setattr__(self, "cardinality", expected)
        if self.holiday_dates is not None:
            if self.kind != "is_holiday":
                raise InvalidArgumentError("holiday_dates only applies to is_holiday features")
            dates = frozenset(
                d.date() if isinstance(d, datetime) else d for d in self.holiday_dates
            )
            if not all(isinstance(d, date) for d in dates):
                raise InvalidArgumentError("holiday_dates must contain calendar dates")
            object.__setattr__(self, "holiday_dates", dates)
        if self.exogenous_codes is not None:
            if self.kind != "exogenous":
                raise InvalidArgumentError("exogenous_codes only applies to exogenous features")
            codes = tuple(int(c) for c in self.exogenous_codes)
            if any(c < 0 or c >= self.cardinality for c in codes):
                raise InvalidArgumentError("exogenous codes must lie in [0, cardinality)")
            object.__setattr__(self, "exogenous_codes", codes)


@dataclass(frozen=True)
class ResidualStats:
    """Mean and population standard deviation of a residual window."""

    mean: float
    std: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidArgumentError("residual statistics need at least two observations")
        if not (self.std >= 0):
            raise InvalidArgumentError("standard deviation cannot be negative")


def diff(series: TimeSeries, k: int) -> TimeSeries:
    """k-th order forward difference of a series.

    The result has ``len(series) - k`` points and starts ``k`` steps later
    (each value is attributed to the last timestamp it involves).  ``k=0``
    returns an identical copy.
    """
    k = int(k)
    if k < 0:
        raise InvalidArgumentError("difference order must be non-negative")
    if k >= len(series):
        raise InvalidArgumentError(
            f"difference order {k} requires a series longer than {k} points"
        )
    values = np.diff(series.values, n=k)
    start = series.start + timedelta(seconds=k * series.step)
    return TimeSeries(start, series.step, values)


def extract_feature(series: TimeSeries, spec: FeatureSpec) -> np.ndarray:
    """Category id per point, computed from each point's timestamp.

    Exogenous specs simply return their stored codes, which must cover the
    series exactly.  The result is an int64 array with every id below
    ``spec.cardinality``.
    """
    n = len(series)
    if spec.kind == "exogenous":
        if spec.exogenous_codes is None or len(spec.exogenous_codes) != n:
            have = 0 if spec.exogenous_codes is None else len(spec.exogenous_codes)
            raise InvalidArgumentError(
                f"exogenous feature supplies {have} codes for a series of {n} points"
            )
        return np.asarray(spec.exogenous_codes, dtype=np.int64)

    us = series.epoch_us()
    if spec.kind == "hour_of_day":
        return ((us // _US_PER_HOUR) % 24).astype(np.int64)
    if spec.kind == "day_of_week":
        # epoch day 0 (1970-01-01) was a Thursday; shift so Monday = 0
        return ((us // _US_PER_DAY + 3) % 7).astype(np.int64)
    if spec.kind == "is_weekend":
        dow = (us // _US_PER_DAY + 3) % 7
        return (dow >= 5).astype(np.int64)
    if spec.kind == "month_of_year":
        months = us.astype("datetime64[us]").astype("datetime64[M]").astype(np.int64)
        return months % 12
    # is_holiday
    if spec.holiday_dates is None:
        raise InvalidArgumentError("is_holiday extraction requires holiday_dates")
    if not spec.holiday_dates:
        return np.zeros(n, dtype=np.int64)
    days = us.astype("datetime64[us]").astype("datetime64[D]")
    table = np.array(sorted(spec.holiday_dates), dtype="datetime64[D]")
    return np.isin(days, table).astype(np.int64)


def residual_stats(values: Sequence[float]) -> ResidualStats:
    """Mean and population standard deviation of ``values`` (length >= 2)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidArgumentError("residual statistics need at least two values")
    return ResidualStats(mean=float(arr.mean()), std=float(arr.std()), n=int(arr.size))


# ---------------------------------------------------------------------------
# CSV I/O
#
# All files share one layout: a `timestamp,<name>[,<name>...]` header followed
# by rows of an ISO-8601 UTC timestamp and floats rendered with the shortest
# round-trip repr, so write -> read -> write is byte-identical for data rows.
# ---------------------------------------------------------------------------


def write_timestamp_table(
    path,
    columns: Sequence[str],
    timestamps: Sequence[datetime],
    arrays: Sequence[np.ndarray],
) -> None:
    """Write a ``timestamp,...`` CSV with one float column per entry in ``columns``."""
    if len(columns) != len(arrays) or not columns:
        raise InvalidArgumentError("need one array per named column")
    with open(path, "w", newline="") as fh:
        fh.write("timestamp," + ",".join(columns) + "\n")
        for i, ts in enumerate(timestamps):
            fields = [format_utc(ts)] + [repr(float(arr[i])) for arr in arrays]
            fh.write(",".join(fields) + "\n")


def read_timestamp_table(path) -> tuple[list[str], list[datetime], np.ndarray]:
    """Parse a ``timestamp,...`` CSV written by :func:`write_timestamp_table`.

    Returns ``(column names, timestamps, data)`` where ``data`` has shape
    ``(n_rows, n_columns)``.  Raises :class:`CsvFormatError` naming the first
    offending line on any malformed content.
    """
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CsvFormatError("file is empty", line=1)
    header = lines[0].split(",")
    if header[0] != "timestamp" or len(header) < 2 or any(not c for c in header[1:]):
        raise CsvFormatError("expected header 'timestamp,<name>[,...]'", line=1)
    ncols = len(header)
    timestamps: list[datetime] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            raise CsvFormatError("blank line", line=lineno)
        parts = line.split(",")
        if len(parts) != ncols:
            raise CsvFormatError(f"expected {ncols} fields, found {len(parts)}", line=lineno)
        try:
            timestamps.append(parse_utc(parts[0]))
        except ValueError:
            raise CsvFormatError(f"bad timestamp {parts[0]!r}", line=lineno) from None
        try:
            values = [float(p) for p in parts[1:]]
        except ValueError:
            raise CsvFormatError("bad numeric value", line=lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise CsvFormatError("non-finite value", line=lineno)
        rows.append(values)
    data = np.asarray(rows, dtype=np.float64).reshape(len(rows), ncols - 1)
    return header[1:], timestamps, data


def read_series_csv(path) -> TimeSeries:
    """Read a ``timestamp,value`` CSV into a :class:`TimeSeries`.

    Rows must be strictly ascending with a constant step.  A single-row file
    yields a series with the documented fallback step of one second.
    """
    columns, timestamps, data = read_timestamp_table(path)
    if columns != ["value"]:
        raise CsvFormatError("expected header 'timestamp,value'", line=1)
    if not timestamps:
        raise CsvFormatError("no data rows", line=2)
    if len(timestamps) == 1:
        return TimeSeries(timestamps[0], 1.0, data[:, 0])
    step = (timestamps[1] - timestamps[0]).total_seconds()
    if step <= 0:
        raise CsvFormatError("timestamps must be strictly ascending", line=3)
    start = timestamps[0]
    for i, ts in enumerate(timestamps):
        expected = start + timedelta(seconds=i * step)
        if ts != expected:
            raise CsvFormatError(
                f"expected timestamp {format_utc(expected)}, found {format_utc(ts)}",
                line=i + 2,
            )
    return TimeSeries(start, step, data[:, 0])


def write_series_csv(series: TimeSeries, path) -> None:
    """Write a series in the standard ``timestamp,value`` format."""
    write_timestamp_table(path, ["value"], series.timestamps(), [series.values])

"""Half-hourly demand series: CSV ingestion, perturbation, synthetic fixture.

Timestamps are naive local time throughout; perturbation windows are
stated in local clock hours.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import NamedTuple

from .errors import DataError
from .seeding import rng_from

__all__ = [
    "BIN_MINUTES",
    "TaxiRow",
    "IngestResult",
    "ingest_csv",
    "write_csv",
    "require_contiguous",
    "PerturbWindow",
    "perturb",
    "synthetic_series",
]

BIN_MINUTES = 30


class TaxiRow(NamedTuple):
    timestamp: datetime
    count: int


@dataclass(frozen=True)
class IngestResult:
    rows: list[TaxiRow]
    skipped_rows: int
    # (last bin before the gap, number of missing 30-minute bins)
    gaps: list[tuple[datetime, int]]


def _to_bin(ts: datetime) -> datetime:
    return ts.replace(minute=(ts.minute // BIN_MINUTES) * BIN_MINUTES,
                      second=0, microsecond=0)


def ingest_csv(path: str | Path, timestamp_column: str = "timestamp",
               value_column: str = "passenger_count") -> IngestResult:
    """Parse, sort, and sum raw rows into 30-minute bins.

    Rows that fail to parse (bad timestamp, non-numeric or negative
    count) are counted and skipped; an empty result is an error. Gaps in
    the binned grid are reported, not filled.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    skipped = 0
    sums: dict[datetime, int] = {}
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, header row required")
        for column in (timestamp_column, value_column):
            if column not in reader.fieldnames:
                raise DataError(f"{path}: missing column {column!r} "
                                f"(header has {reader.fieldnames})")
        for row in reader:
            try:
                ts = datetime.fromisoformat(row[timestamp_column].strip())
                value = float(row[value_column])
            except (ValueError, TypeError, AttributeError):
                skipped += 1
                continue
            if not math.isfinite(value) or value < 0:
                skipped += 1
                continue
            key = _to_bin(ts)
            sums[key] = sums.get(key, 0) + int(round(value))
    if not sums:
        raise DataError(f"{path}: no parseable rows")
    rows = [TaxiRow(ts, sums[ts]) for ts in sorted(sums)]
    step = timedelta(minutes=BIN_MINUTES)
    gaps: list[tuple[datetime, int]] = []
    for prev, cur in zip(rows, rows[1:]):
        delta = cur.timestamp - prev.timestamp
        if delta > step:
            gaps.append((prev.timestamp, delta // step - 1))
    return IngestResult(rows, skipped, gaps)


def write_csv(rows: Iterable[TaxiRow], path: str | Path,
              timestamp_column: str = "timestamp",
              value_column: str = "passenger_count") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([timestamp_column, value_column])
        for row in rows:
            writer.writerow([row.timestamp.isoformat(), row.count])


def require_contiguous(rows: Sequence[TaxiRow]) -> None:
    """Reject series with gaps; forecast alignment assumes a solid grid."""
    step = timedelta(minutes=BIN_MINUTES)
    for prev, cur in zip(rows, rows[1:]):
        if cur.timestamp - prev.timestamp != step:
            raise DataError(
                f"series not contiguous at {prev.timestamp.isoformat()} -> "
                f"{cur.timestamp.isoformat()}; fill or trim gaps first")


@dataclass(frozen=True)
class PerturbWindow:
    """Multiplicative scaling of bins inside a local-time window.

    Applies to bins with start_hour <= clock hour < end_hour, from
    start_date onward, optionally on weekdays only.
    """

    weekday_only: bool
    start_hour: float
    end_hour: float
    factor: float
    start_date: date

    def __post_init__(self) -> None:
        if not 0.0 <= self.start_hour < self.end_hour <= 24.0:
            raise DataError(f"bad window hours [{self.start_hour}, {self.end_hour})")
        if self.factor < 0.0 or not math.isfinite(self.factor):
            raise DataError(f"bad scale factor {self.factor}")

    def matches(self, ts: datetime) -> bool:
        if ts.date() < self.start_date:
            return False
        if self.weekday_only and ts.weekday() >= 5:
            return False
        hour = ts.hour + ts.minute / 60.0
        return self.start_hour <= hour < self.end_hour

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbWindow":
        try:
            start = data["start_date"]
            if isinstance(start, str):
                start = date.fromisoformat(start)
            return cls(bool(data["weekday_only"]), float(data["start_hour"]),
                       float(data["end_hour"]), float(data["factor"]), start)
        except (KeyError, ValueError, TypeError) as exc:
            raise DataError(f"bad perturbation entry {data!r}: {exc}") from exc

    def to_dict(self) -> dict:
        return {"weekday_only": self.weekday_only, "start_hour": self.start_hour,
                "end_hour": self.end_hour, "factor": self.factor,
                "start_date": self.start_date.isoformat()}


def perturb(rows: Sequence[TaxiRow],
            windows: Sequence[PerturbWindow]) -> list[TaxiRow]:
    """Scale counts in the matching bins, banker's rounding to integers.

    Windows must be disjoint so each bin has a single well-defined
    factor; two windows whose hour ranges intersect can both match the
    same future bin (weekday-only filters narrow but never separate
    them), so they are rejected up front.
    """
    for i, a in enumerate(windows):
        for b in windows[i + 1:]:
            if a.start_hour < b.end_hour and b.start_hour < a.end_hour:
                raise DataError(
                    f"overlapping perturbation windows "
                    f"[{a.start_hour}, {a.end_hour}) and [{b.start_hour}, {b.end_hour})")
    out: list[TaxiRow] = []
    for row in rows:
        count = row.count
        for window in windows:
            if window.matches(row.timestamp):
                count = int(round(count * window.factor))
                break
        out.append(TaxiRow(row.timestamp, count))
    return out


def _weekday_mean(hour: float) -> float:
    return (6000.0
            + 14000.0 * math.exp(-((hour - 8.5) ** 2) / 4.5)
            + 16000.0 * math.exp(-((hour - 18.0) ** 2) / 8.0)
            + 3000.0 * math.exp(-((hour - 13.0) ** 2) / 8.0))


def _weekend_mean(hour: float) -> float:
    return (7000.0
            + 12000.0 * math.exp(-((hour - 14.0) ** 2) / 18.0)
            + 9000.0 * math.exp(-((hour - 22.0) ** 2) / 8.0))


def synthetic_series(weeks: float, seed: int = 0,
                     start: datetime | None = None) -> list[TaxiRow]:
    """City-demand style fixture: weekday rush hours, flatter weekends.

    Half-hourly counts around a smooth daily profile with 8% relative
    Gaussian noise, clipped at zero. Deterministic per seed; starts on a
    Monday so weekly structure aligns with the calendar.
    """
    if weeks <= 0:
        raise DataError(f"weeks must be positive, got {weeks}")
    if start is None:
        start = datetime(2015, 1, 5)
    rng = rng_from(seed, "taxi")
    num_bins = int(round(weeks * 7 * 24 * 60 / BIN_MINUTES))
    rows: list[TaxiRow] = []
    step = timedelta(minutes=BIN_MINUTES)
    ts = start
    for _ in range(num_bins):
        hour = ts.hour + ts.minute / 60.0
        mean = _weekday_mean(hour) if ts.weekday() < 5 else _weekend_mean(hour)
        value = mean + rng.normal(0.0, 0.08 * mean)
        rows.append(TaxiRow(ts, max(0, int(round(value)))))
        ts = ts + step
    return rows

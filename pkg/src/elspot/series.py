"""Daily price series, calendar labels and moving averages."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import datetime as dt
from functools import lru_cache

import numpy as np

from .errors import EmptyInput, GapError, InvalidWindow, ParseError

ITALIAN_FIXED_HOLIDAYS = frozenset({
    (1, 1), (1, 6), (4, 25), (5, 1), (6, 2), (8, 15), (11, 1), (12, 8), (12, 25), (12, 26),
})

HOLIDAY_LABEL = 8


@lru_cache(maxsize=None)
def easter_sunday(year: int) -> dt.date:
    """Gregorian Easter (anonymous Gregorian / Meeus-Jones-Butcher computus)."""
    a = year % 19
    b, c = divmod(year, 100)
    d, e = divmod(b, 4)
    f = (b + 8) // 25
    g = (b - f + 1) // 3
    h = (19 * a + b - d - g + 15) % 30
    i, k = divmod(c, 4)
    l = (32 + 2 * e + 2 * i - h - k) % 7
    m = (a + 11 * h + 22 * l) // 451
    month, day = divmod(h + l - 7 * m + 114, 31)
    return dt.date(year, month, day + 1)


@dataclass(frozen=True)
class HolidayCalendar:
    fixed_dates: frozenset = ITALIAN_FIXED_HOLIDAYS
    easter_monday: bool = True
    extra: frozenset = frozenset()

    def is_holiday(self, date: dt.date) -> bool:
        if (date.month, date.day) in self.fixed_dates or date in self.extra:
            return True
        return self.easter_monday and date == easter_sunday(date.year) + dt.timedelta(days=1)

    @classmethod
    def from_file(cls, path, include_builtin=True):
        """One ISO date per line; blank lines and ``#`` comments are skipped."""
        dates = set()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                try:
                    dates.add(dt.date.fromisoformat(line))
                except ValueError as exc:
                    raise ParseError(lineno, str(exc)) from None
        if include_builtin:
            return cls(extra=frozenset(dates))
        return cls(fixed_dates=frozenset(), easter_monday=False, extra=frozenset(dates))


DEFAULT_CALENDAR = HolidayCalendar()


def day_label(date: dt.date, calendar: HolidayCalendar = DEFAULT_CALENDAR) -> int:
    """1..7 for Monday..Sunday, 8 for a holiday."""
    if calendar.is_holiday(date):
        return HOLIDAY_LABEL
    return date.isoweekday()


@dataclass(frozen=True, eq=False)
class PriceSeries:
    start_date: dt.date
    values: np.ndarray
    labels: np.ndarray = field(default=None)
    calendar: HolidayCalendar = field(default=DEFAULT_CALENDAR, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size < 2:
            raise EmptyInput("a price series needs at least 2 observations")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        labels = self.labels
        if labels is None:
            labels = labels_for(self.start_date, v.size, self.calendar)
        labels = np.array(labels, dtype=np.int8)
        if labels.shape != v.shape or labels.min() < 1 or labels.max() > 8:
            raise ValueError("labels must be one value in 1..8 per observation")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (self.start_date == other.start_date
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.labels, other.labels))

    __hash__ = None

    @property
    def dates(self):
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self))]

    def date_at(self, i) -> dt.date:
        return self.start_date + dt.timedelta(days=int(i))

    def window(self, start, stop) -> "PriceSeries":
        return PriceSeries(self.date_at(start), self.values[start:stop],
                           self.labels[start:stop], self.calendar)

    def future_labels(self, horizon):
        """Labels of the ``horizon`` days after the last observation."""
        return labels_for(self.date_at(len(self)), horizon, self.calendar)


def labels_for(start: dt.date, n, calendar: HolidayCalendar = DEFAULT_CALENDAR):
    return np.array([day_label(start + dt.timedelta(days=i), calendar) for i in range(n)],
                    dtype=np.int8)


def load_csv(path, calendar: HolidayCalendar = DEFAULT_CALENDAR) -> PriceSeries:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInput(f"{path} is empty")
        if [h.strip().lower() for h in header[:2]] != ["date", "price"]:
            raise ParseError(1, "expected header 'date,price'")
        for lineno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append((dt.date.fromisoformat(row[0].strip()), float(row[1])))
            except (ValueError, IndexError) as exc:
                raise ParseError(lineno, str(exc)) from None
    if not rows:
        raise EmptyInput(f"{path} has no data rows")
    rows.sort(key=lambda r: r[0])
    for (d0, _), (d1, _) in zip(rows, rows[1:]):
        if d1 == d0:
            raise ParseError(0, f"duplicate date {d1.isoformat()}")
        if d1 - d0 != dt.timedelta(days=1):
            raise GapError(d0 + dt.timedelta(days=1))
    return PriceSeries(rows[0][0], np.array([r[1] for r in rows]), calendar=calendar)


def write_csv(series: PriceSeries, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "price"])
        for d, v in zip(series.dates, series.values):
            w.writerow([d.isoformat(), repr(float(v))])


def moving_average(values, window):
    """Trailing mean over the last min(t+1, window) values."""
    if window < 1:
        raise InvalidWindow(f"window must be >= 1, got {window}")
    x = np.asarray(values, dtype=float)
    if window == 1:
        return x.copy()
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)

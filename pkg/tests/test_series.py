import datetime as dt

import numpy as np
import pytest

from elspot.errors import EmptyInput, GapError, InvalidWindow, ParseError
from elspot.series import (DEFAULT_CALENDAR, HolidayCalendar, PriceSeries, day_label,
                           easter_sunday, labels_for, load_csv, moving_average, write_csv)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_three_rows(tmp_path):
    p = _write(tmp_path / "a.csv", "date,price\n2009-01-12,1\n2009-01-13,2\n2009-01-14,3\n")
    s = load_csv(p)
    assert len(s) == 3
    assert s.values.tolist() == [1.0, 2.0, 3.0]
    assert s.labels.tolist() == [1, 2, 3]


def test_new_year_is_holiday(tmp_path):
    p = _write(tmp_path / "a.csv", "date,price\n2009-01-01,50\n2009-01-02,51\n")
    assert load_csv(p).labels[0] == 8


def test_gap_reports_missing_date(tmp_path):
    p = _write(tmp_path / "a.csv", "date,price\n2009-01-03,1\n2009-01-05,2\n")
    with pytest.raises(GapError) as info:
        load_csv(p)
    assert "2009-01-04" in str(info.value)


def test_unsorted_rows_are_sorted(tmp_path):
    p = _write(tmp_path / "a.csv", "date,price\n2009-01-06,2\n2009-01-05,1\n")
    s = load_csv(p)
    assert s.start_date == dt.date(2009, 1, 5)
    assert s.values.tolist() == [1.0, 2.0]


def test_parse_error_has_line(tmp_path):
    p = _write(tmp_path / "a.csv", "date,price\n2009-01-05,1\n2009-01-06,abc\n")
    with pytest.raises(ParseError) as info:
        load_csv(p)
    assert info.value.line == 3


def test_empty_file(tmp_path):
    with pytest.raises(EmptyInput):
        load_csv(_write(tmp_path / "a.csv", ""))
    with pytest.raises(EmptyInput):
        load_csv(_write(tmp_path / "b.csv", "date,price\n"))


def test_bad_header(tmp_path):
    with pytest.raises(ParseError):
        load_csv(_write(tmp_path / "a.csv", "day,value\n2009-01-05,1\n"))


@pytest.mark.parametrize("date,label", [
    (dt.date(2009, 1, 5), 1),
    (dt.date(2009, 1, 11), 7),
    (dt.date(2009, 12, 25), 8),
    (dt.date(2010, 4, 5), 8),
    (dt.date(2010, 4, 6), 2),
    (dt.date(2017, 6, 2), 8),
])
def test_day_label(date, label):
    assert day_label(date) == label


@pytest.mark.parametrize("year,easter", [
    (2009, dt.date(2009, 4, 12)), (2010, dt.date(2010, 4, 4)), (2011, dt.date(2011, 4, 24)),
    (2016, dt.date(2016, 3, 27)), (2017, dt.date(2017, 4, 16)), (2019, dt.date(2019, 4, 21)),
])
def test_easter(year, easter):
    assert easter_sunday(year) == easter


def test_calendar_file(tmp_path):
    p = _write(tmp_path / "h.txt", "# local feast\n2009-06-29\n\n")
    cal = HolidayCalendar.from_file(p)
    assert cal.is_holiday(dt.date(2009, 6, 29))
    assert cal.is_holiday(dt.date(2009, 12, 25))
    only = HolidayCalendar.from_file(p, include_builtin=False)
    assert not only.is_holiday(dt.date(2009, 12, 25))
    assert only.is_holiday(dt.date(2009, 6, 29))


def test_label_counts_sum_to_length():
    labels = labels_for(dt.date(2009, 1, 1), 1000, DEFAULT_CALENDAR)
    assert sum(int(np.sum(labels == j)) for j in range(1, 9)) == 1000


def test_moving_average_examples():
    np.testing.assert_allclose(moving_average([1, 2, 3], 1), [1, 2, 3])
    np.testing.assert_allclose(moving_average([2, 2, 2, 2], 30), [2, 2, 2, 2])
    np.testing.assert_allclose(moving_average([0, 10], 2), [0, 5])
    with pytest.raises(InvalidWindow):
        moving_average([1, 2], 0)


def test_moving_average_matches_loop(rng):
    x = rng.normal(size=200)
    w = 30
    ref = [x[max(0, t - w + 1):t + 1].mean() for t in range(x.size)]
    np.testing.assert_allclose(moving_average(x, w), ref, rtol=1e-12, atol=1e-12)


def test_csv_roundtrip(tmp_path, rng):
    s = PriceSeries(dt.date(2012, 2, 27), rng.normal(50, 10, size=40))
    write_csv(s, tmp_path / "s.csv")
    back = load_csv(tmp_path / "s.csv")
    assert back == s
    np.testing.assert_array_equal(back.values, s.values)


def test_series_is_immutable():
    s = PriceSeries(dt.date(2009, 1, 5), [1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 3.0
    with pytest.raises(EmptyInput):
        PriceSeries(dt.date(2009, 1, 5), [1.0])


def test_window_and_future_labels():
    s = PriceSeries(dt.date(2009, 1, 5), np.arange(10.0))
    w = s.window(2, 5)
    assert w.start_date == dt.date(2009, 1, 7)
    assert w.values.tolist() == [2.0, 3.0, 4.0]
    # window ends Friday 2009-01-09; the next two days are Saturday, Sunday
    assert w.future_labels(2).tolist() == [6, 7]

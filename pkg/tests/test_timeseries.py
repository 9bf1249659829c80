from datetime import date, datetime, timedelta

import pytest

from seqmem import (DataError, PerturbWindow, TaxiRow, ingest_csv, perturb,
                    synthetic_series)
from seqmem.timeseries import require_contiguous, write_csv

MONDAY = datetime(2015, 1, 5)


def grid(bins: int, value: int = 10, start: datetime = MONDAY) -> list[TaxiRow]:
    step = timedelta(minutes=30)
    return [TaxiRow(start + i * step, value) for i in range(bins)]


class TestIngest:
    def test_sums_rows_into_bins_and_sorts(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text(
            "timestamp,passenger_count\n"
            "2015-01-05 00:40:00,5\n"
            "2015-01-05 00:10:00,3\n"
            "2015-01-05 00:20:00,4\n"
        )
        result = ingest_csv(path)
        assert [(r.timestamp, r.count) for r in result.rows] == [
            (datetime(2015, 1, 5, 0, 0), 7),
            (datetime(2015, 1, 5, 0, 30), 5),
        ]
        assert result.skipped_rows == 0
        assert result.gaps == []

    def test_reports_gaps(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text(
            "timestamp,passenger_count\n"
            "2015-01-05 00:00:00,1\n"
            "2015-01-05 02:00:00,1\n"
        )
        result = ingest_csv(path)
        assert result.gaps == [(datetime(2015, 1, 5, 0, 0), 3)]
        with pytest.raises(DataError):
            require_contiguous(result.rows)

    def test_skips_malformed_values(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text(
            "timestamp,passenger_count\n"
            "2015-01-05 00:00:00,3\n"
            "2015-01-05 00:05:00,not-a-number\n"
            "2015-01-05 00:10:00,-4\n"
            "2015-01-05 00:15:00,nan\n"
            "2015-01-05 00:20:00,2\n"
        )
        result = ingest_csv(path)
        assert result.skipped_rows == 3
        assert result.rows[0].count == 5

    def test_missing_column_names_the_available_ones(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("when,riders\n2015-01-05 00:00:00,3\n")
        with pytest.raises(DataError, match="riders"):
            ingest_csv(path)
        result = ingest_csv(path, timestamp_column="when", value_column="riders")
        assert len(result.rows) == 1

    def test_empty_file_is_an_error(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("timestamp,passenger_count\n")
        with pytest.raises(DataError):
            ingest_csv(path)

    def test_write_then_ingest_round_trips(self, tmp_path):
        rows = synthetic_series(1, seed=3)
        path = tmp_path / "series.csv"
        write_csv(rows, path)
        back = ingest_csv(path)
        assert [(r.timestamp, r.count) for r in back.rows] \
            == [(r.timestamp, r.count) for r in rows]
        assert back.gaps == []


class TestPerturb:
    def window(self, **kwargs) -> PerturbWindow:
        base = dict(weekday_only=True, start_hour=7.0, end_hour=11.0,
                    factor=0.8, start_date=date(2015, 1, 5))
        base.update(kwargs)
        return PerturbWindow(**base)

    def test_identity_factor_changes_nothing(self):
        rows = grid(336)
        assert perturb(rows, [self.window(factor=1.0)]) == rows

    def test_scales_only_matching_bins(self):
        rows = grid(336, value=10)
        out = perturb(rows, [self.window()])
        for before, after in zip(rows, out):
            ts = before.timestamp
            in_window = ts.weekday() < 5 and 7.0 <= ts.hour + ts.minute / 60 < 11.0
            assert after.count == (8 if in_window else 10)
            assert after.timestamp == ts

    def test_weekends_are_untouched_when_weekday_only(self):
        rows = grid(336)
        out = perturb(rows, [self.window()])
        for before, after in zip(rows, out):
            if before.timestamp.weekday() >= 5:
                assert after.count == before.count

    def test_start_date_gates_the_window(self):
        rows = grid(336)
        out = perturb(rows, [self.window(start_date=date(2015, 1, 7))])
        changed = [r.timestamp.date() for before, r in zip(rows, out)
                   if r.count != before.count]
        assert changed and min(changed) == date(2015, 1, 7)

    def test_rounding_is_ties_to_even(self):
        rows = [TaxiRow(MONDAY + timedelta(hours=8), 5),
                TaxiRow(MONDAY + timedelta(hours=8, minutes=30), 7)]
        out = perturb(rows, [self.window(factor=0.5)])
        assert [r.count for r in out] == [2, 4]  # 2.5 -> 2, 3.5 -> 4

    def test_overlapping_hour_windows_are_rejected(self):
        with pytest.raises(DataError, match="overlap"):
            perturb(grid(48), [self.window(),
                               self.window(start_hour=10.0, end_hour=12.0,
                                           factor=1.2)])

    def test_disjoint_windows_both_apply(self):
        out = perturb(grid(336, value=10),
                      [self.window(),
                       self.window(start_hour=21.0, end_hour=23.0, factor=1.2)])
        counts = {r.timestamp.hour: r.count for r in out
                  if r.timestamp.weekday() == 0 and r.timestamp.minute == 0}
        assert counts[8] == 8 and counts[22] == 12 and counts[15] == 10

    def test_window_validation(self):
        with pytest.raises(DataError):
            self.window(start_hour=12.0, end_hour=9.0)
        with pytest.raises(DataError):
            self.window(end_hour=25.0)
        with pytest.raises(DataError):
            self.window(factor=-0.5)

    def test_dict_round_trip(self):
        w = self.window()
        assert PerturbWindow.from_dict(w.to_dict()) == w


class TestSyntheticSeries:
    def test_grid_shape(self):
        rows = synthetic_series(2, seed=0)
        assert len(rows) == 2 * 7 * 48
        require_contiguous(rows)
        assert rows[0].timestamp == MONDAY
        assert all(r.count >= 0 for r in rows)

    def test_seeded_determinism(self):
        assert synthetic_series(1, seed=5) == synthetic_series(1, seed=5)
        assert synthetic_series(1, seed=5) != synthetic_series(1, seed=6)

    def test_weekday_morning_rush_exceeds_weekend_morning(self):
        rows = synthetic_series(4, seed=1)
        weekday = [r.count for r in rows
                   if r.timestamp.weekday() < 5 and r.timestamp.hour == 8]
        weekend = [r.count for r in rows
                   if r.timestamp.weekday() >= 5 and r.timestamp.hour == 8]
        assert sum(weekday) / len(weekday) > 1.5 * sum(weekend) / len(weekend)

    def test_values_stay_inside_the_encoder_range(self):
        rows = synthetic_series(8, seed=0)
        assert max(r.count for r in rows) < 40000

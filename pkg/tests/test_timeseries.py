import numpy as np
import pytest

from hystdyn import DataError, RawRecord, TimeSeries, load_csv, resample, save_csv, split_train_val
from hystdyn.timeseries import CSV_HEADER


def make_series(n=10, dt=0.1, **overrides):
    fields = dict(
        u_a=np.linspace(0.0, 1.0, n),
        u_b=np.zeros(n),
        temp_a=np.full(n, 25.0),
        temp_b=np.full(n, 25.0),
        theta=np.linspace(-5.0, 5.0, n),
    )
    fields.update(overrides)
    return TimeSeries(dt=dt, **fields)


class TestTimeSeries:
    def test_basic_construction(self):
        s = make_series()
        assert len(s) == 10
        assert s.time()[0] == 0.0
        assert s.time()[-1] == pytest.approx(0.9)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(DataError, match="dt"):
            make_series(dt=0.0)

    def test_rejects_length_mismatch(self):
        with pytest.raises(DataError, match="length"):
            make_series(theta=np.zeros(7))

    def test_rejects_nonfinite(self):
        theta = np.zeros(10)
        theta[4] = np.nan
        with pytest.raises(DataError, match="non-finite"):
            make_series(theta=theta)

    def test_rejects_out_of_range_duty(self):
        with pytest.raises(DataError, match="duty"):
            make_series(u_a=np.linspace(0.0, 1.5, 10))

    def test_clips_duty_rounding_fuzz(self):
        s = make_series(u_a=np.full(10, 1.0 + 1e-12))
        assert s.u_a.max() == 1.0
        assert s.u_a.min() >= 0.0

    def test_channel_lookup(self):
        s = make_series()
        assert np.array_equal(s.channel("theta"), s.theta)
        with pytest.raises(DataError):
            s.channel("bogus")

    def test_slice(self):
        s = make_series()
        part = s.slice(2, 7)
        assert len(part) == 5
        assert np.array_equal(part.theta, s.theta[2:7])
        assert part.dt == s.dt
        with pytest.raises(DataError):
            s.slice(5, 3)


class TestSplit:
    def test_floor_rule(self):
        s = make_series(n=10)
        train, val = split_train_val(s, 0.67)
        assert len(train) == 6
        assert len(val) == 4

    def test_chronological(self):
        s = make_series(n=10)
        train, val = split_train_val(s, 0.5)
        assert np.array_equal(np.concatenate([train.theta, val.theta]), s.theta)

    def test_too_small(self):
        s = make_series(n=4)
        with pytest.raises(DataError):
            split_train_val(s, 0.05)


class TestCsvRoundTrip:
    def test_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        s = make_series(
            n=50,
            u_a=rng.uniform(0, 1, 50),
            theta=rng.normal(0, 30, 50),
            temp_a=rng.uniform(20, 90, 50),
        )
        path = tmp_path / "run.csv"
        save_csv(s, path)
        raw = load_csv(path)
        back = resample(raw, s.dt)
        for name in ("u_a", "u_b", "temp_a", "temp_b", "theta"):
            assert np.array_equal(getattr(back, name), getattr(s, name)), name

    def test_header_written(self, tmp_path):
        path = tmp_path / "run.csv"
        save_csv(make_series(), path)
        first = path.read_text().splitlines()[0]
        assert first == ",".join(CSV_HEADER)

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "run.csv"
        save_csv(make_series(), path)
        assert b"\r" not in path.read_bytes()

    def test_unidirectional_flag_survives_round_trip(self, tmp_path):
        s = make_series(unidirectional=True)
        path = tmp_path / "uni.csv"
        save_csv(s, path)
        header = path.read_text().splitlines()[0]
        assert header == "time_s,u_a,temp_a_c,theta_deg"
        back = load_csv(path)
        assert back.unidirectional
        assert np.array_equal(back.u_a, s.u_a)
        assert np.array_equal(back.theta, s.theta)


class TestLoadCsv:
    def write(self, tmp_path, text):
        path = tmp_path / "data.csv"
        path.write_text(text)
        return path

    def test_missing_required_column_named(self, tmp_path):
        path = self.write(tmp_path, "time_s,u_a,temp_a_c\n0.0,0.1,25.0\n")
        with pytest.raises(DataError, match="theta_deg"):
            load_csv(path)

    def test_optional_columns_zero_filled(self, tmp_path):
        path = self.write(
            tmp_path,
            "time_s,u_a,temp_a_c,theta_deg\n0.0,0.1,25.0,1.0\n0.1,0.2,26.0,2.0\n",
        )
        raw = load_csv(path)
        assert raw.unidirectional
        assert np.array_equal(raw.u_b, np.zeros(2))
        assert np.array_equal(raw.temp_b, np.zeros(2))

    def test_nan_rows_dropped(self, tmp_path):
        path = self.write(
            tmp_path,
            "time_s,u_a,u_b,temp_a_c,temp_b_c,theta_deg\n"
            "0.0,0.1,0.0,25.0,25.0,1.0\n"
            "0.1,,0.0,25.0,25.0,2.0\n"
            "0.2,0.3,0.0,25.0,25.0,3.0\n",
        )
        raw = load_csv(path)
        assert len(raw) == 2
        assert np.array_equal(raw.time_s, [0.0, 0.2])

    def test_non_numeric_cell_reports_position(self, tmp_path):
        path = self.write(
            tmp_path,
            "time_s,u_a,u_b,temp_a_c,temp_b_c,theta_deg\n0.0,oops,0.0,25.0,25.0,1.0\n",
        )
        with pytest.raises(DataError, match=r":2:.*u_a"):
            load_csv(path)

    def test_extra_columns_ignored(self, tmp_path):
        path = self.write(
            tmp_path,
            "time_s,u_a,u_b,temp_a_c,temp_b_c,theta_deg,note\n"
            "0.0,0.1,0.0,25.0,25.0,1.0,7\n0.1,0.1,0.0,25.0,25.0,1.5,8\n",
        )
        raw = load_csv(path)
        assert len(raw) == 2


class TestResample:
    def test_same_grid_is_identity(self):
        s = make_series(n=30)
        raw = RawRecord(
            time_s=s.time(),
            u_a=s.u_a, u_b=s.u_b, temp_a=s.temp_a, temp_b=s.temp_b, theta=s.theta,
        )
        back = resample(raw, s.dt)
        assert np.array_equal(back.theta, s.theta)
        assert np.array_equal(back.u_a, s.u_a)

    def test_linear_interpolation(self):
        raw = RawRecord(
            time_s=np.array([0.0, 1.0]),
            u_a=np.array([0.0, 1.0]),
            u_b=np.zeros(2),
            temp_a=np.array([20.0, 30.0]),
            temp_b=np.zeros(2),
            theta=np.array([0.0, 10.0]),
        )
        out = resample(raw, 0.5)
        assert np.allclose(out.theta, [0.0, 5.0, 10.0])
        assert np.allclose(out.temp_a, [20.0, 25.0, 30.0])

    def test_rejects_gap(self):
        raw = RawRecord(
            time_s=np.array([0.0, 0.1, 2.0]),
            u_a=np.zeros(3), u_b=np.zeros(3),
            temp_a=np.zeros(3), temp_b=np.zeros(3), theta=np.zeros(3),
        )
        with pytest.raises(DataError, match="gap"):
            resample(raw, 0.1)

    def test_rejects_non_increasing_times(self):
        raw = RawRecord(
            time_s=np.array([0.0, 0.2, 0.2]),
            u_a=np.zeros(3), u_b=np.zeros(3),
            temp_a=np.zeros(3), temp_b=np.zeros(3), theta=np.zeros(3),
        )
        with pytest.raises(DataError, match="increas"):
            resample(raw, 0.1)

"""Trace parsing, raw-log conversion, and throughput prediction."""

import random

import pytest

from qubostream.errors import PredictionError, TraceParseError
from qubostream.traces import (
    Trace,
    convert_hsdpa,
    make_trace,
    parse_trace,
    predict_throughput,
    serialize_trace,
)


class TestParse:
    def test_two_samples_duration(self):
        t = parse_trace("0 1000\n1 2000")
        assert t.samples == ((0.0, 1000.0), (1.0, 2000.0))
        assert t.total_duration == 2.0  # last interval mirrors the previous one

    def test_single_sample_duration(self):
        assert parse_trace("0 500").total_duration == 1.0

    def test_non_monotone(self):
        with pytest.raises(TraceParseError) as err:
            parse_trace("1 1000\n0 2000")
        # first line rejected already (must start at 0); build a proper case
        with pytest.raises(TraceParseError) as err:
            parse_trace("0 1000\n2 500\n1 2000")
        assert err.value.line == 3

    def test_negative_throughput(self):
        with pytest.raises(TraceParseError):
            parse_trace("0 -5")

    def test_nonzero_start(self):
        with pytest.raises(TraceParseError):
            parse_trace("1 1000\n2 2000")

    def test_bad_field_count(self):
        with pytest.raises(TraceParseError) as err:
            parse_trace("0 1000\n1 2000 junk extra")
        assert err.value.line == 2

    def test_non_numeric(self):
        with pytest.raises(TraceParseError):
            parse_trace("0 abc")

    def test_empty(self):
        with pytest.raises(TraceParseError):
            parse_trace("# only comments\n")

    def test_all_zero_rejected(self):
        with pytest.raises(TraceParseError):
            parse_trace("0 0\n1 0")

    def test_comments_ignored(self):
        t = parse_trace("# header\n0 100  # inline\n\n5 200\n")
        assert len(t.samples) == 2

    def test_roundtrip(self):
        t = make_trace([(0, 1234.5), (3, 800), (7.5, 2000)])
        assert parse_trace(serialize_trace(t)) == t


class TestTraceQueries:
    def test_throughput_at_cyclic(self):
        t = make_trace([(0, 100), (2, 200)])  # duration 4
        assert t.throughput_at(1.0) == 100
        assert t.throughput_at(3.0) == 200
        assert t.throughput_at(5.0) == 100  # wrapped

    def test_mean_between(self):
        t = make_trace([(0, 100), (2, 300)])  # duration 4
        assert t.mean_between(0, 4) == pytest.approx(200.0)
        assert t.mean_between(1, 3) == pytest.approx(200.0)
        assert t.mean_between(4, 8) == pytest.approx(200.0)  # full wrap

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            Trace(samples=((0.0, 100.0), (0.0, 200.0)), total_duration=1.0)
        with pytest.raises(ValueError):
            Trace(samples=((1.0, 100.0),), total_duration=2.0)


class TestConvertHsdpa:
    def test_single_row(self):
        t = convert_hsdpa("1000000 125000")
        assert t.samples == ((0.0, 1000.0),)

    def test_two_rows(self):
        raw = "5000 250000\n6000 250000"
        t = convert_hsdpa(raw)
        assert t.samples == ((0.0, 2000.0), (1.0, 2000.0))
        assert t.total_duration == 2.0

    def test_non_numeric_names_row(self):
        with pytest.raises(TraceParseError) as err:
            convert_hsdpa("1000 100\n2000 x")
        assert err.value.line == 2

    def test_negative_bytes(self):
        with pytest.raises(TraceParseError):
            convert_hsdpa("1000 -1")

    def test_column_flags(self):
        raw = "tag 9000 77 125000\ntag 10000 77 250000"
        t = convert_hsdpa(raw, ts_col=1, bytes_col=3)
        assert t.samples[0][1] == pytest.approx(1000.0)
        assert t.samples[1][1] == pytest.approx(2000.0)

    def test_interval_flag(self):
        t = convert_hsdpa("0 125000", interval_ms=500)
        assert t.samples[0][1] == pytest.approx(2000.0)

    def test_missing_column(self):
        with pytest.raises(TraceParseError):
            convert_hsdpa("1000", bytes_col=1)


class TestPredict:
    def test_harmonic_pair(self):
        assert predict_throughput([1000, 2000], k=2) == pytest.approx(1333.3333333)

    def test_constant(self):
        assert predict_throughput([800] * 7, k=5) == pytest.approx(800.0)

    def test_k_one_is_last(self):
        assert predict_throughput([100, 900, 400], k=1) == 400.0

    def test_empty(self):
        with pytest.raises(PredictionError):
            predict_throughput([])

    def test_nonpositive(self):
        with pytest.raises(PredictionError):
            predict_throughput([100, 0.0], k=2)

    def test_harmonic_below_arithmetic(self):
        rng = random.Random(31)
        for _ in range(50):
            hist = [rng.uniform(10, 5000) for _ in range(rng.randint(1, 10))]
            k = rng.randint(1, 10)
            window = hist[-k:]
            harmonic = predict_throughput(hist, k=k)
            arithmetic = sum(window) / len(window)
            assert harmonic <= arithmetic + 1e-9
            if len(set(window)) == 1:
                assert harmonic == pytest.approx(arithmetic)

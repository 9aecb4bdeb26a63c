"""Throughput traces: canonical format, raw mobile-log conversion, prediction.

Canonical trace files are UTF-8 text, one ``<time_s> <throughput_kbps>``
sample per line, ``#`` comments allowed.  Times must increase strictly from 0.
The last sample's duration is taken to equal the previous sampling interval
(1 s for single-sample traces).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .errors import PredictionError, TraceParseError

DEFAULT_PREDICTOR_WINDOW = 5


@dataclass(frozen=True)
class Trace:
    """Piecewise-constant throughput, immutable after construction."""

    samples: tuple[tuple[float, float], ...]  # (start_time_s, kbps)
    total_duration: float

    def __post_init__(self):
        if not self.samples:
            raise ValueError("trace needs at least one sample")
        prev = None
        for t, kbps in self.samples:
            if prev is None and t != 0.0:
                raise ValueError("first sample must start at time 0")
            if prev is not None and t <= prev:
                raise ValueError("sample times must increase strictly")
            if kbps < 0:
                raise ValueError("throughput must be >= 0")
            prev = t
        if not any(kbps > 0 for _, kbps in self.samples):
            raise ValueError("trace must contain at least one positive sample")
        if self.total_duration <= self.samples[-1][0]:
            raise ValueError("total_duration must exceed the last sample time")

    def throughput_at(self, t: float) -> float:
        """Throughput at wall time t; the trace repeats cyclically."""
        pos = t % self.total_duration
        starts = [s for s, _ in self.samples]
        i = bisect.bisect_right(starts, pos) - 1
        return self.samples[i][1]

    def mean_kbps(self) -> float:
        total = 0.0
        for i, (t, kbps) in enumerate(self.samples):
            end = self.samples[i + 1][0] if i + 1 < len(self.samples) else self.total_duration
            total += kbps * (end - t)
        return total / self.total_duration

    def mean_between(self, start: float, end: float) -> float:
        """Average throughput over [start, end), repeating cyclically."""
        if end <= start:
            raise ValueError("end must exceed start")
        starts = [s for s, _ in self.samples]
        total = 0.0
        t = start
        while t < end - 1e-12:
            pos = t % self.total_duration
            i = bisect.bisect_right(starts, pos) - 1
            seg_end = starts[i + 1] if i + 1 < len(starts) else self.total_duration
            span = min(seg_end - pos, end - t)
            total += self.samples[i][1] * span
            t += span
        return total / (end - start)


def make_trace(samples) -> Trace:
    """Build a Trace, inferring total duration from the sampling grid."""
    samples = tuple((float(t), float(k)) for t, k in samples)
    if len(samples) >= 2:
        duration = samples[-1][0] + (samples[-1][0] - samples[-2][0])
    elif samples:
        duration = samples[0][0] + 1.0
    else:
        duration = 0.0
    return Trace(samples=samples, total_duration=duration)


def parse_trace(text: str) -> Trace:
    samples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TraceParseError("expected '<time_s> <throughput_kbps>'", line=lineno)
        try:
            t, kbps = float(parts[0]), float(parts[1])
        except ValueError:
            raise TraceParseError(f"non-numeric field in {line!r}", line=lineno) from None
        if samples and t <= samples[-1][0]:
            raise TraceParseError(
                f"time {t} is not greater than previous sample", line=lineno
            )
        if not samples and t != 0.0:
            raise TraceParseError("first sample must start at time 0", line=lineno)
        if kbps < 0:
            raise TraceParseError(f"negative throughput {kbps}", line=lineno)
        samples.append((t, kbps))
    if not samples:
        raise TraceParseError("trace file contains no samples")
    try:
        return make_trace(samples)
    except ValueError as exc:
        raise TraceParseError(str(exc)) from None


def serialize_trace(trace: Trace) -> str:
    lines = [f"{t:g} {kbps:g}" for t, kbps in trace.samples]
    return "\n".join(lines) + "\n"


def load_trace(path) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())


def convert_hsdpa(
    text: str, ts_col: int = 0, bytes_col: int = 1, interval_ms: float = 1000.0
) -> Trace:
    """Convert a raw mobile measurement log to a canonical trace.

    Rows are whitespace-separated with a millisecond timestamp and a byte
    count received during the logging interval; column positions are
    configurable.  Timestamps are rebased to 0 and each row becomes one
    sample with throughput_kbps = 8 * bytes / interval_s / 1000.
    """
    if interval_ms <= 0:
        raise TraceParseError("interval_ms must be positive")
    samples = []
    t0 = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if max(ts_col, bytes_col) >= len(parts):
            raise TraceParseError(
                f"row has {len(parts)} columns, need at least {max(ts_col, bytes_col) + 1}",
                line=lineno,
            )
        try:
            ts_ms = float(parts[ts_col])
            nbytes = float(parts[bytes_col])
        except ValueError:
            raise TraceParseError(f"non-numeric field in {line!r}", line=lineno) from None
        if nbytes < 0:
            raise TraceParseError(f"negative byte count {nbytes}", line=lineno)
        if t0 is None:
            t0 = ts_ms
        t = (ts_ms - t0) / 1000.0
        if samples and t <= samples[-1][0]:
            raise TraceParseError("timestamps must increase strictly", line=lineno)
        kbps = 8.0 * nbytes / interval_ms  # = 8*bytes/interval_s/1000
        samples.append((t, kbps))
    if not samples:
        raise TraceParseError("raw log contains no rows")
    try:
        return make_trace(samples)
    except ValueError as exc:
        raise TraceParseError(str(exc)) from None


def predict_throughput(history, k: int = DEFAULT_PREDICTOR_WINDOW) -> float:
    """Harmonic mean of the last min(k, len(history)) per-segment throughputs."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    history = list(history)
    if not history:
        raise PredictionError("cannot predict from an empty history")
    window = history[-k:]
    if any(v <= 0 for v in window):
        raise PredictionError("history samples must be positive")
    return len(window) / sum(1.0 / v for v in window)

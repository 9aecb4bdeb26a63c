"""Trace-driven DASH playback simulator with QoE scoring.

A session downloads N fixed-duration segments over a throughput trace.  The
first segment always fetches the lowest level into an empty buffer; its
download time is startup delay, not rebuffering.  Every later segment is
chosen by a policy callback from the playback state and the per-segment
measured throughput history.  The simulator is fully deterministic: all
randomness lives inside policies.
"""

from __future__ import annotations

import bisect
import json
import logging
from dataclasses import dataclass, field, asdict

from .errors import CapacityError, ForecastError, PredictionError
from .ladder import BitrateLadder

logger = logging.getLogger(__name__)

SESSION_CSV_HEADER = "index,level,start_s,download_s,rebuffer_s,idle_s,tput_kbps"


class SimulationError(RuntimeError):
    """A policy callback failed mid-session."""


@dataclass(frozen=True)
class PlaybackState:
    wall_time: float = 0.0
    buffer: float = 0.0
    next_segment: int = 0
    last_level: int | None = None
    rebuffer_total: float = 0.0


@dataclass(frozen=True)
class SegmentEvent:
    index: int
    level: int
    start: float  # wall time at download start
    download_duration: float
    rebuffer: float
    idle: float
    measured_throughput: float  # kilobits / download second


@dataclass(frozen=True)
class SessionLog:
    events: tuple[SegmentEvent, ...]
    config: dict
    final_state: PlaybackState


@dataclass(frozen=True)
class QoEReport:
    quality_sum: float
    rebuffer_penalty: float
    switch_sum: float
    total: float


@dataclass
class SessionConfig:
    ladder: BitrateLadder
    num_segments: int | None = None  # None: one pass over the trace
    segment_duration: float = 4.0
    buffer_cap: float = 60.0
    qoe_w: float = 4.3

    def __post_init__(self):
        if self.segment_duration <= 0:
            raise ValueError("segment_duration must be positive")
        if self.buffer_cap < self.segment_duration:
            raise ValueError("buffer_cap must hold at least one segment")
        if self.num_segments is not None and self.num_segments < 1:
            raise ValueError("num_segments must be >= 1")
        if self.qoe_w < 0:
            raise ValueError("qoe_w must be >= 0")

    def resolve_segments(self, trace) -> int:
        if self.num_segments is not None:
            return self.num_segments
        return max(1, int(trace.total_duration // self.segment_duration))

    def echo(self) -> dict:
        d = asdict(self)
        d["ladder"] = {
            "levels_kbps": list(self.ladder.levels_kbps),
            "quality": list(self.ladder.quality),
        }
        return d


def download_time(trace, t0: float, kilobits: float) -> float:
    """Smallest dt with integral of throughput over [t0, t0+dt] = kilobits.

    The trace repeats cyclically past its end.
    """
    if kilobits <= 0:
        raise ValueError(f"kilobits must be positive, got {kilobits}")
    samples = trace.samples
    duration = trace.total_duration
    starts = [s for s, _ in samples]
    pos = t0 % duration
    i = bisect.bisect_right(starts, pos) - 1
    remaining = float(kilobits)
    elapsed = 0.0
    while True:
        kbps = samples[i][1]
        end = starts[i + 1] if i + 1 < len(samples) else duration
        span = end - pos
        capacity = kbps * span
        if kbps > 0 and capacity >= remaining:
            return elapsed + remaining / kbps
        elapsed += span
        remaining -= capacity
        i += 1
        if i == len(samples):
            i = 0
            pos = 0.0
        else:
            pos = end


def step(
    state: PlaybackState,
    level: int,
    size_kilobits: float,
    trace,
    segment_duration: float,
    buffer_cap: float,
) -> tuple[PlaybackState, SegmentEvent]:
    """Download one segment and advance the player.

    If admitting the segment would overflow the buffer cap, the player idles
    first (the buffer drains during the wait), then downloads.  Rebuffering
    is the stall while the download outlasts the remaining buffer.
    """
    idle = max(0.0, state.buffer + segment_duration - buffer_cap)
    buffer_at_start = max(state.buffer - idle, 0.0)
    start = state.wall_time + idle
    dl = download_time(trace, start, size_kilobits)
    rebuffer = max(dl - buffer_at_start, 0.0)
    new_buffer = min(buffer_cap, max(buffer_at_start - dl, 0.0) + segment_duration)
    event = SegmentEvent(
        index=state.next_segment,
        level=level,
        start=start,
        download_duration=dl,
        rebuffer=rebuffer,
        idle=idle,
        measured_throughput=size_kilobits / dl,
    )
    new_state = PlaybackState(
        wall_time=start + dl,
        buffer=new_buffer,
        next_segment=state.next_segment + 1,
        last_level=level,
        rebuffer_total=state.rebuffer_total + rebuffer,
    )
    return new_state, event


def simulate_session(trace, policy, config: SessionConfig) -> SessionLog:
    """Run one playback session under ``policy``.

    ``policy`` is a callable (state, history) -> level index; ``history`` is
    the list of measured per-segment throughputs so far.  A policy object may
    also expose ``start_session(num_segments, config)`` to learn the horizon.
    """
    n = config.resolve_segments(trace)
    ladder = config.ladder

    if hasattr(policy, "start_session"):
        policy.start_session(n, config)

    # startup: lowest level into an empty buffer; stall excluded from rebuffer
    size0 = ladder.segment_kilobits(0, config.segment_duration)
    dl0 = download_time(trace, 0.0, size0)
    events = [
        SegmentEvent(
            index=0,
            level=0,
            start=0.0,
            download_duration=dl0,
            rebuffer=0.0,
            idle=0.0,
            measured_throughput=size0 / dl0,
        )
    ]
    state = PlaybackState(
        wall_time=dl0,
        buffer=config.segment_duration,
        next_segment=1,
        last_level=0,
        rebuffer_total=0.0,
    )
    history = [events[0].measured_throughput]

    for seg in range(1, n):
        try:
            level = policy(state, history)
        except (CapacityError, ForecastError, PredictionError):
            raise
        except Exception as exc:
            raise SimulationError(f"policy failed at segment {seg}: {exc}") from exc
        if not isinstance(level, int) or not 0 <= level < ladder.num_levels:
            raise SimulationError(
                f"policy returned invalid level {level!r} at segment {seg}"
            )
        size = ladder.segment_kilobits(level, config.segment_duration)
        state, event = step(
            state, level, size, trace, config.segment_duration, config.buffer_cap
        )
        events.append(event)
        history.append(event.measured_throughput)

    if state.wall_time > trace.total_duration:
        logger.warning(
            "session outlasted the trace (%.1f s > %.1f s); trace repeated cyclically",
            state.wall_time,
            trace.total_duration,
        )
    return SessionLog(events=tuple(events), config=config.echo(), final_state=state)


def compute_qoe(log: SessionLog, w: float, quality) -> QoEReport:
    """Session score: sum of segment qualities, minus w times total rebuffer
    seconds, minus the summed absolute quality change between consecutive
    segments."""
    if not log.events:
        raise ValueError("cannot score an empty session")
    q = [quality[e.level] for e in log.events]
    quality_sum = 0.0
    for v in q:
        quality_sum += v
    rebuf = 0.0
    for e in log.events:
        rebuf += e.rebuffer
    rebuffer_penalty = w * rebuf
    switch_sum = 0.0
    for prev, cur in zip(q, q[1:]):
        switch_sum += abs(cur - prev)
    total = quality_sum - rebuffer_penalty - switch_sum
    return QoEReport(
        quality_sum=quality_sum,
        rebuffer_penalty=rebuffer_penalty,
        switch_sum=switch_sum,
        total=total,
    )


class PlanPolicy:
    """Replays a precomputed per-segment level plan (index 0 = startup)."""

    def __init__(self, plan):
        self.plan = list(plan)

    def start_session(self, num_segments, config):
        if len(self.plan) < num_segments:
            raise ValueError(
                f"plan covers {len(self.plan)} segments, session has {num_segments}"
            )

    def __call__(self, state, history):
        return self.plan[state.next_segment]


# --- serialization ----------------------------------------------------------


def session_csv(log: SessionLog) -> str:
    lines = [SESSION_CSV_HEADER]
    for e in log.events:
        lines.append(
            f"{e.index},{e.level},{e.start!r},{e.download_duration!r},"
            f"{e.rebuffer!r},{e.idle!r},{e.measured_throughput!r}"
        )
    return "\n".join(lines) + "\n"


def session_json(log: SessionLog, qoe: QoEReport | None = None) -> str:
    doc = {
        "config": log.config,
        "events": [asdict(e) for e in log.events],
        "final_state": asdict(log.final_state),
    }
    if qoe is not None:
        doc["qoe"] = asdict(qoe)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"

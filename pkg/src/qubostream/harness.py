"""Experiment orchestration: run policies over traces, emit report rows.

Reports are byte-reproducible for a fixed seed: rows are sorted, floats are
rendered with repr (shortest round-trip), and wall-clock timings stay out of
the output unless explicitly requested.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import abr
from .anneal import SaParams
from .errors import ConfigError
from .ladder import BitrateLadder, default_ladder
from .policies import BbaParams, MpcParams, make_policy
from .sim import SessionConfig, compute_qoe, session_csv, session_json, simulate_session
from .traces import Trace

CSV_COLUMNS = (
    "trace",
    "policy",
    "qoe",
    "quality_sum",
    "rebuf_s",
    "switch_sum",
    "mean_level",
    "solve_ms",
)


@dataclass
class ExperimentConfig:
    traces: list[tuple[str, Trace]] = field(default_factory=list)
    policies: list[str] = field(default_factory=lambda: ["bba", "mpc", "qubo", "rate"])
    ladder: BitrateLadder = field(default_factory=default_ladder)
    num_segments: int | None = None
    segment_duration: float = 4.0
    buffer_cap: float = 60.0
    qoe_w: float = 4.3
    abr: abr.AbrQuboConfig = field(default_factory=abr.AbrQuboConfig)
    sa: SaParams = field(default_factory=SaParams)
    bba: BbaParams = field(default_factory=BbaParams)
    mpc: MpcParams | None = None
    rate_safety: float = 0.9
    qubo_solver: str = "exact"
    full_horizon_mode: str = "exact"
    seed: int = 0
    timings: bool = False

    def session(self) -> SessionConfig:
        return SessionConfig(
            ladder=self.ladder,
            num_segments=self.num_segments,
            segment_duration=self.segment_duration,
            buffer_cap=self.buffer_cap,
            qoe_w=self.qoe_w,
        )


@dataclass(frozen=True)
class CompareRow:
    trace: str
    policy: str
    qoe: float
    quality_sum: float
    rebuf_s: float
    switch_sum: float
    mean_level: float
    solve_ms: float | None  # None when timings are disabled


def run_cell(config: ExperimentConfig, trace_name: str, trace: Trace, policy_name: str):
    """One (trace, policy) cell: simulate, score, time."""
    session = config.session()
    sa = SaParams(
        sweeps=config.sa.sweeps,
        restarts=config.sa.restarts,
        t_initial=config.sa.t_initial,
        t_final=config.sa.t_final,
        dynamic_offset_step=config.sa.dynamic_offset_step,
        seed=config.seed,
    )
    started = time.perf_counter()
    policy = make_policy(
        policy_name,
        trace,
        config.ladder,
        session,
        abr_config=config.abr,
        sa_params=sa,
        bba_params=config.bba,
        mpc_params=config.mpc,
        rate_safety=config.rate_safety,
        qubo_solver=config.qubo_solver,
        full_horizon_mode=config.full_horizon_mode,
    )
    log = simulate_session(trace, policy, session)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    report = compute_qoe(log, session.qoe_w, config.ladder.quality)
    rebuf = 0.0
    for e in log.events:
        rebuf += e.rebuffer
    mean_level = sum(e.level for e in log.events) / len(log.events)
    row = CompareRow(
        trace=trace_name,
        policy=policy_name,
        qoe=report.total,
        quality_sum=report.quality_sum,
        rebuf_s=rebuf,
        switch_sum=report.switch_sum,
        mean_level=mean_level,
        solve_ms=elapsed_ms if config.timings else None,
    )
    return row, log, report


def run_compare(config: ExperimentConfig, log_sink=None) -> list[CompareRow]:
    """All (trace, policy) cells, sorted by (trace, policy).

    ``log_sink``, if given, receives (trace_name, policy_name, log, report)
    per cell for session-log emission.
    """
    if not config.traces:
        raise ConfigError("no traces configured")
    if not config.policies:
        raise ConfigError("no policies configured")
    rows = []
    for trace_name, trace in sorted(config.traces, key=lambda kv: kv[0]):
        for policy_name in sorted(config.policies):
            row, log, report = run_cell(config, trace_name, trace, policy_name)
            rows.append(row)
            if log_sink is not None:
                log_sink(trace_name, policy_name, log, report)
    return rows


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        solve = "" if r.solve_ms is None else format(r.solve_ms, ".3f")
        lines.append(
            f"{r.trace},{r.policy},{r.qoe!r},{r.quality_sum!r},{r.rebuf_s!r},"
            f"{r.switch_sum!r},{r.mean_level!r},{solve}"
        )
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> str:
    docs = []
    for r in rows:
        d = {
            "trace": r.trace,
            "policy": r.policy,
            "qoe": r.qoe,
            "quality_sum": r.quality_sum,
            "rebuf_s": r.rebuf_s,
            "switch_sum": r.switch_sum,
            "mean_level": r.mean_level,
        }
        if r.solve_ms is not None:
            d["solve_ms"] = r.solve_ms
        docs.append(d)
    return json.dumps(docs, indent=2, sort_keys=True) + "\n"


def write_session_logs(directory):
    """Log sink writing one CSV and one JSON document per cell."""
    import os

    os.makedirs(directory, exist_ok=True)

    def sink(trace_name, policy_name, log, report):
        base = os.path.join(directory, f"{trace_name}__{policy_name}")
        with open(base + ".csv", "w", encoding="utf-8") as fh:
            fh.write(session_csv(log))
        with open(base + ".json", "w", encoding="utf-8") as fh:
            fh.write(session_json(log, report))

    return sink

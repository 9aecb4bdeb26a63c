"""QUBO-based adaptive bitrate control with a trace-driven evaluation harness.

Layers, bottom up: ``qubo`` (models and the spin form), ``anneal`` (exhaustive
oracle plus the digital-annealer-style solver with native/pure-Python
kernels), ``traces``/``sim`` (throughput data and deterministic playback),
``abr`` (the window-to-QUBO compiler), ``policies`` (baselines and the
offline optimum), ``harness``/``cli`` (experiments).
"""

from .anneal import SaParams, SolveResult, solve_exhaustive, solve_sa
from .abr import AbrQuboConfig, AbrWindow, assemble, decode, plan_full_horizon, qubo_abr_select
from .ladder import BitrateLadder, default_ladder, make_ladder
from .qubo import IsingModel, QuboModel, from_ising, ising_energy, read_qubo_text, to_ising, write_qubo_text
from .sim import (
    PlaybackState,
    PlanPolicy,
    QoEReport,
    SegmentEvent,
    SessionConfig,
    SessionLog,
    compute_qoe,
    download_time,
    simulate_session,
    step,
)
from .traces import Trace, convert_hsdpa, parse_trace, predict_throughput, serialize_trace

__version__ = "0.1.0"

__all__ = [
    "AbrQuboConfig",
    "AbrWindow",
    "BitrateLadder",
    "IsingModel",
    "PlaybackState",
    "PlanPolicy",
    "QoEReport",
    "QuboModel",
    "SaParams",
    "SegmentEvent",
    "SessionConfig",
    "SessionLog",
    "SolveResult",
    "Trace",
    "assemble",
    "compute_qoe",
    "convert_hsdpa",
    "decode",
    "default_ladder",
    "download_time",
    "from_ising",
    "ising_energy",
    "make_ladder",
    "parse_trace",
    "plan_full_horizon",
    "predict_throughput",
    "qubo_abr_select",
    "read_qubo_text",
    "serialize_trace",
    "simulate_session",
    "solve_exhaustive",
    "solve_sa",
    "step",
    "to_ising",
    "write_qubo_text",
]

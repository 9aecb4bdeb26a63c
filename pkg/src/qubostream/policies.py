"""Reference ABR policies and the offline optimum.

All policies share the simulator callback shape (state, history) -> level.
``offline_optimal`` brute-forces every level plan through the real simulator
and is the yardstick the other policies are measured against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import abr
from .anneal import SaParams, solve_sa
from .errors import CapacityError, ConfigError
from .ladder import BitrateLadder
from .sim import PlanPolicy, QoEReport, SessionConfig, compute_qoe, simulate_session
from .traces import predict_throughput

MPC_MAX_SEQUENCES = 1_000_000
OFFLINE_MAX_SEGMENTS = 10
OFFLINE_MAX_PLANS = 10_000_000


@dataclass
class BbaParams:
    reservoir: float = 5.0
    cushion: float = 10.0

    def __post_init__(self):
        if self.reservoir <= 0 or self.cushion <= 0:
            raise ValueError("reservoir and cushion must be positive")


@dataclass
class MpcParams:
    lookahead: int = 5
    rebuffer_weight: float = 4.3
    predictor_window: int = 5

    def __post_init__(self):
        if self.lookahead < 1:
            raise ValueError("lookahead must be >= 1")


def bba_select(buffer: float, ladder: BitrateLadder, params: BbaParams) -> int:
    """Buffer-threshold rule: lowest below the reservoir, highest above
    reservoir+cushion, linear bitrate map in between (discretized downward)."""
    if buffer < 0:
        raise ValueError("buffer must be >= 0")
    if buffer <= params.reservoir:
        return 0
    if buffer >= params.reservoir + params.cushion:
        return ladder.num_levels - 1
    r_min = ladder.levels_kbps[0]
    r_max = ladder.levels_kbps[-1]
    target = r_min + (buffer - params.reservoir) / params.cushion * (r_max - r_min)
    level = 0
    for l, rate in enumerate(ladder.levels_kbps):
        if rate <= target:
            level = l
    return level


def rate_select(bandwidth_kbps: float, ladder: BitrateLadder, safety: float = 1.0) -> int:
    """Highest level affordable at safety * predicted bandwidth."""
    if bandwidth_kbps <= 0:
        raise ValueError("bandwidth must be positive")
    budget = safety * bandwidth_kbps
    level = 0
    for l, rate in enumerate(ladder.levels_kbps):
        if rate <= budget:
            level = l
    return level


def mpc_select(
    state,
    predicted_kbps,
    ladder: BitrateLadder,
    params: MpcParams,
    segment_duration: float,
    buffer_cap: float,
) -> int:
    """Enumerate every level sequence over the prediction window, roll the
    buffer model forward, score by the QoE metric (absolute switch term), and
    return the first level of the best sequence.  Ties take the lower level."""
    predictions = [float(c) for c in predicted_kbps]
    if not predictions:
        raise ValueError("need at least one predicted throughput")
    L = ladder.num_levels
    W = len(predictions)
    if L**W > MPC_MAX_SEQUENCES:
        raise CapacityError(f"{L}^{W} sequences exceed the MPC enumeration bound")

    prev_q = ladder.quality[state.last_level] if state.last_level is not None else None
    best_score = -math.inf
    best_first = 0
    for seq in itertools.product(range(L), repeat=W):
        buf = state.buffer
        pq = prev_q
        score = 0.0
        for i, level in enumerate(seq):
            dl = ladder.segment_kilobits(level, segment_duration) / predictions[i]
            stall = max(dl - buf, 0.0)
            buf = min(buffer_cap, max(buf - dl, 0.0) + segment_duration)
            q = ladder.quality[level]
            score += q - params.rebuffer_weight * stall
            if pq is not None:
                score -= abs(q - pq)
            pq = q
        if score > best_score:
            best_score = score
            best_first = seq[0]
    return best_first


def offline_optimal(
    trace, ladder: BitrateLadder, session: SessionConfig
) -> tuple[list[int], QoEReport]:
    """Best level plan by exhaustive simulation.

    Enumerates every plan for segments after the fixed lowest-level startup,
    replays each through the simulator verbatim, and keeps the highest QoE
    (ties to the lexicographically smallest plan).
    """
    n = session.resolve_segments(trace)
    L = ladder.num_levels
    if n > OFFLINE_MAX_SEGMENTS or L**n > OFFLINE_MAX_PLANS:
        raise CapacityError(
            f"offline optimum limited to {OFFLINE_MAX_SEGMENTS} segments "
            f"and {OFFLINE_MAX_PLANS} plans (got N={n}, L^N={L**n})"
        )
    best_plan = None
    best_report = None
    for tail in itertools.product(range(L), repeat=n - 1):
        plan = [0, *tail]
        log = simulate_session(trace, PlanPolicy(plan), session)
        report = compute_qoe(log, session.qoe_w, ladder.quality)
        if best_report is None or report.total > best_report.total:
            best_plan = plan
            best_report = report
    return best_plan, best_report


# --- simulator-facing policy objects -----------------------------------------


class BbaPolicy:
    def __init__(self, ladder: BitrateLadder, params: BbaParams | None = None):
        self.ladder = ladder
        self.params = params or BbaParams()

    def __call__(self, state, history):
        return bba_select(state.buffer, self.ladder, self.params)


class RatePolicy:
    def __init__(self, ladder: BitrateLadder, safety: float = 0.9, predictor_window: int = 5):
        self.ladder = ladder
        self.safety = safety
        self.predictor_window = predictor_window

    def __call__(self, state, history):
        if not history:
            return 0
        return rate_select(
            predict_throughput(history, self.predictor_window), self.ladder, self.safety
        )


class MpcPolicy:
    def __init__(
        self,
        ladder: BitrateLadder,
        params: MpcParams | None = None,
        segment_duration: float = 4.0,
        buffer_cap: float = 60.0,
    ):
        self.ladder = ladder
        self.params = params or MpcParams()
        self.segment_duration = segment_duration
        self.buffer_cap = buffer_cap
        self._num_segments = None

    def start_session(self, num_segments, config):
        self._num_segments = num_segments
        self.segment_duration = config.segment_duration
        self.buffer_cap = config.buffer_cap

    def __call__(self, state, history):
        horizon = self.params.lookahead
        if self._num_segments is not None:
            horizon = min(horizon, self._num_segments - state.next_segment)
        horizon = max(horizon, 1)
        if not history:
            return 0
        bandwidth = predict_throughput(history, self.params.predictor_window)
        return mpc_select(
            state,
            [bandwidth] * horizon,
            self.ladder,
            self.params,
            self.segment_duration,
            self.buffer_cap,
        )


class QuboPolicy:
    """Receding-horizon policy around the compiled window model.

    ``solver="exact"`` (default) minimizes each window with the chain dynamic
    program; ``"sa"`` hands the assembled QUBO to the annealer, the software
    stand-in for annealing hardware.
    """

    def __init__(
        self,
        ladder: BitrateLadder,
        config: abr.AbrQuboConfig | None = None,
        sa_params: SaParams | None = None,
        predictor_window: int = 5,
        solver: str = "exact",
    ):
        if solver not in ("exact", "sa"):
            raise ValueError(f"unknown window solver {solver!r}")
        self.ladder = ladder
        self.config = config or abr.AbrQuboConfig()
        self.sa_params = sa_params or SaParams()
        self.predictor_window = predictor_window
        self.solver = solver
        self._num_segments = None
        self.segment_duration = 4.0
        self.buffer_cap = 60.0

    def start_session(self, num_segments, config):
        self._num_segments = num_segments
        self.segment_duration = config.segment_duration
        self.buffer_cap = config.buffer_cap

    def __call__(self, state, history):
        remaining = (
            self._num_segments - state.next_segment
            if self._num_segments is not None
            else self.config.window
        )
        solver = None
        if self.solver == "sa":
            solver = lambda model: solve_sa(model, self.sa_params)
        return abr.qubo_abr_select(
            state,
            history,
            self.config,
            self.ladder,
            solver,
            max(remaining, 1),
            self.segment_duration,
            self.buffer_cap,
            self.predictor_window,
        )


POLICY_NAMES = ("bba", "mpc", "qubo", "qubo-full", "rate")


def make_policy(
    name: str,
    trace,
    ladder: BitrateLadder,
    session: SessionConfig,
    abr_config: abr.AbrQuboConfig | None = None,
    sa_params: SaParams | None = None,
    bba_params: BbaParams | None = None,
    mpc_params: MpcParams | None = None,
    rate_safety: float = 0.9,
    qubo_solver: str = "exact",
    full_horizon_mode: str = "exact",
):
    """Policy registry used by the CLI; ``qubo-full`` plans offline first."""
    if name == "bba":
        return BbaPolicy(ladder, bba_params)
    if name == "rate":
        return RatePolicy(ladder, rate_safety)
    if name == "mpc":
        params = mpc_params or MpcParams(rebuffer_weight=session.qoe_w)
        return MpcPolicy(ladder, params, session.segment_duration, session.buffer_cap)
    if name == "qubo":
        return QuboPolicy(ladder, abr_config, sa_params, solver=qubo_solver)
    if name == "qubo-full":
        plan = abr.plan_full_horizon(
            trace,
            ladder,
            abr_config or abr.AbrQuboConfig(),
            session,
            mode=full_horizon_mode,
            sa_params=sa_params,
        )
        return PlanPolicy(plan)
    raise ConfigError(
        f"unknown policy {name!r}; valid names: {', '.join(POLICY_NAMES)}"
    )

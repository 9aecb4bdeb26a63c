"""Compile bitrate selection windows into QUBO models and decode solutions.

The model over a W-segment window uses one selection bit per
(segment, level) plus K slack bits per segment:

- quality: -quality_weight * q(level) on each selection bit, so higher
  quality lowers the energy;
- switching: switch_weight * (segment quality - previous segment quality)^2
  between adjacent window positions, with the last committed quality entering
  as a constant for the first position;
- buffer safety: for each position, the one-sided budget
  "selected segment kilobits <= predicted bandwidth * forecast buffer"
  becomes an equality via binary slack, squared and weighted;
- exactly-one-level: onehot_weight * (row sum - 1)^2 per segment.

Budgets depend on the in-window buffer trajectory, which itself depends on
the decisions; a quadratic model cannot express that, so buffers are forecast
along a reference plan (lowest level first) and refined against the decoded
solution of the previous pass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from . import sim
from .anneal import SaParams, SolveResult, solve_sa
from .errors import CapacityError, ForecastError
from .ladder import BitrateLadder
from .qubo import QuboModel
from .traces import predict_throughput


@dataclass(frozen=True)
class AbrWindow:
    """Decision window: per-position, per-level segment sizes in kilobits."""

    sizes: tuple[tuple[float, ...], ...]
    segment_duration: float
    prev_quality: float | None = None

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("window needs at least one segment")
        width = len(self.sizes[0])
        for row in self.sizes:
            if len(row) != width:
                raise ValueError("all positions must offer the same level count")
            if any(s <= 0 for s in row):
                raise ValueError("segment sizes must be positive")
        if self.segment_duration <= 0:
            raise ValueError("segment_duration must be positive")

    @property
    def num_segments(self) -> int:
        return len(self.sizes)

    @property
    def num_levels(self) -> int:
        return len(self.sizes[0])

    @classmethod
    def from_ladder(
        cls,
        ladder: BitrateLadder,
        num_segments: int,
        segment_duration: float,
        prev_quality: float | None = None,
    ) -> "AbrWindow":
        row = tuple(b * segment_duration for b in ladder.levels_kbps)
        return cls(
            sizes=tuple(row for _ in range(num_segments)),
            segment_duration=segment_duration,
            prev_quality=prev_quality,
        )


@dataclass(frozen=True)
class BufferForecast:
    """Projected buffer seconds and download budgets along a reference plan."""

    buffers: tuple[float, ...]
    budgets: tuple[int, ...]  # kilobits affordable inside the buffer, floored
    feasible: tuple[bool, ...]
    bandwidth: tuple[float, ...]  # predicted kbps used per position


@dataclass
class VariableLayout:
    """Bijection between (segment, level) / (segment, slack bit) and flat bits.

    Selection bits occupy [0, W*L) row-major by segment; slack bits follow.
    ``units[n]`` is the kilobit quantization of position n's budget row, set
    when the rebuffer penalty is built.
    """

    num_segments: int
    num_levels: int
    slack_bits: int
    units: list[int] = field(default_factory=list)
    active: list[bool] = field(default_factory=list)  # position carries a budget penalty

    def __post_init__(self):
        if min(self.num_segments, self.num_levels, self.slack_bits) < 1:
            raise ValueError("layout dimensions must be >= 1")
        if not self.units:
            self.units = [1] * self.num_segments
        if not self.active:
            self.active = [False] * self.num_segments

    @property
    def num_selection(self) -> int:
        return self.num_segments * self.num_levels

    @property
    def num_bits(self) -> int:
        return self.num_segments * (self.num_levels + self.slack_bits)

    def sel_index(self, n: int, l: int) -> int:
        return n * self.num_levels + l

    def slack_index(self, n: int, k: int) -> int:
        return self.num_selection + n * self.slack_bits + k


def layout_variables(num_segments: int, num_levels: int, slack_bits: int) -> VariableLayout:
    return VariableLayout(num_segments, num_levels, slack_bits)


@dataclass
class AbrQuboConfig:
    """Weights and shape of the compiled model.

    ``None`` penalty weights are derived from the ladder: the one-hot weight
    exceeds any objective gain a constraint violation could buy
    (q_max + 4 * switch_weight * q_max^2 + 1, scaled by the weights), and the
    budget weight doubles it so that even a single quantized unit of budget
    violation costs more than breaking one-hot.
    """

    quality_weight: float = 1.0
    switch_weight: float = 1.0
    onehot_weight: float | None = None
    rebuffer_weight: float | None = None
    slack_bits: int = 8
    window: int = 5
    refine_iterations: int = 2

    def validate(self):
        if self.quality_weight < 0 or self.switch_weight < 0:
            raise ValueError("quality_weight and switch_weight must be >= 0")
        for name in ("onehot_weight", "rebuffer_weight"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.slack_bits < 1:
            raise ValueError("slack_bits must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.refine_iterations < 1:
            raise ValueError("refine_iterations must be >= 1")

    def resolved_weights(self, ladder: BitrateLadder) -> tuple[float, float]:
        self.validate()
        q_max = max(ladder.quality)
        onehot = self.onehot_weight
        if onehot is None:
            onehot = (
                self.quality_weight * q_max
                + 4.0 * self.switch_weight * q_max * q_max
                + 1.0
            )
        rebuffer = self.rebuffer_weight
        if rebuffer is None:
            rebuffer = 2.0 * onehot
        return onehot, rebuffer


# --- term builders ----------------------------------------------------------


def add_quality_term(model: QuboModel, layout: VariableLayout, ladder, weight: float):
    """-weight * q(l) on every selection bit's diagonal."""
    for n in range(layout.num_segments):
        for l in range(layout.num_levels):
            model.add_term(layout.sel_index(n, l), layout.sel_index(n, l), -weight * ladder.quality[l])


def add_switch_term(
    model: QuboModel,
    layout: VariableLayout,
    ladder,
    weight: float,
    prev_quality: float | None,
):
    """weight * (quality step between consecutive positions)^2.

    With a committed previous segment its quality enters the first bracket as
    a constant; without one the first position pays no switch cost.
    """
    if weight == 0.0:
        return
    q = ladder.quality

    def add_row_square(n: int, scale: float):
        # (sum_l q_l x_{n,l})^2 with x^2 = x on the diagonal
        for l in range(layout.num_levels):
            i = layout.sel_index(n, l)
            model.add_term(i, i, scale * q[l] * q[l])
            for m in range(l + 1, layout.num_levels):
                model.add_term(i, layout.sel_index(n, m), 2.0 * scale * q[l] * q[m])

    for n in range(1, layout.num_segments):
        add_row_square(n, weight)
        add_row_square(n - 1, weight)
        for l in range(layout.num_levels):
            for m in range(layout.num_levels):
                model.add_term(
                    layout.sel_index(n - 1, l),
                    layout.sel_index(n, m),
                    -2.0 * weight * q[l] * q[m],
                )
    if prev_quality is not None:
        add_row_square(0, weight)
        for l in range(layout.num_levels):
            i = layout.sel_index(0, l)
            model.add_term(i, i, -2.0 * weight * prev_quality * q[l])
        model.add_offset(weight * prev_quality * prev_quality)


def add_onehot_term(model: QuboModel, layout: VariableLayout, weight: float):
    """weight * (row sum - 1)^2 per segment; zero iff exactly one bit set."""
    for n in range(layout.num_segments):
        for l in range(layout.num_levels):
            i = layout.sel_index(n, l)
            model.add_term(i, i, -weight)
            for m in range(l + 1, layout.num_levels):
                model.add_term(i, layout.sel_index(n, m), 2.0 * weight)
        model.add_offset(weight)


def slack_unit(budget: int, min_size: float, slack_bits: int) -> int:
    """Kilobits per quantization step so the needed slack range fits K bits."""
    return max(1, math.ceil((budget - min_size + 1) / (1 << slack_bits)))


def add_rebuffer_term(
    model: QuboModel,
    layout: VariableLayout,
    window: AbrWindow,
    forecast: BufferForecast,
    weight: float,
):
    """Slack-encoded budget penalty per feasible position.

    Sizes quantize rounding up and budgets rounding down, so zero penalty
    implies the original kilobit inequality holds.  Positions that cannot
    afford even the lowest level are left unconstrained (flagged upstream),
    and so are positions whose budget admits every level: there the penalty
    is identically zero over one-hot rows with optimal slack, so dropping it
    changes no decision while sparing the annealer a flat slack equality.
    """
    K = layout.slack_bits
    for n in range(layout.num_segments):
        layout.units[n] = 1
        layout.active[n] = False
        if not forecast.feasible[n]:
            continue
        budget = forecast.budgets[n]
        unit = slack_unit(budget, min(window.sizes[n]), K)
        layout.units[n] = unit
        target = budget // unit
        if math.ceil(max(window.sizes[n]) / unit) <= target:
            continue  # vacuous: every level fits the budget
        layout.active[n] = True
        members: list[tuple[int, int]] = []  # (bit index, integer weight)
        for l in range(layout.num_levels):
            members.append((layout.sel_index(n, l), math.ceil(window.sizes[n][l] / unit)))
        for k in range(K):
            members.append((layout.slack_index(n, k), 1 << k))
        # weight * (sum_i w_i x_i - target)^2
        for a in range(len(members)):
            i, wi = members[a]
            model.add_term(i, i, weight * (wi * wi - 2.0 * target * wi))
            for bidx in range(a + 1, len(members)):
                j, wj = members[bidx]
                model.add_term(i, j, 2.0 * weight * wi * wj)
        model.add_offset(weight * float(target) * float(target))


def forecast_buffers(
    buffer_now: float,
    bandwidth_kbps,
    window: AbrWindow,
    reference_plan,
    buffer_cap: float,
) -> BufferForecast:
    """Propagate buffer seconds along a reference plan and derive budgets.

    ``bandwidth_kbps`` is a scalar prediction or one value per window
    position (the oracle full-horizon case).  Budget = floor(bandwidth *
    buffer): the kilobits downloadable before the buffer would drain.
    """
    W = window.num_segments
    if isinstance(bandwidth_kbps, (int, float)):
        bw = [float(bandwidth_kbps)] * W
    else:
        bw = [float(c) for c in bandwidth_kbps]
        if len(bw) != W:
            raise ForecastError(f"need {W} bandwidth values, got {len(bw)}")
    if any(c <= 0 for c in bw):
        raise ForecastError("predicted bandwidth must be positive")
    if not 0 <= buffer_now <= buffer_cap:
        raise ForecastError(f"buffer_now {buffer_now} outside [0, {buffer_cap}]")
    reference_plan = list(reference_plan)
    if len(reference_plan) < W:
        raise ForecastError("reference plan shorter than the window")

    buffers, budgets, feasible = [], [], []
    b = float(buffer_now)
    for n in range(W):
        buffers.append(b)
        m = math.floor(bw[n] * b)
        budgets.append(int(m))
        feasible.append(m >= min(window.sizes[n]))
        if n + 1 < W:
            dl = window.sizes[n][reference_plan[n]] / bw[n]
            b = min(buffer_cap, max(0.0, b - dl) + window.segment_duration)
    return BufferForecast(
        buffers=tuple(buffers),
        budgets=tuple(budgets),
        feasible=tuple(feasible),
        bandwidth=tuple(bw),
    )


def build_model(
    config: AbrQuboConfig,
    ladder: BitrateLadder,
    window: AbrWindow,
    forecast: BufferForecast,
) -> tuple[QuboModel, VariableLayout]:
    """Single-pass compilation against a fixed forecast."""
    if ladder.num_levels != window.num_levels:
        raise ValueError("ladder and window level counts differ")
    onehot_w, rebuffer_w = config.resolved_weights(ladder)
    layout = layout_variables(window.num_segments, window.num_levels, config.slack_bits)
    model = QuboModel(layout.num_bits)
    add_quality_term(model, layout, ladder, config.quality_weight)
    add_switch_term(model, layout, ladder, config.switch_weight, window.prev_quality)
    add_rebuffer_term(model, layout, window, forecast, rebuffer_w)
    add_onehot_term(model, layout, onehot_w)
    return model, layout


def assemble(
    config: AbrQuboConfig,
    ladder: BitrateLadder,
    window: AbrWindow,
    buffer_now: float,
    bandwidth_kbps,
    buffer_cap: float = 60.0,
    solver=None,
) -> tuple[QuboModel, VariableLayout, BufferForecast]:
    """Forecast-and-refine compilation.

    The first pass forecasts buffers along the all-lowest reference plan;
    each later pass re-forecasts along the decoded solution of the previous
    pass's model.  ``solver`` maps a QuboModel to a SolveResult; by default
    the refine passes use the exact chain solver.
    """
    reference = [0] * window.num_segments
    model, layout, forecast = None, None, None
    for pass_index in range(config.refine_iterations):
        forecast = forecast_buffers(buffer_now, bandwidth_kbps, window, reference, buffer_cap)
        model, layout = build_model(config, ladder, window, forecast)
        if pass_index < config.refine_iterations - 1:
            if solver is not None:
                result = solver(model)
            else:
                result = solve_window_exact(model, layout, window, forecast, config, ladder)
            reference, _ = decode(layout, result.assignment, forecast, window)
    return model, layout, forecast


def decode(
    layout: VariableLayout,
    assignment,
    forecast: BufferForecast,
    window: AbrWindow,
) -> tuple[list[int], list[bool]]:
    """Selection bits -> level per segment, repairing malformed rows.

    Empty rows fall to the lowest level; multi-set rows keep the best set
    level whose size fits the position budget, else the lowest set level.
    Repaired positions are flagged.
    """
    bits = list(assignment)
    if len(bits) != layout.num_bits:
        raise ValueError(
            f"assignment length {len(bits)} does not match layout ({layout.num_bits})"
        )
    levels: list[int] = []
    flags: list[bool] = []
    for n in range(layout.num_segments):
        chosen = [l for l in range(layout.num_levels) if bits[layout.sel_index(n, l)]]
        if len(chosen) == 1:
            levels.append(chosen[0])
            flags.append(False)
        elif not chosen:
            levels.append(0)
            flags.append(True)
        else:
            fitting = [l for l in chosen if window.sizes[n][l] <= forecast.budgets[n]]
            levels.append(max(fitting) if fitting else min(chosen))
            flags.append(True)
    return levels, flags


def minimal_slack_penalty(
    layout: VariableLayout,
    window: AbrWindow,
    forecast: BufferForecast,
    levels,
    weight: float,
) -> float:
    """Budget penalty of a level plan with each position's slack at its optimum.

    Independent of the coefficient expansion; used as the oracle for the
    model's energy decomposition.
    """
    total = 0.0
    for n, level in enumerate(levels):
        value, _ = _best_slack(layout, window, forecast, n, level)
        if value is not None:
            total += weight * float(value) * float(value)
    return total


def _best_slack(layout, window, forecast, n, level):
    """(residual, slack integer) minimizing |quantized row + slack - target|."""
    if not layout.active[n]:
        return None, 0
    unit = layout.units[n]
    target = forecast.budgets[n] // unit
    need = math.ceil(window.sizes[n][level] / unit)
    slack = min((1 << layout.slack_bits) - 1, max(0, target - need))
    return need + slack - target, slack


def restricted_assignment(
    layout: VariableLayout,
    window: AbrWindow,
    forecast: BufferForecast,
    levels,
) -> list[int]:
    """Full bit assignment for a level plan with per-position optimal slack."""
    bits = [0] * layout.num_bits
    for n, level in enumerate(levels):
        bits[layout.sel_index(n, level)] = 1
        _, slack = _best_slack(layout, window, forecast, n, level)
        for k in range(layout.slack_bits):
            if (slack >> k) & 1:
                bits[layout.slack_index(n, k)] = 1
    return bits


def solve_restricted(
    model: QuboModel,
    layout: VariableLayout,
    window: AbrWindow,
    forecast: BufferForecast,
    max_plans: int = 10_000_000,
) -> SolveResult:
    """Exact minimum of the model over one-hot rows with optimal slack.

    Enumerates every level plan (ties to the lexicographically smallest) and
    evaluates the untouched model, so the result is a true assignment of the
    same QUBO the annealer sees.
    """
    W, L = layout.num_segments, layout.num_levels
    if L**W > max_plans:
        raise CapacityError(f"{L}^{W} level plans exceed the exact-solve bound")
    best_energy = math.inf
    best_bits = None
    for combo in itertools.product(range(L), repeat=W):
        bits = restricted_assignment(layout, window, forecast, combo)
        e = model.energy(bits)
        if e < best_energy:
            best_energy = e
            best_bits = tuple(bits)
    return SolveResult(best_bits, best_energy, 0, 0, 0)


def plan_costs(
    config: AbrQuboConfig,
    ladder: BitrateLadder,
    layout: VariableLayout,
    window: AbrWindow,
    forecast: BufferForecast,
) -> tuple[list[list[float]], list[list[float]] | None]:
    """Per-position and transition costs of the model over one-hot plans.

    On the one-hot rows-with-optimal-slack subspace the model energy
    decomposes into sum_n node[n][level] + sum_n edge[level_{n-1}][level_n]
    plus a plan-independent constant; node costs carry quality and the
    residual budget penalty, edges carry the squared quality step.
    """
    _, rebuffer_w = config.resolved_weights(ladder)
    q = ladder.quality
    L = layout.num_levels
    node = []
    for n in range(layout.num_segments):
        row = []
        for l in range(L):
            cost = -config.quality_weight * q[l]
            residual, _ = _best_slack(layout, window, forecast, n, l)
            if residual is not None:
                cost += rebuffer_w * float(residual) * float(residual)
            row.append(cost)
        node.append(row)
    if window.prev_quality is not None:
        for l in range(L):
            node[0][l] += config.switch_weight * (q[l] - window.prev_quality) ** 2
    edge = None
    if layout.num_segments > 1:
        edge = [
            [config.switch_weight * (q[b] - q[a]) ** 2 for b in range(L)]
            for a in range(L)
        ]
    return node, edge


def solve_window_exact(
    model: QuboModel,
    layout: VariableLayout,
    window: AbrWindow,
    forecast: BufferForecast,
    config: AbrQuboConfig,
    ladder: BitrateLadder,
) -> SolveResult:
    """Exact one-hot minimum by dynamic programming over the chain structure.

    Same minimizer as :func:`solve_restricted` (the switch term only couples
    adjacent positions) in O(W L^2) instead of L^W; ties resolve to the
    lexicographically smallest plan.  The energy reported is the model's own
    evaluation of the winning assignment.
    """
    node, edge = plan_costs(config, ladder, layout, window, forecast)
    W, L = layout.num_segments, layout.num_levels
    # suffix[n][l]: best cost of positions n..W-1 given level l at position n
    suffix = [list(node[W - 1])]
    for n in range(W - 2, -1, -1):
        nxt = suffix[0]
        suffix.insert(
            0,
            [
                node[n][a] + min(edge[a][b] + nxt[b] for b in range(L))
                for a in range(L)
            ],
        )
    plan = []
    for n in range(W):
        if n == 0:
            best = min(range(L), key=lambda l: (suffix[0][l], l))
        else:
            prev = plan[-1]
            best = min(
                range(L),
                key=lambda l: (edge[prev][l] + suffix[n][l], l),
            )
        plan.append(best)
    bits = tuple(restricted_assignment(layout, window, forecast, plan))
    return SolveResult(bits, model.energy(bits), 0, 0, 0)


# --- policy-facing selection -------------------------------------------------


def qubo_abr_select(
    state,
    history,
    config: AbrQuboConfig,
    ladder: BitrateLadder,
    solver,
    segments_remaining: int,
    segment_duration: float,
    buffer_cap: float,
    predictor_window: int = 5,
) -> int:
    """Receding-horizon selection: solve a W-segment model, commit the first
    level.  An infeasible first position (budget below the lowest level)
    commits the lowest level without solving."""
    if segments_remaining < 1:
        raise ValueError("no segments left to select")
    horizon = min(config.window, segments_remaining)
    bandwidth = (
        predict_throughput(history, predictor_window) if history else ladder.levels_kbps[0]
    )
    prev_quality = ladder.quality[state.last_level] if state.last_level is not None else None
    window = AbrWindow.from_ladder(ladder, horizon, segment_duration, prev_quality)
    model, layout, forecast = assemble(
        config, ladder, window, min(state.buffer, buffer_cap), bandwidth, buffer_cap, solver
    )
    if not forecast.feasible[0]:
        return 0
    if solver is not None:
        result = solver(model)
    else:
        result = solve_window_exact(model, layout, window, forecast, config, ladder)
    levels, _ = decode(layout, result.assignment, forecast, window)
    return levels[0]


FULL_HORIZON_TRUST_PASSES = 16


def plan_full_horizon(
    trace,
    ladder: BitrateLadder,
    config: AbrQuboConfig,
    session: "sim.SessionConfig",
    mode: str = "exact",
    sa_params: SaParams | None = None,
    trust_passes: int = FULL_HORIZON_TRUST_PASSES,
) -> list[int]:
    """Offline plan from a single QUBO over the whole session.

    Per-position bandwidth is the oracle a full-horizon study assumes: the
    trace's average throughput over each segment's nominal playback slot.
    Buffer budgets still depend on the plan itself, which the quadratic model
    cannot express, so plans are refined against re-forecasts: a
    best-response stream seeded from the all-lowest plan (refine_iterations
    passes) plus a damped stream that moves each position at most one level
    per pass (ramps toward banking plans without overshoot).  Every candidate
    is scored by actually simulating it; the best wins.

    ``mode`` picks the solver: "exact" (chain dynamic programming, any
    length), "enumerate" (brute-force over level plans, capacity-guarded),
    or "sa" (the annealer).
    """
    n = session.resolve_segments(trace)
    decisions = n - 1
    if decisions == 0:
        return [0]
    if mode not in ("exact", "enumerate", "sa"):
        raise ValueError(f"unknown full-horizon mode {mode!r}")
    seg = session.segment_duration
    bandwidth = [
        max(trace.mean_between(k * seg, (k + 1) * seg), 1.0) for k in range(1, n)
    ]
    window = AbrWindow.from_ladder(ladder, decisions, seg, ladder.quality[0])

    def solve_pass(reference):
        forecast = forecast_buffers(seg, bandwidth, window, reference, session.buffer_cap)
        model, layout = build_model(config, ladder, window, forecast)
        if mode == "exact":
            result = solve_window_exact(model, layout, window, forecast, config, ladder)
        elif mode == "enumerate":
            result = solve_restricted(model, layout, window, forecast)
        else:
            result = solve_sa(model, sa_params or SaParams())
        tail, _ = decode(layout, result.assignment, forecast, window)
        # budget-starved positions would otherwise chase free quality
        return [0 if not forecast.feasible[i] else lvl for i, lvl in enumerate(tail)]

    def score(tail):
        log = sim.simulate_session(trace, sim.PlanPolicy([0] + tail), session)
        return sim.compute_qoe(log, session.qoe_w, ladder.quality).total

    best_tail = [0] * decisions
    best_score = score(best_tail)

    tail = [0] * decisions
    for _ in range(config.refine_iterations):
        tail = solve_pass(tail)
        s = score(tail)
        if s > best_score:
            best_score, best_tail = s, list(tail)

    tail = [0] * decisions
    for _ in range(trust_passes):
        proposal = solve_pass(tail)
        tail = [min(max(p, t - 1), t + 1) for p, t in zip(proposal, tail)]
        s = score(tail)
        if s > best_score:
            best_score, best_tail = s, list(tail)

    return [0] + best_tail

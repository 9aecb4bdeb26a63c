"""QUBO minimizers: an exhaustive oracle and a digital-annealer-style solver.

The annealer runs independent restarts of a single-bit-flip Metropolis sweep
with incrementally maintained local fields, a geometric temperature schedule,
and a dynamic offset that inflates acceptance whenever a full sweep rejects
every flip.  The sweep itself lives in a compiled kernel
(``qubostream._sa_native``) with a bit-identical pure-Python fallback; which
one runs is chosen at import time and can be forced with the
``QUBOSTREAM_BACKEND`` environment variable or the ``backend=`` argument.

Results are a deterministic function of (model, params) and do not depend on
the backend.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _rng, _sa_python
from .errors import CapacityError
from .qubo import QuboModel

try:
    from . import _sa_native
except ImportError:  # extension not built; pure-Python kernel takes over
    _sa_native = None

EXHAUSTIVE_MAX_VARS = 24


@dataclass(frozen=True)
class SolveResult:
    assignment: tuple[int, ...]
    energy: float
    restarts_used: int
    sweeps_used: int
    seed: int


@dataclass
class SaParams:
    """Annealer settings.  ``None`` fields are calibrated from the model:

    - t_initial: 90th percentile of |single-flip dE| at a random assignment
    - t_final:   1e-3 * t_initial
    - dynamic_offset_step: 0.1 * mean |coefficient|
    """

    sweeps: int = 2000
    restarts: int = 8
    t_initial: float | None = None
    t_final: float | None = None
    dynamic_offset_step: float | None = None
    seed: int = 0

    def validate(self):
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.t_initial is not None and not self.t_initial > 0:
            raise ValueError("t_initial must be positive")
        if self.t_final is not None and not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if (
            self.t_initial is not None
            and self.t_final is not None
            and self.t_final > self.t_initial
        ):
            raise ValueError("t_final must not exceed t_initial")
        if self.dynamic_offset_step is not None and self.dynamic_offset_step < 0:
            raise ValueError("dynamic_offset_step must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be an unsigned integer")


def available_backends() -> list[str]:
    return ["native", "python"] if _sa_native is not None else ["python"]


def default_backend() -> str:
    env = os.environ.get("QUBOSTREAM_BACKEND")
    if env:
        return _resolve_backend(env).BACKEND_NAME
    return "native" if _sa_native is not None else "python"


def _resolve_backend(name: str | None):
    if name is None:
        name = os.environ.get("QUBOSTREAM_BACKEND")
    if name is None:
        return _sa_native if _sa_native is not None else _sa_python
    if name == "python":
        return _sa_python
    if name == "native":
        if _sa_native is None:
            raise ValueError("native backend requested but the extension is not built")
        return _sa_native
    raise ValueError(f"unknown backend {name!r}; expected 'native' or 'python'")


def solve_exhaustive(model: QuboModel) -> SolveResult:
    """Global minimum by enumeration; ties go to the lexicographically
    smallest bit sequence.  Capped at 24 variables."""
    n = model.num_vars
    if n > EXHAUSTIVE_MAX_VARS:
        raise CapacityError(
            f"exhaustive solve supports at most {EXHAUSTIVE_MAX_VARS} variables, got {n}"
        )
    if n == 0:
        return SolveResult((), model.offset, 0, 0, 0)

    dense = model.to_dense()
    # bit 0 is the most significant position so that increasing integers
    # enumerate assignments in lexicographic order
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    total = 1 << n
    chunk = 1 << 16
    best_value = math.inf
    best_index = 0
    for start in range(0, total, chunk):
        ks = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        bits = ((ks[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        values = ((bits @ dense) * bits).sum(axis=1)
        local = int(np.argmin(values))  # first occurrence = lexicographic tie-break
        if values[local] < best_value:
            best_value = float(values[local])
            best_index = start + local
    assignment = tuple(int((best_index >> (n - 1 - i)) & 1) for i in range(n))
    return SolveResult(assignment, model.energy(assignment), 0, 0, 0)


def solve_sa(
    model: QuboModel, params: SaParams | None = None, backend: str | None = None
) -> SolveResult:
    """Best assignment over ``params.restarts`` independent annealing runs.

    Restart r consumes the substream keyed by (seed, r); merging keeps the
    minimum energy with the lowest restart index winning ties, so the result
    matches sequential execution no matter how restarts would be scheduled.
    The reported energy is re-evaluated through :meth:`QuboModel.energy`.
    """
    if params is None:
        params = SaParams()
    params.validate()
    if model.num_vars < 1:
        raise ValueError("solve_sa requires at least one variable")
    kernel = _resolve_backend(backend)
    arrays = _model_arrays(model)
    t_initial, t_final, offset_step = _calibrate(model, params, arrays)

    best_energy = math.inf
    best_bits: tuple[int, ...] | None = None
    for r in range(params.restarts):
        run = _run_restart(model, params, r, arrays, t_initial, t_final, offset_step, kernel)
        for bits in (run.best_bits, run.init_bits):
            e = model.energy(bits)
            if e < best_energy:
                best_energy = e
                best_bits = bits
    return SolveResult(
        assignment=best_bits,
        energy=best_energy,
        restarts_used=params.restarts,
        sweeps_used=params.sweeps * params.restarts,
        seed=params.seed,
    )


# --- internals (also used by tests and the backend benchmark) ---------------


@dataclass(frozen=True)
class _RestartRun:
    best_bits: tuple[int, ...]
    init_bits: tuple[int, ...]
    best_energy: float
    trace: np.ndarray  # best-so-far energy after each sweep


def _model_arrays(model: QuboModel):
    """Diagonal vector plus CSR adjacency (both directions per pair),
    neighbor lists ascending."""
    n = model.num_vars
    diag = np.zeros(n, dtype=np.float64)
    pairs = []
    for (i, j), c in model.sorted_terms():
        if i == j:
            diag[i] += c
        else:
            pairs.append((i, j, c))
    counts = np.zeros(n + 1, dtype=np.int64)
    for i, j, _ in pairs:
        counts[i + 1] += 1
        counts[j + 1] += 1
    ptr = np.cumsum(counts)
    idx = np.zeros(int(ptr[-1]), dtype=np.int64)
    val = np.zeros(int(ptr[-1]), dtype=np.float64)
    fill = ptr[:-1].copy()
    for i, j, c in pairs:
        idx[fill[i]] = j
        val[fill[i]] = c
        fill[i] += 1
        idx[fill[j]] = i
        val[fill[j]] = c
        fill[j] += 1
    return diag, ptr, idx, val


def _calibrate(model: QuboModel, params: SaParams, arrays):
    diag, ptr, idx, val = arrays
    n = model.num_vars

    offset_step = params.dynamic_offset_step
    if offset_step is None:
        mags = [abs(c) for c in model.terms.values()]
        offset_step = 0.1 * (sum(mags) / len(mags)) if mags else 0.0

    t_initial = params.t_initial
    if t_initial is None:
        # |dE| of every single flip at a random draw from the calibration stream
        state = _rng.stream_state(params.seed, 0)
        x = np.zeros(n, dtype=np.int64)
        for i in range(n):
            state, bit = _rng.next_bit(state)
            x[i] = bit
        deltas = []
        for i in range(n):
            fi = diag[i]
            for p in range(int(ptr[i]), int(ptr[i + 1])):
                if x[idx[p]]:
                    fi += val[p]
            deltas.append(abs(fi))
        deltas.sort()
        t_initial = deltas[math.ceil(0.9 * n) - 1] if deltas else 0.0
        if t_initial <= 0.0:
            t_initial = 1.0

    t_final = params.t_final
    if t_final is None:
        t_final = 1e-3 * t_initial
    if not 0.0 < t_final <= t_initial:
        raise ValueError(
            f"need 0 < t_final <= t_initial, got t_final={t_final}, t_initial={t_initial}"
        )
    return t_initial, t_final, offset_step


def _run_restart(
    model: QuboModel,
    params: SaParams,
    restart_index: int,
    arrays=None,
    t_initial: float | None = None,
    t_final: float | None = None,
    offset_step: float | None = None,
    kernel=None,
) -> _RestartRun:
    """Run a single restart and expose its full trajectory."""
    if arrays is None:
        arrays = _model_arrays(model)
    if t_initial is None or t_final is None or offset_step is None:
        t_initial, t_final, offset_step = _calibrate(model, params, arrays)
    if kernel is None:
        kernel = _resolve_backend(None)
    diag, ptr, idx, val = arrays
    n = model.num_vars
    best_bits = np.zeros(n, dtype=np.uint8)
    init_bits = np.zeros(n, dtype=np.uint8)
    trace = np.zeros(params.sweeps, dtype=np.float64)
    state = _rng.stream_state(params.seed, restart_index + 1)
    best_energy = kernel.run_restart(
        state,
        diag,
        ptr,
        idx,
        val,
        model.offset,
        params.sweeps,
        t_initial,
        t_final,
        offset_step,
        best_bits,
        init_bits,
        trace,
    )
    return _RestartRun(
        best_bits=tuple(int(b) for b in best_bits),
        init_bits=tuple(int(b) for b in init_bits),
        best_energy=float(best_energy),
        trace=trace,
    )

"""Quadratic unconstrained binary optimization (QUBO) models.

A model is ``offset + sum_{i <= j} q_ij x_i x_j`` over binary variables
``x_i``.  Coefficients are stored sparsely with normalized keys
``(min(i, j), max(i, j))``; diagonal entries are the linear terms (``x^2 = x``).
The spin-model form over ``sigma in {-1, +1}`` is available through
:func:`to_ising` / :func:`from_ising` with the mapping ``sigma = 2x - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class QuboModel:
    """Sparse upper-triangular quadratic coefficient table plus a constant.

    Construction is mutation (``add_term`` accumulates); after that the model
    is treated as read-only and every query is safe to share across threads.
    """

    def __init__(self, num_vars: int, offset: float = 0.0):
        if num_vars < 0:
            raise ValueError(f"num_vars must be >= 0, got {num_vars}")
        if not math.isfinite(offset):
            raise ValueError("offset must be finite")
        self.num_vars = num_vars
        self.offset = float(offset)
        self.terms: dict[tuple[int, int], float] = {}

    def add_term(self, i: int, j: int, c: float) -> "QuboModel":
        """Accumulate ``c`` onto the coefficient of ``x_i x_j``.

        Indices are normalized to ``i <= j``; repeated calls add up.
        Returns self so construction can be chained.
        """
        if not (0 <= i < self.num_vars and 0 <= j < self.num_vars):
            raise ValueError(
                f"term ({i}, {j}) out of range for {self.num_vars} variables"
            )
        if not math.isfinite(c):
            raise ValueError(f"coefficient for ({i}, {j}) is not finite: {c}")
        key = (i, j) if i <= j else (j, i)
        self.terms[key] = self.terms.get(key, 0.0) + float(c)
        return self

    def add_offset(self, c: float) -> "QuboModel":
        if not math.isfinite(c):
            raise ValueError(f"offset increment is not finite: {c}")
        self.offset += float(c)
        return self

    def coefficient(self, i: int, j: int) -> float:
        key = (i, j) if i <= j else (j, i)
        return self.terms.get(key, 0.0)

    def energy(self, x) -> float:
        """Evaluate ``offset + sum_{i<=j} q_ij x_i x_j`` for a 0/1 assignment."""
        bits = _check_bits(x, self.num_vars)
        e = self.offset
        for (i, j), c in self.terms.items():
            if bits[i] and bits[j]:
                e += c
        return e

    def sorted_terms(self) -> list[tuple[tuple[int, int], float]]:
        """Terms in deterministic (i, j) order, for serialization and reports."""
        return sorted(self.terms.items())

    def to_dense(self) -> np.ndarray:
        """Upper-triangular (num_vars, num_vars) coefficient matrix."""
        q = np.zeros((self.num_vars, self.num_vars), dtype=np.float64)
        for (i, j), c in self.terms.items():
            q[i, j] += c
        return q

    def scaled(self, k: float) -> "QuboModel":
        """New model with every coefficient and the offset multiplied by k."""
        out = QuboModel(self.num_vars, self.offset * k)
        for (i, j), c in self.terms.items():
            out.terms[(i, j)] = c * k
        return out

    def __repr__(self):
        return (
            f"QuboModel(num_vars={self.num_vars}, terms={len(self.terms)}, "
            f"offset={self.offset!r})"
        )


@dataclass
class IsingModel:
    """Spin model ``offset - sum_{i<j} J_ij s_i s_j - sum_i h_i s_i``."""

    num_spins: int
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)
    fields: list[float] = field(default_factory=list)
    offset: float = 0.0

    def __post_init__(self):
        if not self.fields:
            self.fields = [0.0] * self.num_spins
        if len(self.fields) != self.num_spins:
            raise ValueError("fields length must equal num_spins")
        for (i, j), v in self.couplings.items():
            if not (0 <= i < j < self.num_spins):
                raise ValueError(f"coupling key ({i}, {j}) must satisfy 0 <= i < j < n")
            if not math.isfinite(v):
                raise ValueError(f"coupling ({i}, {j}) is not finite")


def ising_energy(ising: IsingModel, spins) -> float:
    """Energy of a +/-1 spin configuration under ``ising``."""
    spins = list(spins)
    if len(spins) != ising.num_spins:
        raise ValueError(
            f"spin count {len(spins)} does not match model ({ising.num_spins})"
        )
    for s in spins:
        if s not in (-1, 1):
            raise ValueError(f"invalid spin value {s!r}; expected -1 or +1")
    e = ising.offset
    for (i, j), jij in sorted(ising.couplings.items()):
        e -= jij * spins[i] * spins[j]
    for i, h in enumerate(ising.fields):
        e -= h * spins[i]
    return e


def to_ising(model: QuboModel) -> IsingModel:
    """Rewrite a QUBO over spins via ``x = (sigma + 1) / 2``.

    Diagonal terms are linear (``x^2 = x``) and fold into the fields and the
    offset; each pair term ``q x_i x_j`` becomes ``q/4 (s_i s_j + s_i + s_j + 1)``.
    The returned model satisfies ``ising_energy(sigma(x)) == energy(x)`` for
    every assignment.
    """
    n = model.num_vars
    h = [0.0] * n
    couplings: dict[tuple[int, int], float] = {}
    offset = model.offset
    for (i, j), c in model.sorted_terms():
        if i == j:
            h[i] -= c / 2.0
            offset += c / 2.0
        else:
            couplings[(i, j)] = couplings.get((i, j), 0.0) - c / 4.0
            h[i] -= c / 4.0
            h[j] -= c / 4.0
            offset += c / 4.0
    return IsingModel(num_spins=n, couplings=couplings, fields=h, offset=offset)


def from_ising(ising: IsingModel) -> QuboModel:
    """Inverse of :func:`to_ising`: substitute ``sigma = 2x - 1``."""
    model = QuboModel(ising.num_spins, ising.offset)
    for (i, j), jij in sorted(ising.couplings.items()):
        # -J s_i s_j = -J (4 x_i x_j - 2 x_i - 2 x_j + 1)
        model.add_term(i, j, -4.0 * jij)
        model.add_term(i, i, 2.0 * jij)
        model.add_term(j, j, 2.0 * jij)
        model.add_offset(-jij)
    for i, h in enumerate(ising.fields):
        # -h s_i = -h (2 x_i - 1)
        if h != 0.0:
            model.add_term(i, i, -2.0 * h)
            model.add_offset(h)
    return model


def spins_from_bits(bits) -> list[int]:
    """Map a 0/1 assignment to the corresponding +/-1 spins (s = 2x - 1)."""
    return [2 * b - 1 for b in bits]


def _check_bits(x, expected_len: int) -> list[int]:
    bits = list(x)
    if len(bits) != expected_len:
        raise ValueError(
            f"assignment length {len(bits)} does not match model ({expected_len})"
        )
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"invalid bit value {b!r}; expected 0 or 1")
    return bits


# --- text format -----------------------------------------------------------
#
# Header `nvars <N>`, optional `offset <c>`, then one `<i> <j> <coeff>` line
# per stored term.  `#` starts a comment.  Integer coefficients are written
# without a decimal point and round-trip bit-exactly; other values use repr,
# which also round-trips.


def write_qubo_text(model: QuboModel) -> str:
    lines = [f"nvars {model.num_vars}"]
    if model.offset != 0.0:
        lines.append(f"offset {_fmt(model.offset)}")
    for (i, j), c in model.sorted_terms():
        lines.append(f"{i} {j} {_fmt(c)}")
    return "\n".join(lines) + "\n"


def read_qubo_text(text: str) -> QuboModel:
    model = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "nvars":
            if model is not None:
                raise ValueError(f"line {lineno}: duplicate nvars header")
            model = QuboModel(_parse_int(parts, 1, lineno))
        elif parts[0] == "offset":
            _require(model, lineno)
            model.add_offset(_parse_float(parts, 1, lineno))
        else:
            _require(model, lineno)
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected '<i> <j> <coeff>'")
            i = _parse_int(parts, 0, lineno)
            j = _parse_int(parts, 1, lineno)
            try:
                model.add_term(i, j, _parse_float(parts, 2, lineno))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
    if model is None:
        raise ValueError("missing 'nvars' header")
    return model


def _fmt(value: float) -> str:
    if value == int(value) and abs(value) < 2**53:
        return str(int(value))
    return repr(value)


def _require(model, lineno):
    if model is None:
        raise ValueError(f"line {lineno}: term before 'nvars' header")


def _parse_int(parts, idx, lineno) -> int:
    try:
        return int(parts[idx])
    except (IndexError, ValueError):
        raise ValueError(f"line {lineno}: expected integer field") from None


def _parse_float(parts, idx, lineno) -> float:
    try:
        return float(parts[idx])
    except (IndexError, ValueError):
        raise ValueError(f"line {lineno}: expected numeric field") from None

"""splitmix64 random stream, the portable RNG both annealer kernels share.

The native kernel re-implements exactly these update/output rules in C types,
so a given stream state yields the same bit and double sequence in both
backends.  That is what makes solver results backend-independent.
"""

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z: int) -> int:
    """Finalization scramble of splitmix64 (stateless)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_state(seed: int, key: int) -> int:
    """Initial state of the substream ``key`` (restart index + 1; 0 = calibration)."""
    return mix64((seed & _MASK) ^ mix64((key * _GAMMA) & _MASK))


def next_u64(state: int) -> tuple[int, int]:
    """Advance the stream; returns (new_state, 64-bit output)."""
    state = (state + _GAMMA) & _MASK
    return state, mix64(state)


def next_double(state: int) -> tuple[int, float]:
    """Uniform double in [0, 1) with 53-bit resolution."""
    state, z = next_u64(state)
    return state, (z >> 11) * _INV_2_53


def next_bit(state: int) -> tuple[int, int]:
    state, z = next_u64(state)
    return state, z >> 63

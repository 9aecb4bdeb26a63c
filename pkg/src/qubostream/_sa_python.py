"""Pure-Python annealing kernel, the fallback twin of ``_sa_native``.

Every floating-point operation, branch, and RNG draw here mirrors the Cython
kernel line for line; both run the same sweep on the same stream and must
produce bit-identical results.  Keep the two files in sync when touching
either.
"""

from math import exp

BACKEND_NAME = "python"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0


def run_restart(
    state,
    diag,
    nbr_ptr,
    nbr_idx,
    nbr_val,
    offset,
    sweeps,
    t_initial,
    t_final,
    offset_step,
    best_bits,
    init_bits,
    trace,
):
    """One annealing restart; fills the three output arrays, returns best energy.

    diag / nbr_* describe the coefficient table in CSR form (both directions
    stored per unordered pair).  The local field f[i] tracks the energy delta
    of flipping bit i up to sign: dE_i = (1 - 2 x_i) f[i].
    """
    n = len(diag)
    dg = list(diag)
    ptr = list(nbr_ptr)
    idx = list(nbr_idx)
    val = list(nbr_val)

    # initial assignment: one top-bit draw per variable
    x = [0] * n
    for i in range(n):
        state = (state + _GAMMA) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z ^= z >> 31
        x[i] = z >> 63
    for i in range(n):
        init_bits[i] = x[i]

    # local fields and exact starting energy, accumulated in CSR order
    f = [0.0] * n
    energy = offset
    for i in range(n):
        fi = dg[i]
        for p in range(ptr[i], ptr[i + 1]):
            j = idx[p]
            if x[j]:
                fi += val[p]
        f[i] = fi
        if x[i]:
            energy += dg[i]
            for p in range(ptr[i], ptr[i + 1]):
                j = idx[p]
                if j > i and x[j]:
                    energy += val[p]

    best_energy = energy
    best = x[:]
    e_off = 0.0
    ratio = t_final / t_initial
    denom = sweeps - 1

    for s in range(sweeps):
        temp = t_initial if denom == 0 else t_initial * pow(ratio, s / denom)
        accepted_any = False
        for i in range(n):
            xi = x[i]
            d_e = f[i] if xi == 0 else -f[i]
            d_eff = d_e - e_off
            if d_eff <= 0.0:
                accept = True
            else:
                state = (state + _GAMMA) & _MASK
                z = state
                z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
                z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
                z ^= z >> 31
                accept = (z >> 11) * _INV_2_53 < exp(-d_eff / temp)
            if accept:
                if xi == 0:
                    for p in range(ptr[i], ptr[i + 1]):
                        f[idx[p]] += val[p]
                    x[i] = 1
                else:
                    for p in range(ptr[i], ptr[i + 1]):
                        f[idx[p]] -= val[p]
                    x[i] = 0
                energy += d_e
                e_off = 0.0
                accepted_any = True
                if energy < best_energy:
                    best_energy = energy
                    best = x[:]
        if not accepted_any:
            e_off += offset_step
        trace[s] = best_energy

    for i in range(n):
        best_bits[i] = best[i]
    return best_energy

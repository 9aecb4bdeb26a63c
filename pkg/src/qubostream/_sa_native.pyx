# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Native annealing kernel.

Line-for-line twin of ``_sa_python.run_restart``: same splitmix64 stream,
same float operation order, same acceptance rule, so results are
bit-identical across backends.  Keep the two files in sync when touching
either.
"""

import numpy as np

from libc.math cimport exp, pow

BACKEND_NAME = "native"

cdef unsigned long long _GAMMA = 0x9E3779B97F4A7C15ULL
cdef double _INV_2_53 = 1.0 / 9007199254740992.0


def run_restart(
    unsigned long long state,
    double[::1] diag,
    long long[::1] nbr_ptr,
    long long[::1] nbr_idx,
    double[::1] nbr_val,
    double offset,
    long long sweeps,
    double t_initial,
    double t_final,
    double offset_step,
    unsigned char[::1] best_bits,
    unsigned char[::1] init_bits,
    double[::1] trace,
):
    """One annealing restart; fills the three output arrays, returns best energy."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef unsigned char[::1] x = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] best = np.zeros(n, dtype=np.uint8)
    cdef double[::1] f = np.zeros(n, dtype=np.float64)

    cdef Py_ssize_t i, p
    cdef long long j, s
    cdef unsigned long long z
    cdef double fi, energy, best_energy, e_off, ratio, temp, d_e, d_eff
    cdef long long denom
    cdef unsigned char xi
    cdef bint accept, accepted_any

    for i in range(n):
        state = state + _GAMMA
        z = state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        z = z ^ (z >> 31)
        x[i] = <unsigned char>(z >> 63)
    for i in range(n):
        init_bits[i] = x[i]

    energy = offset
    for i in range(n):
        fi = diag[i]
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_idx[p]
            if x[j]:
                fi += nbr_val[p]
        f[i] = fi
        if x[i]:
            energy += diag[i]
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                j = nbr_idx[p]
                if j > i and x[j]:
                    energy += nbr_val[p]

    best_energy = energy
    for i in range(n):
        best[i] = x[i]
    e_off = 0.0
    ratio = t_final / t_initial
    denom = sweeps - 1

    for s in range(sweeps):
        if denom == 0:
            temp = t_initial
        else:
            temp = t_initial * pow(ratio, (<double>s) / (<double>denom))
        accepted_any = False
        for i in range(n):
            xi = x[i]
            d_e = f[i] if xi == 0 else -f[i]
            d_eff = d_e - e_off
            if d_eff <= 0.0:
                accept = True
            else:
                state = state + _GAMMA
                z = state
                z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
                z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
                z = z ^ (z >> 31)
                accept = (<double>(z >> 11)) * _INV_2_53 < exp(-d_eff / temp)
            if accept:
                if xi == 0:
                    for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                        f[nbr_idx[p]] += nbr_val[p]
                    x[i] = 1
                else:
                    for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                        f[nbr_idx[p]] -= nbr_val[p]
                    x[i] = 0
                energy += d_e
                e_off = 0.0
                accepted_any = True
                if energy < best_energy:
                    best_energy = energy
                    for p in range(n):
                        best[p] = x[p]
        if not accepted_any:
            e_off += offset_step
        trace[s] = best_energy

    for i in range(n):
        best_bits[i] = best[i]
    return best_energy

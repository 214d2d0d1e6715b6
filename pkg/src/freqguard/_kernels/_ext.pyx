# Compiled kernel backend. Mirrors _py.py exactly, including summation
# order, so the two backends produce bit-identical results.
# Key layout (see _packing.py): pol bit 0 | freq bits 1..8 | bin bits 9..40
# | path bits 41..56.

from libc.stdint cimport uint64_t, int64_t
from libc.math cimport cos, sin, hypot, sqrt

import numpy as np

from freqguard.errors import RoutingError, WiringError

BACKEND_NAME = "ext"
NO_PATH = -1

cdef uint64_t POL_MASK = 0x1
cdef int FREQ_SHIFT = 1
cdef int BIN_SHIFT = 9
cdef int PATH_SHIFT = 41
cdef uint64_t FREQ_MASK = (<uint64_t>1 << 8) - 1
cdef uint64_t BIN_MASK = (<uint64_t>1 << 32) - 1
cdef uint64_t KEY_NO_PATH = ~(((<uint64_t>1 << 16) - 1) << 41)
cdef uint64_t KEY_NO_FREQ = ~(FREQ_MASK << 1)
cdef uint64_t KEY_NO_BIN = ~(BIN_MASK << 9)
cdef double PRUNE_EPS = 1e-15
# computed, not a literal, so it is the same double the Python backend uses
cdef double INV_SQRT2 = 1.0 / sqrt(2.0)


cdef void _stable_insertion_sort(uint64_t[:] keys, double complex[:] amps, Py_ssize_t n) noexcept:
    cdef Py_ssize_t i, j
    cdef uint64_t k
    cdef double complex a
    for i in range(1, n):
        k = keys[i]
        a = amps[i]
        j = i - 1
        while j >= 0 and keys[j] > k:
            keys[j + 1] = keys[j]
            amps[j + 1] = amps[j]
            j -= 1
        keys[j + 1] = k
        amps[j + 1] = a


cdef _canon(object k_arr, object a_arr, Py_ssize_t n):
    # sort by key (stable), merge duplicates in encounter order, prune
    cdef uint64_t[:] kv
    cdef double complex[:] av
    cdef Py_ssize_t i, m
    cdef int merged = 0
    if n == 0:
        return (
            np.empty(0, dtype=np.uint64),
            np.empty(0, dtype=np.complex128),
            0,
        )
    if n > 64:
        order = np.argsort(k_arr[:n], kind="stable")
        k_sorted = np.ascontiguousarray(k_arr[:n][order])
        a_sorted = np.ascontiguousarray(a_arr[:n][order])
        kv = k_sorted
        av = a_sorted
    else:
        kv = k_arr
        av = a_arr
        _stable_insertion_sort(kv, av, n)
    m = 0
    for i in range(1, n):
        if kv[i] == kv[m]:
            av[m] = av[m] + av[i]
            merged += 1
        else:
            m += 1
            kv[m] = kv[i]
            av[m] = av[i]
    n = m + 1
    # prune tiny amplitudes
    m = 0
    for i in range(n):
        if hypot(av[i].real, av[i].imag) >= PRUNE_EPS:
            kv[m] = kv[i]
            av[m] = av[i]
            m += 1
    out_k = np.empty(m, dtype=np.uint64)
    out_a = np.empty(m, dtype=np.complex128)
    cdef uint64_t[:] ok = out_k
    cdef double complex[:] oa = out_a
    for i in range(m):
        ok[i] = kv[i]
        oa[i] = av[i]
    return out_k, out_a, merged


def canonicalize(keys, amps):
    cdef Py_ssize_t n = keys.shape[0]
    k_arr = np.array(keys, dtype=np.uint64)
    a_arr = np.array(amps, dtype=np.complex128)
    out_k, out_a, merged = _canon(k_arr, a_arr, n)
    return out_k, out_a, merged


def route_pol(keys, amps, int64_t in1, int64_t in2, int64_t out1, int64_t out2):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i
    k_buf = np.empty(n, dtype=np.uint64)
    a_buf = np.empty(n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k
    cdef int64_t path, new_path
    for i in range(n):
        k = kv[i]
        path = <int64_t>(k >> PATH_SHIFT)
        if path == out1 or path == out2:
            raise WiringError("amplitude already present on a polarizing-splitter output port")
        if path == in1:
            new_path = out1 if (k & POL_MASK) == 0 else out2
        elif path == in2:
            new_path = out2 if (k & POL_MASK) == 0 else out1
        else:
            ok[i] = k
            oa[i] = av[i]
            continue
        ok[i] = (k & KEY_NO_PATH) | (<uint64_t>new_path << PATH_SHIFT)
        oa[i] = av[i]
    out_k, out_a, _ = _canon(k_buf, a_buf, n)
    return out_k, out_a


def flip_pol(keys, amps, int64_t path):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i
    k_buf = np.empty(n, dtype=np.uint64)
    a_buf = np.empty(n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k
    for i in range(n):
        k = kv[i]
        if <int64_t>(k >> PATH_SHIFT) == path:
            k = k ^ <uint64_t>1
        ok[i] = k
        oa[i] = av[i]
    out_k, out_a, _ = _canon(k_buf, a_buf, n)
    return out_k, out_a


def shift_freq(keys, amps, int64_t path, int64_t freq_from, int64_t freq_to):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i
    k_buf = np.empty(n, dtype=np.uint64)
    a_buf = np.empty(n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k
    for i in range(n):
        k = kv[i]
        if <int64_t>(k >> PATH_SHIFT) == path and <int64_t>((k >> FREQ_SHIFT) & FREQ_MASK) == freq_from:
            k = (k & KEY_NO_FREQ) | (<uint64_t>freq_to << FREQ_SHIFT)
        ok[i] = k
        oa[i] = av[i]
    out_k, out_a, merged = _canon(k_buf, a_buf, n)
    return out_k, out_a, merged


def route_freq(keys, amps, int64_t in_path, freq_ids, out_paths):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i, j
    cdef Py_ssize_t n_routes = len(freq_ids)
    route_f = np.array(freq_ids, dtype=np.int64)
    route_p = np.array(out_paths, dtype=np.int64)
    cdef const int64_t[:] rf = route_f
    cdef const int64_t[:] rp = route_p
    k_buf = np.empty(n, dtype=np.uint64)
    a_buf = np.empty(n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k
    cdef int64_t path, freq, new_path
    cdef bint found
    for i in range(n):
        k = kv[i]
        path = <int64_t>(k >> PATH_SHIFT)
        if path != in_path:
            for j in range(n_routes):
                if rp[j] == path:
                    raise WiringError("amplitude already present on a frequency-router output port")
            ok[i] = k
            oa[i] = av[i]
            continue
        freq = <int64_t>((k >> FREQ_SHIFT) & FREQ_MASK)
        found = False
        new_path = 0
        for j in range(n_routes):
            if rf[j] == freq:
                new_path = rp[j]
                found = True
                break
        if not found:
            raise RoutingError(f"no output mapping for frequency id {freq}")
        ok[i] = (k & KEY_NO_PATH) | (<uint64_t>new_path << PATH_SHIFT)
        oa[i] = av[i]
    out_k, out_a, _ = _canon(k_buf, a_buf, n)
    return out_k, out_a


def phase_on_path(keys, amps, int64_t path, double default_phase, override_bins, override_phases):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i, j
    cdef Py_ssize_t n_over = len(override_bins)
    ob = np.array(override_bins, dtype=np.int64)
    op = np.array(override_phases, dtype=np.float64)
    cdef const int64_t[:] obv = ob
    cdef const double[:] opv = op
    k_buf = np.empty(n, dtype=np.uint64)
    a_buf = np.empty(n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k
    cdef int64_t bin_idx
    cdef double phase
    cdef double complex factor
    for i in range(n):
        k = kv[i]
        ok[i] = k
        if <int64_t>(k >> PATH_SHIFT) == path:
            bin_idx = <int64_t>((k >> BIN_SHIFT) & BIN_MASK)
            phase = default_phase
            for j in range(n_over):
                if obv[j] == bin_idx:
                    phase = opv[j]
                    break
            factor.real = cos(phase)
            factor.imag = sin(phase)
            oa[i] = av[i] * factor
        else:
            oa[i] = av[i]
    out_k, out_a, _ = _canon(k_buf, a_buf, n)
    return out_k, out_a


def delay_path(keys, amps, int64_t path, int64_t increment):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i
    k_buf = np.empty(n, dtype=np.uint64)
    a_buf = np.empty(n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k, bin_idx
    for i in range(n):
        k = kv[i]
        if <int64_t>(k >> PATH_SHIFT) == path:
            bin_idx = ((k >> BIN_SHIFT) & BIN_MASK) + <uint64_t>increment
            k = (k & KEY_NO_BIN) | (bin_idx << BIN_SHIFT)
        ok[i] = k
        oa[i] = av[i]
    out_k, out_a, _ = _canon(k_buf, a_buf, n)
    return out_k, out_a


def split_bs(keys, amps, int64_t in1, int64_t in2, int64_t out1, int64_t out2):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i, m = 0
    k_buf = np.empty(2 * n, dtype=np.uint64)
    a_buf = np.empty(2 * n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k, base
    cdef int64_t path
    cdef double complex a, a1, a2, ij
    ij.real = 0.0
    ij.imag = 1.0
    for i in range(n):
        k = kv[i]
        a = av[i]
        path = <int64_t>(k >> PATH_SHIFT)
        if path == out1 or path == out2:
            raise WiringError("amplitude already present on a beam-splitter output port")
        if path == in1:
            a1 = a * INV_SQRT2
            a2 = a * ij * INV_SQRT2
        elif path == in2:
            a1 = a * ij * INV_SQRT2
            a2 = a * INV_SQRT2
        else:
            ok[m] = k
            oa[m] = a
            m += 1
            continue
        base = k & KEY_NO_PATH
        ok[m] = base | (<uint64_t>out1 << PATH_SHIFT)
        oa[m] = a1
        m += 1
        ok[m] = base | (<uint64_t>out2 << PATH_SHIFT)
        oa[m] = a2
        m += 1
    out_k, out_a, _ = _canon(k_buf, a_buf, m)
    return out_k, out_a


def pol_unitary(keys, amps, int64_t path, u00, u01, u10, u11, int64_t bin_filter):
    cdef const uint64_t[:] kv = keys
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = kv.shape[0], i, m = 0
    cdef double complex c00 = u00, c01 = u01, c10 = u10, c11 = u11
    k_buf = np.empty(2 * n, dtype=np.uint64)
    a_buf = np.empty(2 * n, dtype=np.complex128)
    cdef uint64_t[:] ok = k_buf
    cdef double complex[:] oa = a_buf
    cdef uint64_t k, base
    cdef double complex a, h_amp, v_amp
    for i in range(n):
        k = kv[i]
        a = av[i]
        if <int64_t>(k >> PATH_SHIFT) != path or (
            bin_filter >= 0 and <int64_t>((k >> BIN_SHIFT) & BIN_MASK) != bin_filter
        ):
            ok[m] = k
            oa[m] = a
            m += 1
            continue
        base = k & (~POL_MASK)
        if (k & POL_MASK) == 0:
            h_amp = a * c00
            v_amp = a * c10
        else:
            h_amp = a * c01
            v_amp = a * c11
        ok[m] = base
        oa[m] = h_amp
        m += 1
        ok[m] = base | <uint64_t>1
        oa[m] = v_amp
        m += 1
    out_k, out_a, _ = _canon(k_buf, a_buf, m)
    return out_k, out_a


def bins_on_path(keys, int64_t path):
    cdef const uint64_t[:] kv = keys
    cdef Py_ssize_t n = kv.shape[0], i
    cdef uint64_t k
    seen = []
    for i in range(n):
        k = kv[i]
        if <int64_t>(k >> PATH_SHIFT) == path:
            b = <int64_t>((k >> BIN_SHIFT) & BIN_MASK)
            if b not in seen:
                seen.append(b)
    seen.sort()
    return seen


def norm_sq(amps):
    cdef const double complex[:] av = amps
    cdef Py_ssize_t n = av.shape[0], i
    cdef double total = 0.0
    for i in range(n):
        total += av[i].real * av[i].real + av[i].imag * av[i].imag
    return total


def inner(keys1, amps1, keys2, amps2):
    cdef const uint64_t[:] k1 = keys1
    cdef const uint64_t[:] k2 = keys2
    cdef const double complex[:] a1 = amps1
    cdef const double complex[:] a2 = amps2
    cdef Py_ssize_t n1 = k1.shape[0], n2 = k2.shape[0], i = 0, j = 0
    cdef double complex total = 0
    cdef double complex conj_a
    while i < n1 and j < n2:
        if k1[i] == k2[j]:
            conj_a.real = a1[i].real
            conj_a.imag = -a1[i].imag
            total = total + conj_a * a2[j]
            i += 1
            j += 1
        elif k1[i] < k2[j]:
            i += 1
        else:
            j += 1
    return complex(total)

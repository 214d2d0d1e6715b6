"""Pure-Python kernel backend.

Every function takes canonical state arrays (uint64 keys sorted ascending
and unique, complex128 amplitudes) and returns new canonical arrays.
Semantics must match the compiled backend in _ext.pyx exactly.
"""

from __future__ import annotations

import numpy as np

from ..errors import RoutingError, WiringError
from .._packing import (
    BIN_MASK,
    BIN_SHIFT,
    FREQ_MASK,
    FREQ_SHIFT,
    NO_PATH,
    PATH_SHIFT,
    POL_MASK,
    PRUNE_EPS,
)

BACKEND_NAME = "py"

_KEY_NO_PATH_BITS = ~(0xFFFF << PATH_SHIFT)
_KEY_NO_FREQ_BITS = ~(FREQ_MASK << FREQ_SHIFT)
_KEY_NO_BIN_BITS = ~(BIN_MASK << BIN_SHIFT)


def _pack_out(keys: list[int], amps: list[complex]):
    return (
        np.array(keys, dtype=np.uint64),
        np.array(amps, dtype=np.complex128),
    )


def _canon_lists(keys: list[int], amps: list[complex]):
    # sort by key, merge duplicates, prune tiny amplitudes
    order = sorted(range(len(keys)), key=keys.__getitem__)
    out_k: list[int] = []
    out_a: list[complex] = []
    merged = 0
    for idx in order:
        k = keys[idx]
        if out_k and out_k[-1] == k:
            out_a[-1] += amps[idx]
            merged += 1
        else:
            out_k.append(k)
            out_a.append(amps[idx])
    if any(abs(a) < PRUNE_EPS for a in out_a):
        kept = [(k, a) for k, a in zip(out_k, out_a) if abs(a) >= PRUNE_EPS]
        out_k = [k for k, _ in kept]
        out_a = [a for _, a in kept]
    return out_k, out_a, merged


def canonicalize(keys, amps):
    out_k, out_a, merged = _canon_lists([int(k) for k in keys], [complex(a) for a in amps])
    k, a = _pack_out(out_k, out_a)
    return k, a, merged


def route_pol(keys, amps, in1: int, in2: int, out1: int, out2: int):
    # polarizing splitter/merger: H keeps the straight-through port pairing
    # (in1->out1, in2->out2), V crosses (in1->out2, in2->out1)
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        path = k >> PATH_SHIFT
        if path == out1 or path == out2:
            raise WiringError("amplitude already present on a polarizing-splitter output port")
        if path == in1:
            new_path = out1 if (k & POL_MASK) == 0 else out2
        elif path == in2:
            new_path = out2 if (k & POL_MASK) == 0 else out1
        else:
            out_k.append(k)
            out_a.append(a)
            continue
        out_k.append((k & _KEY_NO_PATH_BITS) | (new_path << PATH_SHIFT))
        out_a.append(a)
    out_k, out_a, _ = _canon_lists(out_k, out_a)
    return _pack_out(out_k, out_a)


def flip_pol(keys, amps, path: int):
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        if (k >> PATH_SHIFT) == path:
            k ^= 0x1
        out_k.append(k)
        out_a.append(a)
    out_k, out_a, _ = _canon_lists(out_k, out_a)
    return _pack_out(out_k, out_a)


def shift_freq(keys, amps, path: int, freq_from: int, freq_to: int):
    # returns (keys, amps, merged) so callers can flag collisions
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        if (k >> PATH_SHIFT) == path and ((k >> FREQ_SHIFT) & FREQ_MASK) == freq_from:
            k = (k & _KEY_NO_FREQ_BITS) | (freq_to << FREQ_SHIFT)
        out_k.append(k)
        out_a.append(a)
    out_k, out_a, merged = _canon_lists(out_k, out_a)
    k, a = _pack_out(out_k, out_a)
    return k, a, merged


def route_freq(keys, amps, in_path: int, freq_ids, out_paths):
    freq_ids = [int(f) for f in freq_ids]
    out_paths = [int(p) for p in out_paths]
    strict_outs = set(out_paths) - {in_path}
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        path = k >> PATH_SHIFT
        if path in strict_outs:
            raise WiringError("amplitude already present on a frequency-router output port")
        if path == in_path:
            freq = (k >> FREQ_SHIFT) & FREQ_MASK
            try:
                new_path = out_paths[freq_ids.index(freq)]
            except ValueError:
                raise RoutingError(f"no output mapping for frequency id {freq}") from None
            k = (k & _KEY_NO_PATH_BITS) | (new_path << PATH_SHIFT)
        out_k.append(k)
        out_a.append(a)
    out_k, out_a, _ = _canon_lists(out_k, out_a)
    return _pack_out(out_k, out_a)


def phase_on_path(keys, amps, path: int, default_phase: float, override_bins, override_phases):
    override_bins = [int(b) for b in override_bins]
    override_phases = [float(p) for p in override_phases]
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        if (k >> PATH_SHIFT) == path:
            bin_idx = (k >> BIN_SHIFT) & BIN_MASK
            phase = default_phase
            for b, p in zip(override_bins, override_phases):
                if b == bin_idx:
                    phase = p
                    break
            a = a * complex(np.cos(phase), np.sin(phase))
        out_k.append(k)
        out_a.append(a)
    out_k, out_a, _ = _canon_lists(out_k, out_a)
    return _pack_out(out_k, out_a)


def delay_path(keys, amps, path: int, increment: int):
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        if (k >> PATH_SHIFT) == path:
            bin_idx = ((k >> BIN_SHIFT) & BIN_MASK) + increment
            k = (k & _KEY_NO_BIN_BITS) | (bin_idx << BIN_SHIFT)
        out_k.append(k)
        out_a.append(a)
    out_k, out_a, _ = _canon_lists(out_k, out_a)
    return _pack_out(out_k, out_a)


_INV_SQRT2 = float(1.0 / np.sqrt(2.0))


def split_bs(keys, amps, in1: int, in2: int, out1: int, out2: int):
    # symmetric 50/50 splitter, reflection carries a factor i:
    #   in1 -> (out1 + i out2)/sqrt2,  in2 -> (i out1 + out2)/sqrt2
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        path = k >> PATH_SHIFT
        if path == out1 or path == out2:
            raise WiringError("amplitude already present on a beam-splitter output port")
        if path == in1:
            a1, a2 = a * _INV_SQRT2, a * 1j * _INV_SQRT2
        elif path == in2:
            a1, a2 = a * 1j * _INV_SQRT2, a * _INV_SQRT2
        else:
            out_k.append(k)
            out_a.append(a)
            continue
        base = k & _KEY_NO_PATH_BITS
        out_k.append(base | (out1 << PATH_SHIFT))
        out_a.append(a1)
        out_k.append(base | (out2 << PATH_SHIFT))
        out_a.append(a2)
    out_k, out_a, _ = _canon_lists(out_k, out_a)
    return _pack_out(out_k, out_a)


def pol_unitary(keys, amps, path: int, u00, u01, u10, u11, bin_filter: int):
    # applies the 2x2 polarization matrix (columns = images of H and V)
    # to kets on `path`; bin_filter = -1 applies to every time bin
    out_k: list[int] = []
    out_a: list[complex] = []
    for k, a in zip(keys.tolist(), amps.tolist()):
        if (k >> PATH_SHIFT) != path or (
            bin_filter >= 0 and ((k >> BIN_SHIFT) & BIN_MASK) != bin_filter
        ):
            out_k.append(k)
            out_a.append(a)
            continue
        base = k & ~0x1
        if (k & POL_MASK) == 0:
            h_amp, v_amp = a * u00, a * u10
        else:
            h_amp, v_amp = a * u01, a * u11
        out_k.append(base)
        out_a.append(h_amp)
        out_k.append(base | 0x1)
        out_a.append(v_amp)
    out_k, out_a, _ = _canon_lists(out_k, out_a)
    return _pack_out(out_k, out_a)


def bins_on_path(keys, path: int):
    seen: list[int] = []
    for k in keys.tolist():
        if (k >> PATH_SHIFT) == path:
            b = (k >> BIN_SHIFT) & BIN_MASK
            if b not in seen:
                seen.append(b)
    return sorted(seen)


def norm_sq(amps) -> float:
    total = 0.0
    for a in amps.tolist():
        total += a.real * a.real + a.imag * a.imag
    return total


def inner(keys1, amps1, keys2, amps2) -> complex:
    # <s1|s2>: conjugate-linear in the first argument; arrays are sorted
    k1 = keys1.tolist()
    k2 = keys2.tolist()
    a1 = amps1.tolist()
    a2 = amps2.tolist()
    i = j = 0
    total = 0j
    while i < len(k1) and j < len(k2):
        if k1[i] == k2[j]:
            total += a1[i].conjugate() * a2[j]
            i += 1
            j += 1
        elif k1[i] < k2[j]:
            i += 1
        else:
            j += 1
    return total


__all__ = [
    "BACKEND_NAME",
    "NO_PATH",
    "canonicalize",
    "route_pol",
    "flip_pol",
    "shift_freq",
    "route_freq",
    "phase_on_path",
    "delay_path",
    "split_bs",
    "pol_unitary",
    "bins_on_path",
    "norm_sq",
    "inner",
]

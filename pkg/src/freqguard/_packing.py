"""Bit layout of mode keys and the label registries.

A single-photon basis mode (polarization, frequency, path, time bin) is
packed into one 64-bit key so the kernels can transform states as flat
integer/complex arrays:

    bit  0        polarization (0 = H, 1 = V)
    bits 1..8     frequency id (8 bits)
    bits 9..40    time-bin index (32 bits)
    bits 41..56   path id (16 bits)

Ascending key order therefore groups modes by path id, then time bin,
then frequency, then polarization.  Path and frequency labels are interned
process-wide; ids are an in-memory detail and never serialized (all public
ordering and output formats use the string labels).

The compiled kernel hardcodes the same shifts; tests/test_backends.py
asserts both backends agree on random workloads.
"""

from __future__ import annotations

from .errors import ValidationError

FREQ_SHIFT = 1
BIN_SHIFT = 9
PATH_SHIFT = 41

POL_MASK = 0x1
FREQ_MASK = (1 << 8) - 1
BIN_MASK = (1 << 32) - 1
PATH_MASK = (1 << 16) - 1

MAX_FREQS = 1 << 8
MAX_BINS = 1 << 32
MAX_PATHS = 1 << 16

# Amplitudes below this magnitude are dropped after every element
# application, keeping maps finite and comparisons exact.
PRUNE_EPS = 1e-15

# Sentinel for "no second input port" in kernel calls.
NO_PATH = -1


def pack(pol: int, freq_id: int, timebin: int, path_id: int) -> int:
    return pol | (freq_id << FREQ_SHIFT) | (timebin << BIN_SHIFT) | (path_id << PATH_SHIFT)


def unpack(key: int) -> tuple[int, int, int, int]:
    """Return (pol, freq_id, timebin, path_id) for a packed key."""
    return (
        key & POL_MASK,
        (key >> FREQ_SHIFT) & FREQ_MASK,
        (key >> BIN_SHIFT) & BIN_MASK,
        (key >> PATH_SHIFT) & PATH_MASK,
    )


class LabelTable:
    """Interns string labels to small integer ids, first come first served."""

    def __init__(self, capacity: int, what: str):
        self._capacity = capacity
        self._what = what
        self._ids: dict[str, int] = {}
        self._labels: list[str] = []

    def id_of(self, label: str) -> int:
        ident = self._ids.get(label)
        if ident is not None:
            return ident
        if not isinstance(label, str) or not label:
            raise ValidationError(f"{self._what} label must be a non-empty string, got {label!r}")
        if len(self._labels) >= self._capacity:
            raise ValidationError(f"too many distinct {self._what} labels (max {self._capacity})")
        ident = len(self._labels)
        self._ids[label] = ident
        self._labels.append(label)
        return ident

    def label_of(self, ident: int) -> str:
        return self._labels[ident]

    def __len__(self) -> int:
        return len(self._labels)


PATHS = LabelTable(MAX_PATHS, "path")
FREQS = LabelTable(MAX_FREQS, "frequency")


def check_timebin(timebin: int) -> int:
    if not isinstance(timebin, int) or timebin < 0:
        raise ValidationError(f"time bin must be a non-negative integer, got {timebin!r}")
    if timebin >= MAX_BINS:
        raise ValidationError(f"time bin {timebin} exceeds the supported range")
    return timebin

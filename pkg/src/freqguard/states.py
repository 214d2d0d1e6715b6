"""Single-photon states over polarization, frequency, path, and time bin.

A :class:`PhotonState` is a finite complex-amplitude map over
:class:`ModeKet` basis labels.  States are immutable; every operation
returns a new state.  Amplitudes with magnitude below ``1e-15`` are pruned
after each transformation so maps stay finite and comparisons stay exact.

Iteration and serialization order is the mode total order
``(path, timebin, frequency, polarization)`` with string labels compared
lexically, which makes dumps of equal states byte-identical.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels as K
from ._packing import FREQS, PATHS, check_timebin, pack, unpack
from .errors import EmptyStateError, ValidationError

NORM_TOL = 1e-12


class Polarization(enum.Enum):
    H = "H"
    V = "V"

    @property
    def index(self) -> int:
        return 0 if self is Polarization.H else 1

    def flipped(self) -> "Polarization":
        return Polarization.V if self is Polarization.H else Polarization.H


@dataclass(frozen=True, order=False)
class ModeKet:
    """One basis label of the single-photon space.

    Two kets are equal iff all four fields are equal.  ``sort_key`` defines
    the repository-wide total order used for deterministic iteration.
    """

    pol: Polarization
    freq: str
    path: str
    timebin: int = 0

    def __post_init__(self):
        if not isinstance(self.pol, Polarization):
            raise ValidationError(f"pol must be a Polarization, got {self.pol!r}")
        check_timebin(self.timebin)

    @property
    def sort_key(self) -> tuple[str, int, str, str]:
        return (self.path, self.timebin, self.freq, self.pol.value)

    def key(self) -> int:
        """Packed 64-bit form (interns the path/frequency labels)."""
        return pack(self.pol.index, FREQS.id_of(self.freq), self.timebin, PATHS.id_of(self.path))

    @staticmethod
    def from_key(key: int) -> "ModeKet":
        pol, freq_id, timebin, path_id = unpack(key)
        return ModeKet(
            pol=Polarization.V if pol else Polarization.H,
            freq=FREQS.label_of(freq_id),
            path=PATHS.label_of(path_id),
            timebin=timebin,
        )

    def replace(self, **changes) -> "ModeKet":
        fields = {"pol": self.pol, "freq": self.freq, "path": self.path, "timebin": self.timebin}
        fields.update(changes)
        return ModeKet(**fields)


@dataclass(frozen=True)
class InputQubit:
    """Normalized polarization qubit (amplitudes of H and V)."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a = complex(self.alpha)
        b = complex(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"qubit amplitudes are not normalized: |a|^2+|b|^2 = {norm!r}")

    @staticmethod
    def named(name: str) -> "InputQubit":
        """One of the six standard states H, V, +x, -x, +y, -y."""
        s = 1 / np.sqrt(2.0)
        table = {
            "H": (1, 0),
            "V": (0, 1),
            "+x": (s, s),
            "-x": (s, -s),
            "+y": (s, 1j * s),
            "-y": (s, -1j * s),
        }
        try:
            a, b = table[name]
        except KeyError:
            raise ValidationError(
                f"unknown named state {name!r} (expected one of {sorted(table)})"
            ) from None
        return InputQubit(a, b)


_EMPTY_KEYS = np.empty(0, dtype=np.uint64)
_EMPTY_AMPS = np.empty(0, dtype=np.complex128)
_EMPTY_KEYS.setflags(write=False)
_EMPTY_AMPS.setflags(write=False)


class PhotonState:
    """Immutable sparse amplitude map over mode kets.

    Internally the state is a pair of parallel arrays (packed uint64 keys,
    complex128 amplitudes) sorted by packed key, which is what the kernel
    backends operate on.  Public iteration re-sorts by the label-based
    total order, so output never depends on label interning order.
    """

    __slots__ = ("_keys", "_amps", "_norm_sq")

    def __init__(self, keys: np.ndarray, amps: np.ndarray):
        # internal constructor: arrays must already be canonical
        keys.setflags(write=False)
        amps.setflags(write=False)
        self._keys = keys
        self._amps = amps
        self._norm_sq: float | None = None

    @staticmethod
    def from_amplitudes(amplitudes: Mapping[ModeKet, complex]) -> "PhotonState":
        """Build a state from an explicit {ket: amplitude} map.

        Raises ValidationError if the map is empty after pruning or its
        squared norm exceeds 1 + 1e-12 (states are never super-normalized).
        """
        if not amplitudes:
            raise ValidationError("a photon state needs at least one nonzero amplitude")
        keys = np.array([k.key() for k in amplitudes], dtype=np.uint64)
        amps = np.array([complex(a) for a in amplitudes.values()], dtype=np.complex128)
        keys, amps, _ = K.canonicalize(keys, amps)
        state = PhotonState(keys, amps)
        n2 = state.norm_sq()
        if n2 <= 0.0:
            raise ValidationError("a photon state needs at least one nonzero amplitude")
        if n2 > 1.0 + NORM_TOL:
            raise ValidationError(f"squared norm {n2!r} exceeds 1")
        return state

    @staticmethod
    def empty() -> "PhotonState":
        """Explicit empty-branch marker (zero amplitude everywhere)."""
        return PhotonState(_EMPTY_KEYS, _EMPTY_AMPS)

    @property
    def is_empty(self) -> bool:
        return self._keys.shape[0] == 0

    def __len__(self) -> int:
        return self._keys.shape[0]

    def norm_sq(self) -> float:
        if self._norm_sq is None:
            self._norm_sq = K.norm_sq(self._amps)
        return self._norm_sq

    def amplitude(self, ket: ModeKet) -> complex:
        key = ket.key()
        idx = np.searchsorted(self._keys, np.uint64(key))
        if idx < len(self._keys) and int(self._keys[idx]) == key:
            return complex(self._amps[idx])
        return 0j

    def items(self) -> list[tuple[ModeKet, complex]]:
        """Amplitudes in the (path, timebin, freq, pol) label order."""
        pairs = [
            (ModeKet.from_key(int(k)), complex(a))
            for k, a in zip(self._keys.tolist(), self._amps.tolist())
        ]
        pairs.sort(key=lambda p: p[0].sort_key)
        return pairs

    def kets(self) -> list[ModeKet]:
        return [k for k, _ in self.items()]

    def scaled(self, factor: complex) -> "PhotonState":
        """Multiply every amplitude by a scalar (used for phase injection)."""
        keys, amps, _ = K.canonicalize(self._keys, self._amps * complex(factor))
        return PhotonState(keys, amps)

    def normalized(self) -> "PhotonState":
        n2 = self.norm_sq()
        if n2 == 0.0:
            raise EmptyStateError("cannot normalize an empty state")
        return PhotonState(self._keys, self._amps / np.sqrt(n2))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhotonState):
            return NotImplemented
        return (
            self._keys.shape == other._keys.shape
            and bool(np.all(self._keys == other._keys))
            and bool(np.all(self._amps == other._amps))
        )

    def __hash__(self):
        return hash((self._keys.tobytes(), self._amps.tobytes()))

    def __repr__(self) -> str:
        terms = ", ".join(
            f"|{k.pol.value},{k.freq},{k.path},{k.timebin}>: {a:.4g}" for k, a in self.items()[:6]
        )
        suffix = ", ..." if len(self) > 6 else ""
        return f"PhotonState({terms}{suffix})"


@lru_cache(maxsize=512)
def prepare_input(qubit: InputQubit, freq: str, path: str) -> PhotonState:
    """Initial state: the qubit's H/V amplitudes at one frequency and path.

    The qubit is re-validated so states prepared through this entry point
    always have unit norm.  Results are memoized (states are immutable and
    the same input is prepared for every trial of an ensemble run).
    """
    norm = abs(qubit.alpha) ** 2 + abs(qubit.beta) ** 2
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError("input qubit is not normalized")
    amplitudes = {}
    if qubit.alpha != 0:
        amplitudes[ModeKet(Polarization.H, freq, path, 0)] = qubit.alpha
    if qubit.beta != 0:
        amplitudes[ModeKet(Polarization.V, freq, path, 0)] = qubit.beta
    return PhotonState.from_amplitudes(amplitudes)


def inner_product(s1: PhotonState, s2: PhotonState) -> complex:
    """<s1|s2>: conjugate-linear in the first argument."""
    return K.inner(s1._keys, s1._amps, s2._keys, s2._amps)


def fidelity(s: PhotonState, ideal: PhotonState) -> float:
    """|<ideal|s>|^2 normalized by both squared norms; in [0, 1].

    Invariant under a global phase on either argument.  Rejects zero-norm
    arguments.
    """
    n_s = s.norm_sq()
    n_i = ideal.norm_sq()
    if n_s <= 0.0 or n_i <= 0.0:
        raise EmptyStateError("fidelity requires two states with nonzero norm")
    ov = inner_product(ideal, s)
    return (ov.real * ov.real + ov.imag * ov.imag) / (n_i * n_s)


def condition(
    s: PhotonState, keep: Callable[[ModeKet], bool]
) -> tuple[PhotonState, float]:
    """Post-select on a ket predicate.

    Returns the un-normalized surviving component and its probability
    ``norm_sq(sub) / norm_sq(s)``.  An empty selection yields the explicit
    empty state with probability 0 rather than an error.
    """
    if s.is_empty:
        return PhotonState.empty(), 0.0
    mask = np.fromiter(
        (keep(ModeKet.from_key(int(k))) for k in s._keys.tolist()),
        dtype=bool,
        count=len(s),
    )
    if not mask.any():
        return PhotonState.empty(), 0.0
    sub = PhotonState(s._keys[mask].copy(), s._amps[mask].copy())
    return sub, sub.norm_sq() / s.norm_sq()


def max_amplitude_deviation(s1: PhotonState, s2: PhotonState) -> float:
    """Largest |amplitude difference| over the union of both states' kets."""
    amps: dict[int, complex] = dict(zip(s1._keys.tolist(), s1._amps.tolist()))
    worst = 0.0
    for k, a in zip(s2._keys.tolist(), s2._amps.tolist()):
        worst = max(worst, abs(amps.pop(k, 0j) - a))
    for a in amps.values():
        worst = max(worst, abs(a))
    return worst


def state_records(s: PhotonState) -> list[dict]:
    """One record per ket: (pol, freq, path, timebin, re, im), total order."""
    return [
        {
            "pol": k.pol.value,
            "freq": k.freq,
            "path": k.path,
            "timebin": k.timebin,
            "re": a.real,
            "im": a.imag,
        }
        for k, a in s.items()
    ]


def state_to_json(s: PhotonState) -> str:
    return json.dumps(state_records(s))


STATE_CSV_FIELDS = ("pol", "freq", "path", "timebin", "re", "im")


def state_csv_rows(s: PhotonState) -> list[list]:
    return [[r[f] for f in STATE_CSV_FIELDS] for r in state_records(s)]


def _relabel(s: PhotonState, path: str, timebin: int) -> PhotonState:
    """Move every ket of a single-(path, bin) state to (path, timebin)."""
    amplitudes = {k.replace(path=path, timebin=timebin): a for k, a in s.items()}
    if len(amplitudes) != len(s):
        raise ValidationError("relabel requires a state on a single (path, timebin)")
    keys = np.array([k.key() for k in amplitudes], dtype=np.uint64)
    amps = np.array(list(amplitudes.values()), dtype=np.complex128)
    keys, amps, _ = K.canonicalize(keys, amps)
    return PhotonState(keys, amps)


def iterable_to_state(pairs: Iterable[tuple[ModeKet, complex]]) -> PhotonState:
    """Convenience for tests and transcriptions: build from (ket, amp) pairs."""
    return PhotonState.from_amplitudes(dict(pairs))

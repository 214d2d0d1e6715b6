"""Linear-optical elements as unitary rewrite rules on mode kets.

Conventions (fixed repository-wide):

* PBS: four-port device; H keeps the straight-through port pairing
  (in1 -> out1, in2 -> out2) and V crosses, with no reflection phase.
* BS: symmetric 50/50 splitter; the reflected amplitude carries a factor
  ``i`` (in1 -> (out1 + i out2)/sqrt(2), in2 -> (i out1 + out2)/sqrt(2)).
* HWP: polarization bit flip on one path.
* FS: exact frequency-label permutation on one path.
* WDM: polarization-independent frequency-to-path router.
* PM: per-time-bin phase e^{i phi} on one path.
* Delay: integer time-bin increment on one path.

Every element acts locally: kets on unrelated paths pass through
unchanged.  Routing elements (PBS, BS, WDM) reject input states that
already hold amplitude on their output ports, since that amplitude would
alias unphysically with the routed one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar, Sequence, Union

import numpy as np

from . import _kernels as K
from ._packing import FREQS, PATHS, NO_PATH
from .errors import BasisError, ValidationError
from .states import ModeKet, PhotonState

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PMSchedule:
    """Phase modulator schedule: a default phase plus per-bin overrides."""

    default_phase: float = 0.0
    overrides: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        seen = set()
        for b, _ in self.overrides:
            if b < 0:
                raise ValidationError("override time bins must be non-negative")
            if b in seen:
                raise ValidationError(f"duplicate override for time bin {b}")
            seen.add(b)
        object.__setattr__(self, "overrides", tuple(sorted(self.overrides)))

    def phase_for(self, timebin: int) -> float:
        for b, p in self.overrides:
            if b == timebin:
                return p
        return self.default_phase

    def equivalent(self, other: "PMSchedule", bins: Sequence[int] = (0, 1)) -> bool:
        """Equality of phases modulo 2*pi over the given bins."""
        return all(
            math.isclose((self.phase_for(b) - other.phase_for(b)) % TWO_PI, 0.0, abs_tol=1e-12)
            or math.isclose((self.phase_for(b) - other.phase_for(b)) % TWO_PI, TWO_PI, abs_tol=1e-12)
            for b in bins
        )


def _require_distinct(label: str, ports: Sequence[str]):
    if len(set(ports)) != len(ports):
        raise ValidationError(f"{label} ports must be distinct, got {ports}")


@dataclass(frozen=True)
class PBS:
    """Polarizing beam splitter (split or merge orientation)."""

    inputs: tuple[str, ...]
    outputs: tuple[str, str]
    kind: ClassVar[str] = "PBS"

    def __post_init__(self):
        if len(self.inputs) not in (1, 2):
            raise ValidationError("PBS takes one or two input ports")
        _require_distinct("PBS", (*self.inputs, *self.outputs))

    @cached_property
    def _ids(self) -> tuple[int, int, int, int]:
        in1 = PATHS.id_of(self.inputs[0])
        in2 = PATHS.id_of(self.inputs[1]) if len(self.inputs) == 2 else NO_PATH
        return in1, in2, PATHS.id_of(self.outputs[0]), PATHS.id_of(self.outputs[1])

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        in1, in2, out1, out2 = self._ids
        return PhotonState(*K.route_pol(s._keys, s._amps, in1, in2, out1, out2))


@dataclass(frozen=True)
class BS:
    """Symmetric 50/50 beam splitter; reflection carries a factor i."""

    inputs: tuple[str, str]
    outputs: tuple[str, str]
    kind: ClassVar[str] = "BS"

    def __post_init__(self):
        _require_distinct("BS", (*self.inputs, *self.outputs))

    @cached_property
    def _ids(self) -> tuple[int, int, int, int]:
        return tuple(PATHS.id_of(p) for p in (*self.inputs, *self.outputs))

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        in1, in2, out1, out2 = self._ids
        return PhotonState(*K.split_bs(s._keys, s._amps, in1, in2, out1, out2))


@dataclass(frozen=True)
class HWP:
    """Half-wave plate: polarization bit flip on one path."""

    path: str
    kind: ClassVar[str] = "HWP"

    @cached_property
    def _path_id(self) -> int:
        return PATHS.id_of(self.path)

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        return PhotonState(*K.flip_pol(s._keys, s._amps, self._path_id))


@dataclass(frozen=True)
class FS:
    """Frequency shifter: exact label permutation on one path.

    If the target frequency is already occupied on the same path the
    amplitudes merge by complex addition; the merge is flagged on the
    trace rather than raised.
    """

    path: str
    from_freq: str
    to_freq: str
    kind: ClassVar[str] = "FS"

    def __post_init__(self):
        if self.from_freq == self.to_freq:
            raise ValidationError("FS must shift between two distinct frequencies")

    @cached_property
    def _ids(self) -> tuple[int, int, int]:
        return PATHS.id_of(self.path), FREQS.id_of(self.from_freq), FREQS.id_of(self.to_freq)

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        path, f_from, f_to = self._ids
        keys, amps, merged = K.shift_freq(s._keys, s._amps, path, f_from, f_to)
        if merged and trace is not None:
            trace.append({"element": "FS", "event": "amplitude-merge", "count": merged})
        return PhotonState(keys, amps)


@dataclass(frozen=True)
class WDM:
    """Frequency router: each frequency on the input goes to its own path."""

    input: str
    routes: tuple[tuple[str, str], ...]  # (frequency label, output path)
    kind: ClassVar[str] = "WDM"

    def __post_init__(self):
        object.__setattr__(self, "routes", tuple(sorted(self.routes)))
        freqs = [f for f, _ in self.routes]
        if len(set(freqs)) != len(freqs):
            raise ValidationError("WDM routes must map each frequency once")
        _require_distinct("WDM", (self.input, *{p for _, p in self.routes}))

    @cached_property
    def _ids(self) -> tuple[int, list[int], list[int]]:
        return (
            PATHS.id_of(self.input),
            [FREQS.id_of(f) for f, _ in self.routes],
            [PATHS.id_of(p) for _, p in self.routes],
        )

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        in_path, freq_ids, out_ids = self._ids
        return PhotonState(*K.route_freq(s._keys, s._amps, in_path, freq_ids, out_ids))


@dataclass(frozen=True)
class PM:
    """Phase modulator on one path, optionally gated by time bin."""

    path: str
    schedule: PMSchedule = field(default_factory=PMSchedule)
    kind: ClassVar[str] = "PM"

    @cached_property
    def _compiled(self):
        bins = np.array([b for b, _ in self.schedule.overrides], dtype=np.int64)
        phases = np.array([p for _, p in self.schedule.overrides], dtype=np.float64)
        return PATHS.id_of(self.path), bins, phases

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        path, bins, phases = self._compiled
        return PhotonState(
            *K.phase_on_path(s._keys, s._amps, path, self.schedule.default_phase, bins, phases)
        )


@dataclass(frozen=True)
class Delay:
    """Integer time-bin increment on one path."""

    path: str
    bins: int = 1
    kind: ClassVar[str] = "Delay"

    def __post_init__(self):
        if self.bins < 1:
            raise ValidationError("delay must be at least one time bin")

    @cached_property
    def _path_id(self) -> int:
        return PATHS.id_of(self.path)

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        return PhotonState(*K.delay_path(s._keys, s._amps, self._path_id, self.bins))


Element = Union[PBS, BS, HWP, FS, WDM, PM, Delay]


def apply_element(e: Element, s: PhotonState, trace: list | None = None) -> PhotonState:
    return e.apply(s, trace)


def element_unitary_defect(e: Element, basis: Sequence[ModeKet]) -> float:
    """Isometry defect of an element on a domain basis.

    The element is applied to each basis ket; the image kets define the
    codomain.  Returns max |M^dagger M - I| entrywise for the resulting
    scattering matrix M (codomain x domain).  A conforming element stays
    below 1e-12.
    """
    if not basis:
        raise BasisError("unitarity check needs a non-empty basis")
    if len({k for k in basis}) != len(basis):
        raise BasisError("unitarity-check basis contains duplicate kets")
    images = [e.apply(PhotonState.from_amplitudes({ket: 1.0})) for ket in basis]
    codomain: dict[ModeKet, int] = {}
    for img in images:
        for ket, _ in img.items():
            if ket not in codomain:
                codomain[ket] = len(codomain)
    m = np.zeros((len(codomain), len(basis)), dtype=np.complex128)
    for col, img in enumerate(images):
        for ket, amp in img.items():
            m[codomain[ket], col] = amp
    defect = m.conj().T @ m - np.eye(len(basis))
    return float(np.abs(defect).max())


_ELEMENT_TYPES = {cls.kind: cls for cls in (PBS, BS, HWP, FS, WDM, PM, Delay)}


def element_to_dict(e: Element) -> dict:
    if isinstance(e, PBS):
        return {"kind": "PBS", "inputs": list(e.inputs), "outputs": list(e.outputs)}
    if isinstance(e, BS):
        return {"kind": "BS", "inputs": list(e.inputs), "outputs": list(e.outputs)}
    if isinstance(e, HWP):
        return {"kind": "HWP", "path": e.path}
    if isinstance(e, FS):
        return {"kind": "FS", "path": e.path, "from_freq": e.from_freq, "to_freq": e.to_freq}
    if isinstance(e, WDM):
        return {"kind": "WDM", "input": e.input, "routes": [list(r) for r in e.routes]}
    if isinstance(e, PM):
        return {
            "kind": "PM",
            "path": e.path,
            "schedule": {
                "default_phase": e.schedule.default_phase,
                "overrides": [list(o) for o in e.schedule.overrides],
            },
        }
    if isinstance(e, Delay):
        return {"kind": "Delay", "path": e.path, "bins": e.bins}
    raise ValidationError(f"unknown element {e!r}")


_ELEMENT_FIELDS = {
    "PBS": {"inputs", "outputs"},
    "BS": {"inputs", "outputs"},
    "HWP": {"path"},
    "FS": {"path", "from_freq", "to_freq"},
    "WDM": {"input", "routes"},
    "PM": {"path", "schedule"},
    "Delay": {"path", "bins"},
}


def element_from_dict(d: dict) -> Element:
    kind = d.get("kind")
    if kind not in _ELEMENT_TYPES:
        raise ValidationError(f"unknown element kind {kind!r}")
    fields = set(d) - {"kind"}
    unknown = fields - _ELEMENT_FIELDS[kind]
    if unknown:
        raise ValidationError(f"unknown fields for element {kind}: {sorted(unknown)}")
    try:
        if kind in ("PBS", "BS"):
            return _ELEMENT_TYPES[kind](inputs=tuple(d["inputs"]), outputs=tuple(d["outputs"]))
        if kind == "HWP":
            return HWP(path=d["path"])
        if kind == "FS":
            return FS(path=d["path"], from_freq=d["from_freq"], to_freq=d["to_freq"])
        if kind == "WDM":
            return WDM(input=d["input"], routes=tuple((f, p) for f, p in d["routes"]))
        if kind == "PM":
            sched = d["schedule"]
            extra = set(sched) - {"default_phase", "overrides"}
            if extra:
                raise ValidationError(f"unknown PM schedule fields: {sorted(extra)}")
            return PM(
                path=d["path"],
                schedule=PMSchedule(
                    default_phase=float(sched.get("default_phase", 0.0)),
                    overrides=tuple((int(b), float(p)) for b, p in sched.get("overrides", ())),
                ),
            )
        return Delay(path=d["path"], bins=int(d.get("bins", 1)))
    except KeyError as exc:
        raise ValidationError(f"element {kind} is missing field {exc}") from None

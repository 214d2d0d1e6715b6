"""Polarization channel noise: 2x2 unitaries, placement, seeded sampling.

Noise acts on polarization only; frequency, path, and time bin are never
touched.  A :class:`NoiseModel` resolves which unitary hits which
(channel, time bin); a :class:`NoiseSpec` is the reproducible recipe that
produces one model per Monte Carlo trial.

Sampling is driven by numpy's PCG64 seeded through
``SeedSequence(entropy=seed, spawn_key=(index,))``, so any (seed, index)
pair addresses its own stream independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import _kernels as K
from ._packing import PATHS
from .errors import ConfigError, ValidationError
from .states import PhotonState

UNITARITY_TOL = 1e-12

# Fixed stride between trials in the Haar sample stream; one trial may
# consume at most this many unitaries (channels x time bins).
SLOTS_PER_TRIAL = 8


@dataclass(frozen=True)
class PolarizationUnitary:
    """2x2 unitary on (|H>, |V>); columns are the images of H and V."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.complex128)
        if u.shape != (2, 2):
            raise ValidationError(f"polarization unitary must be 2x2, got shape {u.shape}")
        defect = np.abs(u.conj().T @ u - np.eye(2)).max()
        if defect > UNITARITY_TOL:
            raise ValidationError(f"matrix is not unitary (defect {defect:.3e})")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @staticmethod
    def identity() -> "PolarizationUnitary":
        return PolarizationUnitary(np.eye(2, dtype=np.complex128))

    @staticmethod
    def rotation(theta: float) -> "PolarizationUnitary":
        c, s = np.cos(theta), np.sin(theta)
        return PolarizationUnitary(np.array([[c, -s], [s, c]], dtype=np.complex128))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolarizationUnitary):
            return NotImplemented
        return bool(np.all(self.u == other.u))

    def __hash__(self):
        return hash(self.u.tobytes())


def complete_from_column(delta: complex, eta: complex) -> PolarizationUnitary:
    """Extend the image of |H> = (delta, eta) to the unique SU(2) matrix.

    The second column is (-eta*, delta*), giving determinant 1.  The first
    column must be normalized.
    """
    delta = complex(delta)
    eta = complex(eta)
    norm = abs(delta) ** 2 + abs(eta) ** 2
    if abs(norm - 1.0) > UNITARITY_TOL:
        raise ValidationError(f"noise column is not normalized: |d|^2+|e|^2 = {norm!r}")
    u = np.array(
        [[delta, -eta.conjugate()], [eta, delta.conjugate()]], dtype=np.complex128
    )
    return PolarizationUnitary(u)


def sample_haar_su2(seed: int, index: int) -> PolarizationUnitary:
    """Haar-uniform SU(2) draw, a pure function of (seed, index).

    Ginibre column construction: two complex standard Gaussians (a, b) are
    normalized to a unit vector and completed as in
    :func:`complete_from_column`.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    re_a, im_a, re_b, im_b = rng.standard_normal(4)
    a = complex(re_a, im_a)
    b = complex(re_b, im_b)
    norm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    a /= norm
    b /= norm
    u = np.array([[a, -b.conjugate()], [b, a.conjugate()]], dtype=np.complex128)
    return PolarizationUnitary(u)


@dataclass(frozen=True)
class NoiseModel:
    """Resolved unitary assignments for one run.

    ``assignments`` maps (channel, time bin) to a unitary; ``None`` acts as
    a wildcard.  Resolution order is exact (channel, bin), then
    (channel, None), then (None, None).
    """

    placement: str  # "global" | "per_channel" | "per_timebin"
    assignments: Mapping[tuple[str | None, int | None], PolarizationUnitary]
    description: dict = field(default_factory=dict)

    _PLACEMENTS = ("global", "per_channel", "per_timebin")

    def __post_init__(self):
        if self.placement not in self._PLACEMENTS:
            raise ValidationError(f"unknown noise placement {self.placement!r}")

    @staticmethod
    def uniform(u: PolarizationUnitary, description: dict | None = None) -> "NoiseModel":
        return NoiseModel("global", {(None, None): u}, description or {})

    @staticmethod
    def per_channel(
        units: Mapping[str, PolarizationUnitary], description: dict | None = None
    ) -> "NoiseModel":
        return NoiseModel(
            "per_channel", {(ch, None): u for ch, u in units.items()}, description or {}
        )

    @staticmethod
    def per_timebin(
        units: Mapping[tuple[str, int], PolarizationUnitary], description: dict | None = None
    ) -> "NoiseModel":
        return NoiseModel(
            "per_timebin", {(ch, b): u for (ch, b), u in units.items()}, description or {}
        )

    def unitary_for(self, channel: str, timebin: int | None) -> PolarizationUnitary:
        for key in ((channel, timebin), (channel, None), (None, None)):
            u = self.assignments.get(key)
            if u is not None:
                return u
        raise ConfigError(f"no noise unitary resolved for channel {channel!r}, bin {timebin!r}")


def apply_noise(m: NoiseModel, s: PhotonState, channel: str) -> PhotonState:
    """Apply the channel's unitary to every ket on the channel path.

    Polarization amplitudes are mixed per the resolved 2x2 matrix;
    frequency, path, and time bin are preserved.
    """
    ch_id = PATHS.id_of(channel)
    bins = K.bins_on_path(s._keys, ch_id)
    if not bins:
        return s
    if m.placement != "per_timebin":
        u = m.unitary_for(channel, None).u
        return PhotonState(
            *K.pol_unitary(s._keys, s._amps, ch_id, u[0, 0], u[0, 1], u[1, 0], u[1, 1], -1)
        )
    keys, amps = s._keys, s._amps
    for b in bins:
        u = m.unitary_for(channel, b).u
        keys, amps = K.pol_unitary(keys, amps, ch_id, u[0, 0], u[0, 1], u[1, 0], u[1, 1], b)
    return PhotonState(keys, amps)


@dataclass(frozen=True)
class NoiseSpec:
    """Reproducible noise recipe: kind, parameters, placement, seed.

    Kinds: ``identity``, ``rotation`` (theta, radians), ``column``
    (delta/eta, the image of |H>), ``haar`` (seeded random unitaries).
    Fixed kinds resolve to the same unitary everywhere; ``haar`` draws one
    unitary per placement slot per trial, at stream index
    ``trial * SLOTS_PER_TRIAL + slot``.
    """

    kind: str
    placement: str = "per_channel"
    seed: int = 0
    theta: float | None = None
    delta: complex | None = None
    eta: complex | None = None

    _KINDS = ("identity", "rotation", "column", "haar")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if self.placement not in NoiseModel._PLACEMENTS:
            raise ValidationError(f"unknown noise placement {self.placement!r}")
        if self.kind == "rotation" and self.theta is None:
            raise ValidationError("rotation noise needs a theta parameter")
        if self.kind == "column":
            if self.delta is None or self.eta is None:
                raise ValidationError("column noise needs delta and eta parameters")
            complete_from_column(self.delta, self.eta)  # validates normalization
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError("seed must fit in 64 unsigned bits")

    def model_for_trial(
        self, trial: int, channels: tuple[str, ...], timebins: tuple[int, ...] = (0,)
    ) -> NoiseModel:
        if self.kind != "haar":
            return _fixed_model(self)  # trial-independent, memoized
        desc = self.to_dict()
        n_slots = (
            1
            if self.placement == "global"
            else len(channels)
            if self.placement == "per_channel"
            else len(channels) * len(timebins)
        )
        if n_slots > SLOTS_PER_TRIAL:
            raise ConfigError(f"noise placement needs {n_slots} slots per trial (max {SLOTS_PER_TRIAL})")
        base = trial * SLOTS_PER_TRIAL
        if self.placement == "global":
            return NoiseModel.uniform(sample_haar_su2(self.seed, base), desc)
        if self.placement == "per_channel":
            units = {
                ch: sample_haar_su2(self.seed, base + i) for i, ch in enumerate(channels)
            }
            return NoiseModel.per_channel(units, desc)
        units_tb = {
            (ch, b): sample_haar_su2(self.seed, base + i * len(timebins) + j)
            for i, ch in enumerate(channels)
            for j, b in enumerate(sorted(timebins))
        }
        return NoiseModel.per_timebin(units_tb, desc)

    def _fixed_unitary(self) -> PolarizationUnitary:
        if self.kind == "identity":
            return PolarizationUnitary.identity()
        if self.kind == "rotation":
            return PolarizationUnitary.rotation(float(self.theta))
        return complete_from_column(self.delta, self.eta)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "placement": self.placement}
        if self.kind == "haar":
            d["seed"] = int(self.seed)
        if self.kind == "rotation":
            d["theta"] = float(self.theta)
        if self.kind == "column":
            d["delta"] = [self.delta.real, self.delta.imag]
            d["eta"] = [self.eta.real, self.eta.imag]
        return d


@lru_cache(maxsize=256)
def _fixed_model(spec: NoiseSpec) -> NoiseModel:
    return NoiseModel.uniform(spec._fixed_unitary(), spec.to_dict())

"""The built-in encoder/decoder circuits and the end-to-end pipelines.

Two schemes are provided:

* ``two_channel``: the qubit is split by polarization, re-encoded into a
  two-frequency superposition of a single H-polarized photon, and sent
  through two noisy channels ("a" and "b"); each channel has its own
  decoder.
* ``single_channel``: the same encoder is extended with an unbalanced
  interferometer (one arm delayed by one time bin, the other polarization
  flipped) so both components share one noisy channel, separated in time;
  one decoder recovers the qubit in four (port, time-bin) branches.

Decoder phase convention.  The splitter reflection carries a factor i, so
the two channel states differ in which frequency component holds that i.
The decoder's phase modulator must therefore shift the omega2 arm by
-pi/2 for channel "a" (cancel the reflection phase) and +pi/2 for channel
"b" (match it).  In the single-channel scheme the delayed time bin plays
the role of channel "a" and the prompt bin of channel "b", which is what
the time-gated schedule encodes.  A static (single-phase) modulator can
only align one of the two, leaving the other with fidelity
(|alpha|^2 - |beta|^2)^2; ``PmMode("static", phi)`` is kept available to
demonstrate exactly that.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from .elements import BS, FS, HWP, PBS, PM, WDM, Delay, Element, PMSchedule, element_from_dict, element_to_dict
from .errors import ConfigError, ValidationError
from .noise import NoiseModel, apply_noise
from .states import InputQubit, PhotonState, prepare_input

OMEGA1 = "omega1"
OMEGA2 = "omega2"

INPUT_PATH = "in"
CHANNEL_A = "a"
CHANNEL_B = "b"
SINGLE_CHANNEL = "ch"
PORT_D = "d"
PORT_C = "c"
VENT = "vent"  # always-dark second output of the single-channel merge

# Phase applied by the decoder PM on the omega2 arm.
PM_CANCEL_REFLECTION = -math.pi / 2  # the omega2 component was the reflected one
PM_MATCH_REFLECTION = math.pi / 2  # the omega1 component was the reflected one

# Delayed bins (>= 1) came through the encoder port whose omega2 component
# was reflected; the prompt bin 0 came through the other port.
TIME_GATED_SCHEDULE = PMSchedule(
    default_phase=PM_CANCEL_REFLECTION, overrides=((0, PM_MATCH_REFLECTION),)
)


class SchemeKind(enum.Enum):
    TWO_CHANNEL = "two_channel"
    SINGLE_CHANNEL = "single_channel"

    @property
    def channels(self) -> tuple[str, ...]:
        return (CHANNEL_A, CHANNEL_B) if self is SchemeKind.TWO_CHANNEL else (SINGLE_CHANNEL,)

    @property
    def timebins(self) -> tuple[int, ...]:
        return (0,) if self is SchemeKind.TWO_CHANNEL else (0, 1)

    @property
    def output_ports(self) -> tuple[str, ...]:
        if self is SchemeKind.TWO_CHANNEL:
            return ("c_a", "c_b", "d_a", "d_b")
        return (PORT_C, PORT_D)


@dataclass(frozen=True)
class PmMode:
    """Decoder phase-modulator mode: gated per time bin, or one static phase."""

    kind: str = "time_gated"
    phase: float | None = None

    def __post_init__(self):
        if self.kind not in ("time_gated", "static"):
            raise ValidationError(f"unknown pm mode {self.kind!r}")
        if self.kind == "static" and self.phase is None:
            raise ValidationError("static pm mode needs a phase")
        if self.kind == "time_gated" and self.phase is not None:
            raise ValidationError("time_gated pm mode takes no phase")

    def to_dict(self) -> dict:
        d: dict = {"mode": self.kind}
        if self.kind == "static":
            d["phase"] = float(self.phase)
        return d


@dataclass(frozen=True)
class Circuit:
    """An ordered element pipeline from one input path to declared ports."""

    name: str
    input_path: str
    output_ports: tuple[str, ...]
    elements: tuple[Element, ...]

    def apply(self, s: PhotonState, trace: list | None = None) -> PhotonState:
        for e in self.elements:
            s = e.apply(s, trace)
        return s

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "input": self.input_path,
            "outputs": list(self.output_ports),
            "elements": [element_to_dict(e) for e in self.elements],
        }

    @staticmethod
    def from_dict(d: dict) -> "Circuit":
        unknown = set(d) - {"name", "input", "outputs", "elements"}
        if unknown:
            raise ConfigError(f"unknown circuit fields: {sorted(unknown)}")
        try:
            return Circuit(
                name=d["name"],
                input_path=d["input"],
                output_ports=tuple(d["outputs"]),
                elements=tuple(element_from_dict(e) for e in d["elements"]),
            )
        except KeyError as exc:
            raise ConfigError(f"circuit definition is missing field {exc}") from None


@lru_cache(maxsize=None)
def two_channel_encoder() -> Circuit:
    """Polarization split, frequency tag, flip, 50/50 split onto a and b."""
    return Circuit(
        name="two-channel-encoder",
        input_path=INPUT_PATH,
        output_ports=(CHANNEL_A, CHANNEL_B),
        elements=(
            PBS(inputs=(INPUT_PATH,), outputs=("1", "2")),
            FS(path="1", from_freq=OMEGA2, to_freq=OMEGA1),
            HWP(path="2"),
            BS(inputs=("1", "2"), outputs=(CHANNEL_A, CHANNEL_B)),
        ),
    )


@lru_cache(maxsize=None)
def single_channel_encoder() -> Circuit:
    """Two-channel encoder plus an unbalanced merge into one channel.

    The delayed arm keeps H polarization, the prompt arm is flipped to V,
    so a polarizing merge is lossless and the channel carries the photon
    in two time bins.
    """
    return Circuit(
        name="single-channel-encoder",
        input_path=INPUT_PATH,
        output_ports=(SINGLE_CHANNEL,),
        elements=(
            PBS(inputs=(INPUT_PATH,), outputs=("1", "2")),
            FS(path="1", from_freq=OMEGA2, to_freq=OMEGA1),
            HWP(path="2"),
            BS(inputs=("1", "2"), outputs=("3", "4")),
            Delay(path="3", bins=1),
            HWP(path="4"),
            PBS(inputs=("3", "4"), outputs=(SINGLE_CHANNEL, VENT)),
        ),
    )


@lru_cache(maxsize=None)
def channel_decoder(
    channel: str,
    pm: PMSchedule,
    out_d: str = PORT_D,
    out_c: str = PORT_C,
    inner: tuple[str, str] = ("1", "2"),
) -> Circuit:
    """Frequency-to-path demux, realign, polarizing merge to ports (d, c)."""
    p1, p2 = inner
    return Circuit(
        name="channel-decoder",
        input_path=channel,
        output_ports=(out_d, out_c),
        elements=(
            WDM(input=channel, routes=((OMEGA1, p1), (OMEGA2, p2))),
            FS(path=p1, from_freq=OMEGA1, to_freq=OMEGA2),
            HWP(path=p2),
            PM(path=p2, schedule=pm),
            PBS(inputs=(p1, p2), outputs=(out_d, out_c)),
            HWP(path=out_c),
        ),
    )


BUILTIN_CIRCUITS = {
    "two-channel-encoder": two_channel_encoder,
    "single-channel-encoder": single_channel_encoder,
}


def _check_encoder_input(s: PhotonState, input_path: str):
    for ket, _ in s.items():
        if ket.freq != OMEGA2:
            raise ValidationError(f"encoder input must be at {OMEGA2}, found {ket.freq}")
        if ket.path != input_path:
            raise ValidationError(
                f"encoder input must sit on path {input_path!r}, found {ket.path!r}"
            )


def encode_two_channel(s: PhotonState, trace: list | None = None) -> PhotonState:
    """Run the two-channel encoder; input must be an omega2 state on 'in'."""
    _check_encoder_input(s, INPUT_PATH)
    return two_channel_encoder().apply(s, trace)


def encode_single_channel(s: PhotonState, trace: list | None = None) -> PhotonState:
    """Run the single-channel encoder; input must be an omega2 state on 'in'."""
    _check_encoder_input(s, INPUT_PATH)
    return single_channel_encoder().apply(s, trace)


def decode(
    s: PhotonState,
    channel: str,
    pm: PMSchedule,
    out_ports: tuple[str, str] = (PORT_D, PORT_C),
    inner_paths: tuple[str, str] = ("1", "2"),
    trace: list | None = None,
) -> PhotonState:
    """Run one decoder on a channel; unexpected frequencies raise from the WDM."""
    circuit = channel_decoder(channel, pm, out_ports[0], out_ports[1], inner_paths)
    return circuit.apply(s, trace)


def _decoder_schedules(pm_mode: PmMode, scheme: SchemeKind):
    if pm_mode.kind == "static":
        static = PMSchedule(default_phase=float(pm_mode.phase))
        return static, static
    if scheme is SchemeKind.TWO_CHANNEL:
        return PMSchedule(PM_CANCEL_REFLECTION), PMSchedule(PM_MATCH_REFLECTION)
    return TIME_GATED_SCHEDULE, TIME_GATED_SCHEDULE


def run_scheme(
    q: InputQubit,
    scheme: SchemeKind,
    m: NoiseModel,
    pm_mode: PmMode = PmMode(),
    encoder: Circuit | None = None,
    trace: list | None = None,
) -> PhotonState:
    """Full pipeline: prepare, encode, channel noise, decode.

    Returns the final state on the scheme's output ports (all at omega2):
    ports (d_a, c_a, d_b, c_b) in one time bin for ``two_channel``, ports
    (d, c) x time bins (0, 1) for ``single_channel``.
    """
    if encoder is not None and set(encoder.output_ports) != set(scheme.channels):
        raise ConfigError(
            f"encoder outputs {encoder.output_ports} do not match scheme channels {scheme.channels}"
        )
    sched_a, sched_b = _decoder_schedules(pm_mode, scheme)
    if scheme is SchemeKind.TWO_CHANNEL:
        enc = encoder or two_channel_encoder()
        s = prepare_input(q, OMEGA2, enc.input_path)
        s = enc.apply(s, trace)
        s = apply_noise(m, s, CHANNEL_A)
        s = apply_noise(m, s, CHANNEL_B)
        s = decode(s, CHANNEL_A, sched_a, out_ports=("d_a", "c_a"), inner_paths=("a1", "a2"), trace=trace)
        s = decode(s, CHANNEL_B, sched_b, out_ports=("d_b", "c_b"), inner_paths=("b1", "b2"), trace=trace)
        return s
    enc = encoder or single_channel_encoder()
    s = prepare_input(q, OMEGA2, enc.input_path)
    s = enc.apply(s, trace)
    s = apply_noise(m, s, SINGLE_CHANNEL)
    return decode(s, SINGLE_CHANNEL, sched_a, trace=trace)

"""Hand-derived closed forms for each stage of the two schemes.

Every function below writes out the stage state term by term from the
element conventions (PBS: no reflection phase; BS: reflected amplitude
times i; decoder PM: -pi/2 on the arm whose omega2 component was
reflected, +pi/2 on the other).  Nothing here calls the circuit
composition code; the verify command and the equivalence tests compare
the two routes against each other.

Symbols: (alpha, beta) is the input qubit; (delta, eta) is the image of
|H> under the channel unitary; for the single-channel scheme
(delta1, eta1) is the image of |H> and (delta2, eta2) the image of |V>.
"""

from __future__ import annotations

import numpy as np

from .circuits import CHANNEL_A, CHANNEL_B, OMEGA1, OMEGA2, PORT_C, PORT_D, SINGLE_CHANNEL
from .errors import ValidationError
from .states import ModeKet, PhotonState, Polarization

_H = Polarization.H
_V = Polarization.V
_R = float(1.0 / np.sqrt(2.0))


def two_channel_encoded(alpha: complex, beta: complex) -> PhotonState:
    """Encoder output: an H photon in a frequency superposition on a and b.

    alpha rides omega1, beta rides omega2; the reflected route into each
    port carries the factor i.
    """
    return PhotonState.from_amplitudes(
        {
            ModeKet(_H, OMEGA1, CHANNEL_A): alpha * _R,
            ModeKet(_H, OMEGA2, CHANNEL_A): 1j * beta * _R,
            ModeKet(_H, OMEGA1, CHANNEL_B): 1j * alpha * _R,
            ModeKet(_H, OMEGA2, CHANNEL_B): beta * _R,
        }
    )


def channel_a_noisy(alpha: complex, beta: complex, delta: complex, eta: complex) -> PhotonState:
    """Channel-a component after the noise unitary (sub-normalized, norm 1/2)."""
    return PhotonState.from_amplitudes(
        {
            ModeKet(_H, OMEGA1, CHANNEL_A): alpha * delta * _R,
            ModeKet(_V, OMEGA1, CHANNEL_A): alpha * eta * _R,
            ModeKet(_H, OMEGA2, CHANNEL_A): 1j * beta * delta * _R,
            ModeKet(_V, OMEGA2, CHANNEL_A): 1j * beta * eta * _R,
        }
    )


def channel_a_decoded(alpha: complex, beta: complex, delta: complex, eta: complex) -> PhotonState:
    """Decoder output for channel a: the input qubit on each port, weighted
    by the noise column; no residual phase."""
    return PhotonState.from_amplitudes(
        {
            ModeKet(_H, OMEGA2, PORT_D): delta * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_D): delta * beta * _R,
            ModeKet(_H, OMEGA2, PORT_C): eta * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_C): eta * beta * _R,
        }
    )


def channel_b_decoded(alpha: complex, beta: complex, delta: complex, eta: complex) -> PhotonState:
    """Decoder output for channel b: same conditional states with a global i."""
    return PhotonState.from_amplitudes(
        {
            ModeKet(_H, OMEGA2, PORT_D): 1j * delta * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_D): 1j * delta * beta * _R,
            ModeKet(_H, OMEGA2, PORT_C): 1j * eta * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_C): 1j * eta * beta * _R,
        }
    )


def single_channel_encoded(alpha: complex, beta: complex) -> PhotonState:
    """Interferometer output: delayed bin H-polarized, prompt bin V-polarized."""
    return PhotonState.from_amplitudes(
        {
            ModeKet(_H, OMEGA1, SINGLE_CHANNEL, 1): alpha * _R,
            ModeKet(_H, OMEGA2, SINGLE_CHANNEL, 1): 1j * beta * _R,
            ModeKet(_V, OMEGA1, SINGLE_CHANNEL, 0): 1j * alpha * _R,
            ModeKet(_V, OMEGA2, SINGLE_CHANNEL, 0): beta * _R,
        }
    )


def single_channel_decoded(
    alpha: complex,
    beta: complex,
    delta1: complex,
    eta1: complex,
    delta2: complex,
    eta2: complex,
) -> PhotonState:
    """Decoder output with the time-gated phase: the qubit on all four
    (port, bin) branches; the prompt bin carries a global i."""
    return PhotonState.from_amplitudes(
        {
            ModeKet(_H, OMEGA2, PORT_D, 1): delta1 * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_D, 1): delta1 * beta * _R,
            ModeKet(_H, OMEGA2, PORT_C, 1): eta1 * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_C, 1): eta1 * beta * _R,
            ModeKet(_H, OMEGA2, PORT_D, 0): 1j * delta2 * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_D, 0): 1j * delta2 * beta * _R,
            ModeKet(_H, OMEGA2, PORT_C, 0): 1j * eta2 * alpha * _R,
            ModeKet(_V, OMEGA2, PORT_C, 0): 1j * eta2 * beta * _R,
        }
    )


_POINTS = {
    "two-channel-encoded": (two_channel_encoded, ("alpha", "beta")),
    "channel-a-noisy": (channel_a_noisy, ("alpha", "beta", "delta", "eta")),
    "channel-a-decoded": (channel_a_decoded, ("alpha", "beta", "delta", "eta")),
    "channel-b-decoded": (channel_b_decoded, ("alpha", "beta", "delta", "eta")),
    "single-channel-encoded": (single_channel_encoded, ("alpha", "beta")),
    "single-channel-decoded": (
        single_channel_decoded,
        ("alpha", "beta", "delta1", "eta1", "delta2", "eta2"),
    ),
}

REFERENCE_POINTS = tuple(_POINTS)


def closed_form(point: str, **params: complex) -> PhotonState:
    """Evaluate a named reference stage with explicit symbol values."""
    if point not in _POINTS:
        raise ValidationError(f"unknown reference point {point!r} (expected one of {REFERENCE_POINTS})")
    fn, names = _POINTS[point]
    missing = [n for n in names if n not in params]
    if missing:
        raise ValidationError(f"reference point {point!r} is missing symbols {missing}")
    extra = [n for n in params if n not in names]
    if extra:
        raise ValidationError(f"reference point {point!r} got unknown symbols {extra}")
    return fn(**{n: complex(params[n]) for n in names})

"""BB84 harness: QBER over a noisy channel with and without protection.

Each bit trial draws from its own RNG substream
(``SeedSequence(seed, spawn_key=(1, bit))``), so trials are independent
and the report is reproducible bit for bit from (config, seed).  Draw
order per bit: sender basis, sender bit, receiver basis, then any
transmission randomness (branch selection, measurement outcome).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .analysis import decompose
from .circuits import INPUT_PATH, OMEGA2, PmMode, SchemeKind, run_scheme
from .errors import ConfigError, ValidationError
from .noise import NoiseSpec
from .states import InputQubit, PhotonState, prepare_input

_R = float(1.0 / np.sqrt(2.0))


class Basis(enum.Enum):
    X = "X"  # (|H> +- |V>)/sqrt2
    Y = "Y"  # (|H> +- i|V>)/sqrt2


# bit 0 is the "+" state, bit 1 the "-" state of each basis
_BASIS_STATES = {
    Basis.X: ((_R, _R), (_R, -_R)),
    Basis.Y: ((_R, 1j * _R), (_R, -1j * _R)),
}


def basis_states(b: Basis) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    return _BASIS_STATES[b]


def _measure_pair(h: complex, v: complex, b: Basis, rng: np.random.Generator) -> int:
    (h0, v0), (h1, v1) = _BASIS_STATES[b]
    o0 = abs(h0.conjugate() * h + v0.conjugate() * v) ** 2
    o1 = abs(h1.conjugate() * h + v1.conjugate() * v) ** 2
    p0 = o0 / (o0 + o1)
    return 0 if rng.random() < p0 else 1


def measure(s: PhotonState, b: Basis, rng: np.random.Generator) -> int:
    """Projective readout of a polarization state in basis ``b``.

    The state must live on a single (path, time bin, frequency); condition
    on a branch first if it does not.
    """
    keys = s._keys
    if keys.shape[0] == 0:
        raise ValidationError("cannot measure an empty state")
    cells = keys >> np.uint64(1)  # strip the polarization bit
    if not bool(np.all(cells == cells[0])):
        raise ValidationError(
            "measurement requires a state on a single (path, timebin, frequency); "
            "condition on a branch first"
        )
    h = v = 0j
    for k, a in zip(keys.tolist(), s._amps.tolist()):
        if k & 1:
            v = a
        else:
            h = a
    return _measure_pair(h, v, b, rng)


@dataclass(frozen=True)
class QkdReport:
    raw_bits: int
    sifted_bits: int
    errors: int
    qber: float
    protected: bool
    scheme: str
    noise: dict
    seed: int
    per_basis: dict  # basis -> {"sifted": n, "errors": n}

    def to_dict(self) -> dict:
        return {
            "raw_bits": self.raw_bits,
            "sifted_bits": self.sifted_bits,
            "errors": self.errors,
            "qber": self.qber,
            "protected": self.protected,
            "scheme": self.scheme,
            "noise": self.noise,
            "seed": self.seed,
            "per_basis": self.per_basis,
        }


QKD_CSV_FIELDS = (
    "protected",
    "scheme",
    "noise_kind",
    "seed",
    "raw_bits",
    "sifted_bits",
    "errors",
    "qber",
    "sifted_x",
    "errors_x",
    "sifted_y",
    "errors_y",
)


def qkd_csv_rows(r: QkdReport) -> list[list]:
    return [
        [
            int(r.protected),
            r.scheme,
            r.noise.get("kind", ""),
            r.seed,
            r.raw_bits,
            r.sifted_bits,
            r.errors,
            r.qber,
            r.per_basis["X"]["sifted"],
            r.per_basis["X"]["errors"],
            r.per_basis["Y"]["sifted"],
            r.per_basis["Y"]["errors"],
        ]
    ]


def _bit_rng(seed: int, bit: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1, bit))))


def bb84_run(
    n_bits: int,
    noise: NoiseSpec,
    protected: bool,
    scheme: SchemeKind = SchemeKind.TWO_CHANNEL,
    seed: int = 0,
) -> QkdReport:
    """Run BB84 over the noisy channel and count sifted-key errors.

    Protected bits travel through the full encode/noise/decode pipeline;
    the receiver's detector (port, time bin) is sampled from the branch
    probabilities and the conditional state is measured.  Unprotected bits
    have the channel unitary applied to the bare polarization qubit.
    """
    if n_bits < 1:
        raise ConfigError(f"qkd needs n_bits >= 1, got {n_bits}")
    bases = (Basis.X, Basis.Y)
    sifted = errors = 0
    per_basis = {b.value: {"sifted": 0, "errors": 0} for b in bases}
    for bit_idx in range(n_bits):
        rng = _bit_rng(seed, bit_idx)
        basis_s = bases[int(rng.integers(2))]
        bit = int(rng.integers(2))
        basis_r = bases[int(rng.integers(2))]
        h, v = basis_states(basis_s)[bit]
        if protected:
            q = InputQubit(h, v)
            model = noise.model_for_trial(bit_idx, scheme.channels, scheme.timebins)
            out = run_scheme(q, scheme, model, PmMode())
            branches = decompose(out, prepare_input(q, OMEGA2, INPUT_PATH))
            total = sum(b.probability for b in branches)
            u = rng.random() * total
            acc = 0.0
            chosen = branches[-1]
            for b in branches:
                acc += b.probability
                if u < acc:
                    chosen = b
                    break
            bit_r = measure(chosen.conditional_state, basis_r, rng)
        else:
            model = noise.model_for_trial(bit_idx, ("ch",), (0,))
            m = model.unitary_for("ch", 0).u
            h, v = m[0, 0] * h + m[0, 1] * v, m[1, 0] * h + m[1, 1] * v
            bit_r = _measure_pair(h, v, basis_r, rng)
        if basis_s is basis_r:
            sifted += 1
            per_basis[basis_s.value]["sifted"] += 1
            if bit_r != bit:
                errors += 1
                per_basis[basis_s.value]["errors"] += 1
    return QkdReport(
        raw_bits=n_bits,
        sifted_bits=sifted,
        errors=errors,
        qber=errors / sifted if sifted else 0.0,
        protected=protected,
        scheme=scheme.value,
        noise=noise.to_dict(),
        seed=seed,
        per_basis=per_basis,
    )

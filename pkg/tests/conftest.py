import numpy as np
import pytest

from freqguard import InputQubit, ModeKet, PhotonState, Polarization

TEST_FREQS = ("omega1", "omega2")
TEST_PATHS = ("t_p", "t_q", "t_r")


def random_qubit(rng: np.random.Generator) -> InputQubit:
    re_a, im_a, re_b, im_b = rng.standard_normal(4)
    a = complex(re_a, im_a)
    b = complex(re_b, im_b)
    n = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return InputQubit(a / n, b / n)


def random_state(
    rng: np.random.Generator,
    paths=TEST_PATHS,
    freqs=TEST_FREQS,
    bins=(0, 1),
    n_terms: int = 6,
) -> PhotonState:
    """Normalized state with amplitudes on randomly chosen distinct kets."""
    kets = [
        ModeKet(pol, f, p, b)
        for pol in (Polarization.H, Polarization.V)
        for f in freqs
        for p in paths
        for b in bins
    ]
    chosen = rng.choice(len(kets), size=min(n_terms, len(kets)), replace=False)
    amps = rng.standard_normal(len(chosen)) + 1j * rng.standard_normal(len(chosen))
    amps /= np.linalg.norm(amps)
    return PhotonState.from_amplitudes({kets[i]: complex(a) for i, a in zip(chosen, amps)})


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240901)

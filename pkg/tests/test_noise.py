import math

import numpy as np
import pytest

from freqguard import (
    ConfigError,
    ModeKet,
    NoiseModel,
    NoiseSpec,
    PhotonState,
    Polarization,
    PolarizationUnitary,
    ValidationError,
    apply_noise,
    complete_from_column,
    sample_haar_su2,
)
from freqguard.reference import channel_a_noisy

from conftest import random_state

H, V = Polarization.H, Polarization.V
W1, W2 = "omega1", "omega2"


class TestCompleteFromColumn:
    def test_identity_column(self):
        u = complete_from_column(1, 0)
        assert np.array_equal(u.u, np.eye(2))

    def test_bit_flip_completion(self):
        # the (-eta*, delta*) rule forces the second column to (-1, 0)
        u = complete_from_column(0, 1)
        assert u.u[0, 1] == -1
        assert u.u[1, 1] == 0
        assert np.abs(u.u.conj().T @ u.u - np.eye(2)).max() < 1e-15

    def test_three_four_five_column(self):
        u = complete_from_column(3 / 5, 4 / 5)
        assert np.abs(u.u.conj().T @ u.u - np.eye(2)).max() < 1e-15

    def test_first_column_reproduced_exactly(self):
        delta, eta = complex(0.6, 0.0), complex(0.0, 0.8)
        u = complete_from_column(delta, eta)
        assert u.u[0, 0] == delta and u.u[1, 0] == eta

    def test_determinant_one(self, rng):
        for _ in range(50):
            z = rng.standard_normal(4)
            d = complex(z[0], z[1])
            e = complex(z[2], z[3])
            n = math.sqrt(abs(d) ** 2 + abs(e) ** 2)
            u = complete_from_column(d / n, e / n)
            assert np.linalg.det(u.u) == pytest.approx(1.0, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValidationError):
            complete_from_column(1, 1)


class TestHaarSampling:
    def test_always_unitary(self):
        for i in range(100):
            u = sample_haar_su2(7, i)
            assert np.abs(u.u.conj().T @ u.u - np.eye(2)).max() < 1e-12

    def test_deterministic_bit_identical(self):
        a = sample_haar_su2(123, 456)
        b = sample_haar_su2(123, 456)
        assert np.array_equal(a.u, b.u)
        assert a.u.tobytes() == b.u.tobytes()

    def test_distinct_indices_differ(self):
        assert sample_haar_su2(1, 0) != sample_haar_su2(1, 1)

    def test_haar_average_of_entry_magnitude(self):
        # Haar oracle: the average of |u00|^2 over SU(2) is exactly 1/2
        mean = np.mean([abs(sample_haar_su2(99, i).u[0, 0]) ** 2 for i in range(10000)])
        assert mean == pytest.approx(0.5, abs=0.02)


class TestApplyNoise:
    def test_channel_column_action_matches_closed_form(self):
        a, b = 0.6, 0.8
        delta, eta = complex(3 / 5, 0), complex(0, 4 / 5)
        r = 1 / math.sqrt(2)
        s = PhotonState.from_amplitudes(
            {ModeKet(H, W1, "a", 0): a * r, ModeKet(H, W2, "a", 0): 1j * b * r}
        )
        m = NoiseModel.per_channel({"a": complete_from_column(delta, eta)})
        out = apply_noise(m, s, "a")
        ref = channel_a_noisy(a, b, delta, eta)
        for ket, amp in ref.items():
            assert out.amplitude(ket) == pytest.approx(amp, abs=1e-13)

    def test_identity_noise_is_noop(self, rng):
        s = random_state(rng)
        m = NoiseModel.uniform(PolarizationUnitary.identity())
        assert apply_noise(m, s, "t_p") == s

    def test_per_timebin_uses_distinct_matrices(self):
        u0 = PolarizationUnitary.identity()
        u1 = complete_from_column(0, 1)  # bit flip on bin 1 only
        m = NoiseModel.per_timebin({("t_p", 0): u0, ("t_p", 1): u1})
        s = PhotonState.from_amplitudes(
            {ModeKet(H, W2, "t_p", 0): 0.6, ModeKet(H, W2, "t_p", 1): 0.8}
        )
        out = apply_noise(m, s, "t_p")
        assert out.amplitude(ModeKet(H, W2, "t_p", 0)) == 0.6
        assert out.amplitude(ModeKet(V, W2, "t_p", 1)) == 0.8

    def test_norm_preserved_for_random_models(self, rng):
        for i in range(1000):
            s = random_state(rng)
            m = NoiseModel.uniform(sample_haar_su2(11, i))
            out = apply_noise(m, s, "t_p")
            assert out.norm_sq() == pytest.approx(s.norm_sq(), abs=1e-12)

    def test_never_changes_freq_path_or_bin(self, rng):
        for i in range(100):
            s = random_state(rng)
            m = NoiseModel.uniform(sample_haar_su2(13, i))
            out = apply_noise(m, s, "t_q")
            cells_in = {(k.freq, k.path, k.timebin) for k, _ in s.items()}
            cells_out = {(k.freq, k.path, k.timebin) for k, _ in out.items()}
            assert cells_out <= cells_in

    def test_unresolved_channel_is_config_error(self):
        m = NoiseModel.per_channel({"t_p": PolarizationUnitary.identity()})
        s = PhotonState.from_amplitudes({ModeKet(H, W2, "t_q", 0): 1.0})
        with pytest.raises(ConfigError):
            apply_noise(m, s, "t_q")


class TestNoiseSpec:
    def test_fixed_kinds_ignore_trial_index(self):
        spec = NoiseSpec("rotation", theta=0.4, seed=5)
        m0 = spec.model_for_trial(0, ("a", "b"))
        m1 = spec.model_for_trial(1, ("a", "b"))
        assert m0.unitary_for("a", 0) == m1.unitary_for("b", 0)

    def test_haar_per_channel_draws_independent_units(self):
        spec = NoiseSpec("haar", placement="per_channel", seed=5)
        m = spec.model_for_trial(0, ("a", "b"))
        assert m.unitary_for("a", 0) != m.unitary_for("b", 0)

    def test_haar_trials_use_disjoint_stream_slots(self):
        spec = NoiseSpec("haar", placement="per_channel", seed=5)
        m0 = spec.model_for_trial(0, ("a", "b"))
        m1 = spec.model_for_trial(1, ("a", "b"))
        assert m0.unitary_for("a", 0) != m1.unitary_for("a", 0)
        # slot addressing is by (trial, slot), independent of evaluation order
        again = spec.model_for_trial(1, ("a", "b"))
        assert again.unitary_for("a", 0) == m1.unitary_for("a", 0)

    def test_rotation_requires_theta(self):
        with pytest.raises(ValidationError):
            NoiseSpec("rotation")

    def test_column_requires_normalized_pair(self):
        with pytest.raises(ValidationError):
            NoiseSpec("column", delta=1.0, eta=1.0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            NoiseSpec("depolarizing")

import json
import math

import numpy as np
import pytest

from freqguard import (
    EmptyStateError,
    InputQubit,
    ModeKet,
    PhotonState,
    Polarization,
    ValidationError,
    condition,
    fidelity,
    inner_product,
    prepare_input,
    state_csv_rows,
    state_records,
    state_to_json,
)
from freqguard.reference import channel_a_decoded

from conftest import random_state

H, V = Polarization.H, Polarization.V
W1, W2 = "omega1", "omega2"


def ket(pol, freq=W2, path="t_p", timebin=0):
    return ModeKet(pol, freq, path, timebin)


class TestPrepareInput:
    def test_basis_state_h(self):
        s = prepare_input(InputQubit(1, 0), W2, "in")
        assert s.amplitude(ModeKet(H, W2, "in", 0)) == 1
        assert len(s) == 1

    def test_basis_state_v(self):
        s = prepare_input(InputQubit(0, 1), W2, "in")
        assert s.amplitude(ModeKet(V, W2, "in", 0)) == 1
        assert len(s) == 1

    def test_equal_superposition(self):
        r = 1 / math.sqrt(2)
        s = prepare_input(InputQubit(r, r), W2, "in")
        assert s.amplitude(ModeKet(H, W2, "in", 0)) == pytest.approx(0.7071, abs=1e-4)
        assert s.amplitude(ModeKet(V, W2, "in", 0)) == pytest.approx(0.7071, abs=1e-4)
        assert s.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            InputQubit(1, 1)


class TestInnerProduct:
    def test_self_overlap_is_norm(self, rng):
        s = random_state(rng)
        assert inner_product(s, s) == pytest.approx(s.norm_sq(), abs=1e-12)
        assert inner_product(s, s).imag == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal_polarizations(self):
        s1 = PhotonState.from_amplitudes({ket(H): 1.0})
        s2 = PhotonState.from_amplitudes({ket(V): 1.0})
        assert inner_product(s1, s2) == 0

    def test_orthogonal_superpositions(self):
        r = 1 / math.sqrt(2)
        plus = PhotonState.from_amplitudes({ket(H): r, ket(V): r})
        minus = PhotonState.from_amplitudes({ket(H): r, ket(V): -r})
        assert abs(inner_product(plus, minus)) < 1e-15

    def test_conjugate_linear_in_first_argument(self, rng):
        s1 = random_state(rng)
        s2 = random_state(rng)
        phased = s1.scaled(np.exp(0.7j))
        lhs = inner_product(phased, s2)
        rhs = np.exp(-0.7j) * inner_product(s1, s2)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestFidelity:
    def test_identical_states(self, rng):
        s = random_state(rng)
        assert fidelity(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_global_phase_factor_i(self, rng):
        s = random_state(rng)
        assert fidelity(s.scaled(1j), s) == pytest.approx(1.0, abs=1e-12)

    def test_sign_flip_oracle(self):
        # oracle: |<a|H>+<b|V> overlap|^2 = (|a|^2 - |b|^2)^2 for the flipped state
        a, b = math.sqrt(0.8), math.sqrt(0.2)
        ideal = PhotonState.from_amplitudes({ket(H): a, ket(V): b})
        flipped = PhotonState.from_amplitudes({ket(H): a, ket(V): -b})
        oracle = abs(a * a - b * b) ** 2
        assert oracle == pytest.approx(0.36, abs=1e-12)
        assert fidelity(flipped, ideal) == pytest.approx(oracle, abs=1e-12)

    def test_phase_invariance_sweep(self, rng):
        s = random_state(rng)
        ideal = random_state(rng)
        base = fidelity(s, ideal)
        for theta in np.linspace(0, 2 * math.pi, 17):
            assert fidelity(s.scaled(np.exp(1j * theta)), ideal) == pytest.approx(base, abs=1e-12)
            assert fidelity(ideal, s) == pytest.approx(base, abs=1e-12)  # symmetric

    def test_zero_norm_rejected(self, rng):
        s = random_state(rng)
        with pytest.raises(EmptyStateError):
            fidelity(PhotonState.empty(), s)
        with pytest.raises(EmptyStateError):
            fidelity(s, PhotonState.empty())


class TestCondition:
    def test_keep_all(self, rng):
        s = random_state(rng)
        sub, prob = condition(s, lambda k: True)
        assert prob == pytest.approx(1.0, abs=1e-12)
        assert sub == s

    def test_keep_none_gives_empty_marker(self, rng):
        s = random_state(rng)
        sub, prob = condition(s, lambda k: False)
        assert prob == 0.0
        assert sub.is_empty

    def test_decoded_port_probability(self):
        # substituting delta=3/5 into the decoded closed form and squaring:
        # the d-port carries |delta|^2 of the (norm 1/2) channel state
        s = channel_a_decoded(alpha=0.6, beta=0.8, delta=3 / 5, eta=4 / 5)
        sub, prob = condition(s, lambda k: k.path == "d")
        assert prob == pytest.approx(0.36, abs=1e-12)
        assert not sub.is_empty

    def test_partition_probabilities_sum_to_one(self, rng):
        for _ in range(20):
            s = random_state(rng)
            total = 0.0
            for path in ("t_p", "t_q", "t_r"):
                _, p = condition(s, lambda k, path=path: k.path == path)
                total += p
            assert total == pytest.approx(1.0, abs=1e-12)


class TestStateInvariants:
    def test_norm_window_enforced(self):
        with pytest.raises(ValidationError):
            PhotonState.from_amplitudes({ket(H): 1.0, ket(V): 0.5})
        with pytest.raises(ValidationError):
            PhotonState.from_amplitudes({})

    def test_subnormalized_allowed(self):
        s = PhotonState.from_amplitudes({ket(H): 0.5})
        assert s.norm_sq() == pytest.approx(0.25, abs=1e-15)

    def test_pruning_threshold(self):
        s = PhotonState.from_amplitudes({ket(H): 1.0, ket(V): 1e-16})
        assert len(s) == 1

    def test_items_follow_total_order(self):
        s = PhotonState.from_amplitudes(
            {
                ket(V, W2, "t_q", 1): 0.5,
                ket(H, W1, "t_p", 1): 0.5,
                ket(V, W1, "t_p", 0): 0.5,
                ket(H, W2, "t_p", 1): 0.5,
            }
        )
        keys = [(k.path, k.timebin, k.freq, k.pol.value) for k, _ in s.items()]
        assert keys == sorted(keys)

    def test_immutable_arrays(self):
        s = PhotonState.from_amplitudes({ket(H): 1.0})
        with pytest.raises(ValueError):
            s._amps[0] = 0


class TestSerialization:
    def test_equal_maps_serialize_byte_identically(self):
        # same amplitude map built in two different insertion orders
        m1 = {ket(H, W1, "t_p"): 0.6, ket(V, W2, "t_q", 1): 0.8}
        m2 = {ket(V, W2, "t_q", 1): 0.8, ket(H, W1, "t_p"): 0.6}
        s1 = PhotonState.from_amplitudes(m1)
        s2 = PhotonState.from_amplitudes(m2)
        assert s1 == s2
        assert state_to_json(s1) == state_to_json(s2)
        assert state_csv_rows(s1) == state_csv_rows(s2)

    def test_record_fields(self):
        s = PhotonState.from_amplitudes({ket(H, W2, "t_p", 3): 0.5j})
        (rec,) = state_records(s)
        assert rec == {"pol": "H", "freq": W2, "path": "t_p", "timebin": 3, "re": 0.0, "im": 0.5}
        json.loads(state_to_json(s))  # valid JSON

    def test_named_input_states(self):
        for name in ("H", "V", "+x", "-x", "+y", "-y"):
            q = InputQubit.named(name)
            assert abs(q.alpha) ** 2 + abs(q.beta) ** 2 == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(ValidationError):
            InputQubit.named("diag")

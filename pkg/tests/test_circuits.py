import json
import math

import numpy as np
import pytest

from freqguard import (
    CHANNEL_A,
    CHANNEL_B,
    INPUT_PATH,
    OMEGA1,
    OMEGA2,
    PM_CANCEL_REFLECTION,
    PM_MATCH_REFLECTION,
    SINGLE_CHANNEL,
    Circuit,
    InputQubit,
    ModeKet,
    NoiseModel,
    PhotonState,
    PMSchedule,
    PmMode,
    Polarization,
    SchemeKind,
    ValidationError,
    closed_form,
    condition,
    decode,
    decompose,
    encode_single_channel,
    encode_two_channel,
    fidelity,
    max_amplitude_deviation,
    prepare_input,
    run_scheme,
    sample_haar_su2,
    single_channel_encoder,
    two_channel_encoder,
)
from freqguard.noise import apply_noise, complete_from_column
from freqguard.reference import (
    channel_a_decoded,
    channel_a_noisy,
    channel_b_decoded,
    single_channel_decoded,
    single_channel_encoded,
    two_channel_encoded,
)

from conftest import random_qubit

H, V = Polarization.H, Polarization.V
R = 1 / math.sqrt(2)


def prepared(alpha, beta):
    return prepare_input(InputQubit(alpha, beta), OMEGA2, INPUT_PATH)


class TestTwoChannelEncoder:
    def test_h_input(self):
        out = encode_two_channel(prepared(1, 0))
        assert out.amplitude(ModeKet(H, OMEGA1, CHANNEL_A, 0)) == pytest.approx(R, abs=1e-15)
        assert out.amplitude(ModeKet(H, OMEGA1, CHANNEL_B, 0)) == pytest.approx(1j * R, abs=1e-15)
        assert len(out) == 2

    def test_balanced_input_amplitudes(self):
        out = encode_two_channel(prepared(R, R))
        assert out.amplitude(ModeKet(H, OMEGA1, CHANNEL_A, 0)) == pytest.approx(0.5, abs=1e-15)
        assert out.amplitude(ModeKet(H, OMEGA2, CHANNEL_A, 0)) == pytest.approx(0.5j, abs=1e-15)
        assert out.amplitude(ModeKet(H, OMEGA1, CHANNEL_B, 0)) == pytest.approx(0.5j, abs=1e-15)
        assert out.amplitude(ModeKet(H, OMEGA2, CHANNEL_B, 0)) == pytest.approx(0.5, abs=1e-15)

    def test_output_normalized(self, rng):
        for _ in range(10):
            q = random_qubit(rng)
            out = encode_two_channel(prepare_input(q, OMEGA2, INPUT_PATH))
            assert out.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_wrong_frequency_rejected(self):
        bad = PhotonState.from_amplitudes({ModeKet(H, OMEGA1, INPUT_PATH, 0): 1.0})
        with pytest.raises(ValidationError):
            encode_two_channel(bad)


class TestSingleChannelEncoder:
    def test_h_input(self):
        out = encode_single_channel(prepared(1, 0))
        assert out.amplitude(ModeKet(H, OMEGA1, SINGLE_CHANNEL, 1)) == pytest.approx(R, abs=1e-15)
        assert out.amplitude(ModeKet(V, OMEGA1, SINGLE_CHANNEL, 0)) == pytest.approx(1j * R, abs=1e-15)
        assert len(out) == 2

    def test_bin_polarization_structure(self, rng):
        q = random_qubit(rng)
        out = encode_single_channel(prepare_input(q, OMEGA2, INPUT_PATH))
        for ket, _ in out.items():
            assert ket.pol is (H if ket.timebin == 1 else V)

    def test_output_normalized(self, rng):
        q = random_qubit(rng)
        out = encode_single_channel(prepare_input(q, OMEGA2, INPUT_PATH))
        assert out.norm_sq() == pytest.approx(1.0, abs=1e-12)


class TestDecode:
    def test_identity_noise_all_on_port_d(self):
        a, b = 0.6, 0.8
        state_a, _ = condition(encode_two_channel(prepared(a, b)), lambda k: k.path == CHANNEL_A)
        out = decode(state_a, CHANNEL_A, PMSchedule(PM_CANCEL_REFLECTION))
        ideal = PhotonState.from_amplitudes({ModeKet(H, OMEGA2, "d", 0): a, ModeKet(V, OMEGA2, "d", 0): b})
        assert {k.path for k, _ in out.items()} == {"d"}
        assert fidelity(out, ideal) == pytest.approx(1.0, abs=1e-12)

    def test_generic_noise_port_d_probability(self, rng):
        a, b = 0.6, 0.8
        u = sample_haar_su2(3, 0)
        delta = complex(u.u[0, 0])
        state_a, _ = condition(encode_two_channel(prepared(a, b)), lambda k: k.path == CHANNEL_A)
        noisy = apply_noise(NoiseModel.per_channel({CHANNEL_A: u}), state_a, CHANNEL_A)
        out = decode(noisy, CHANNEL_A, PMSchedule(PM_CANCEL_REFLECTION))
        sub_d, prob_d = condition(out, lambda k: k.path == "d")
        # conditioned on the channel-a half, the d port carries |delta|^2
        assert prob_d == pytest.approx(abs(delta) ** 2, abs=1e-12)
        ideal = PhotonState.from_amplitudes({ModeKet(H, OMEGA2, "d", 0): a, ModeKet(V, OMEGA2, "d", 0): b})
        assert fidelity(sub_d, ideal) == pytest.approx(1.0, abs=1e-12)

    def test_channel_b_carries_global_i(self):
        a, b = 0.6, 0.8
        state_b, _ = condition(encode_two_channel(prepared(a, b)), lambda k: k.path == CHANNEL_B)
        noisy = apply_noise(
            NoiseModel.per_channel({CHANNEL_B: complete_from_column(3 / 5, 4 / 5)}), state_b, CHANNEL_B
        )
        out = decode(noisy, CHANNEL_B, PMSchedule(PM_MATCH_REFLECTION))
        # the factor i is visible in the raw amplitudes
        amp = out.amplitude(ModeKet(H, OMEGA2, "d", 0))
        assert amp == pytest.approx(1j * (3 / 5) * a * R, abs=1e-13)
        # but measures as the original state on both ports
        for port in ("c", "d"):
            sub, _ = condition(out, lambda k, port=port: k.path == port)
            ideal = PhotonState.from_amplitudes(
                {ModeKet(H, OMEGA2, port, 0): a, ModeKet(V, OMEGA2, port, 0): b}
            )
            assert fidelity(sub, ideal) == pytest.approx(1.0, abs=1e-12)


class TestClosedFormEquivalence:
    """The anti-hand-coding property: composed circuits reproduce the
    hand-derived stage states for 100 random parameter draws."""

    def test_all_stages_match(self, rng):
        worst = {k: 0.0 for k in ("enc2", "noisy", "dec_a", "dec_b", "enc1", "dec1")}
        for i in range(100):
            q = random_qubit(rng)
            u_a = sample_haar_su2(17, 2 * i)
            u_b = sample_haar_su2(17, 2 * i + 1)
            da, ea = complex(u_a.u[0, 0]), complex(u_a.u[1, 0])
            db, eb = complex(u_b.u[0, 0]), complex(u_b.u[1, 0])

            enc = encode_two_channel(prepare_input(q, OMEGA2, INPUT_PATH))
            worst["enc2"] = max(
                worst["enc2"], max_amplitude_deviation(enc, two_channel_encoded(q.alpha, q.beta))
            )
            part_a, _ = condition(enc, lambda k: k.path == CHANNEL_A)
            noisy = apply_noise(NoiseModel.per_channel({CHANNEL_A: u_a}), part_a, CHANNEL_A)
            worst["noisy"] = max(
                worst["noisy"],
                max_amplitude_deviation(noisy, channel_a_noisy(q.alpha, q.beta, da, ea)),
            )
            dec_a = decode(noisy, CHANNEL_A, PMSchedule(PM_CANCEL_REFLECTION))
            worst["dec_a"] = max(
                worst["dec_a"],
                max_amplitude_deviation(dec_a, channel_a_decoded(q.alpha, q.beta, da, ea)),
            )
            part_b, _ = condition(enc, lambda k: k.path == CHANNEL_B)
            noisy_b = apply_noise(NoiseModel.per_channel({CHANNEL_B: u_b}), part_b, CHANNEL_B)
            dec_b = decode(noisy_b, CHANNEL_B, PMSchedule(PM_MATCH_REFLECTION))
            worst["dec_b"] = max(
                worst["dec_b"],
                max_amplitude_deviation(dec_b, channel_b_decoded(q.alpha, q.beta, db, eb)),
            )

            enc1 = encode_single_channel(prepare_input(q, OMEGA2, INPUT_PATH))
            worst["enc1"] = max(
                worst["enc1"],
                max_amplitude_deviation(enc1, single_channel_encoded(q.alpha, q.beta)),
            )
            m = NoiseModel.per_timebin({(SINGLE_CHANNEL, 0): u_b, (SINGLE_CHANNEL, 1): u_a})
            out1 = run_scheme(q, SchemeKind.SINGLE_CHANNEL, m)
            ref1 = single_channel_decoded(
                q.alpha,
                q.beta,
                complex(u_a.u[0, 0]),
                complex(u_a.u[1, 0]),
                complex(u_b.u[0, 1]),
                complex(u_b.u[1, 1]),
            )
            worst["dec1"] = max(worst["dec1"], max_amplitude_deviation(out1, ref1))
        assert max(worst.values()) < 1e-12, worst

    def test_closed_form_dispatch_validates_symbols(self):
        with pytest.raises(ValidationError):
            closed_form("two-channel-encoded", alpha=1.0)
        with pytest.raises(ValidationError):
            closed_form("two-channel-encoded", alpha=1.0, beta=0.0, gamma=1.0)
        with pytest.raises(ValidationError):
            closed_form("no-such-stage", alpha=1.0)

    def test_closed_form_matches_direct_functions(self):
        assert closed_form("channel-a-decoded", alpha=0.6, beta=0.8, delta=1.0, eta=0.0) == channel_a_decoded(
            0.6, 0.8, 1.0, 0.0
        )


class TestRunScheme:
    def test_two_channel_identity_noise(self):
        q = InputQubit.named("+y")
        out = run_scheme(q, SchemeKind.TWO_CHANNEL, NoiseModel.uniform(complete_from_column(1, 0)))
        branches = decompose(out, prepare_input(q, OMEGA2, INPUT_PATH))
        assert branches
        for b in branches:
            assert b.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_two_channel_independent_unitaries(self, rng):
        for i in range(100):
            q = random_qubit(rng)
            m = NoiseModel.per_channel(
                {CHANNEL_A: sample_haar_su2(23, 2 * i), CHANNEL_B: sample_haar_su2(23, 2 * i + 1)}
            )
            out = run_scheme(q, SchemeKind.TWO_CHANNEL, m)
            branches = decompose(out, prepare_input(q, OMEGA2, INPUT_PATH))
            assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-10)
            for b in branches:
                assert b.fidelity >= 1.0 - 1e-10
                assert b.timebin == 0
                for ket, _ in b.conditional_state.items():
                    assert ket.freq == OMEGA2

    def test_single_channel_time_gated_per_bin_noise(self, rng):
        for i in range(100):
            q = random_qubit(rng)
            m = NoiseModel.per_timebin(
                {
                    (SINGLE_CHANNEL, 0): sample_haar_su2(29, 2 * i),
                    (SINGLE_CHANNEL, 1): sample_haar_su2(29, 2 * i + 1),
                }
            )
            out = run_scheme(q, SchemeKind.SINGLE_CHANNEL, m)
            branches = decompose(out, prepare_input(q, OMEGA2, INPUT_PATH))
            assert len(branches) == 4
            assert {(b.port, b.timebin) for b in branches} == {
                ("c", 0),
                ("c", 1),
                ("d", 0),
                ("d", 1),
            }
            for b in branches:
                assert b.fidelity >= 1.0 - 1e-10

    def test_static_pm_degrades_prompt_bin(self, rng):
        a, b = math.sqrt(0.8), math.sqrt(0.2)
        q = InputQubit(a, b)
        expected_gap = (0.8 - 0.2) ** 2  # trace oracle: (|alpha|^2-|beta|^2)^2
        for i in range(20):
            m = NoiseModel.uniform(sample_haar_su2(31, i))
            out = run_scheme(q, SchemeKind.SINGLE_CHANNEL, m, PmMode("static", PM_CANCEL_REFLECTION))
            for br in decompose(out, prepare_input(q, OMEGA2, INPUT_PATH)):
                expected = 1.0 if br.timebin == 1 else expected_gap
                assert br.fidelity == pytest.approx(expected, abs=1e-10)

    def test_ensemble_of_pure_states_each_preserved(self, rng):
        # linearity: fidelity 1 on every pure component of a mixture
        m = NoiseModel.per_channel(
            {CHANNEL_A: sample_haar_su2(37, 0), CHANNEL_B: sample_haar_su2(37, 1)}
        )
        m1 = NoiseModel.per_timebin(
            {(SINGLE_CHANNEL, 0): sample_haar_su2(37, 2), (SINGLE_CHANNEL, 1): sample_haar_su2(37, 3)}
        )
        for _ in range(10):
            q = random_qubit(rng)
            ideal = prepare_input(q, OMEGA2, INPUT_PATH)
            for scheme, model in ((SchemeKind.TWO_CHANNEL, m), (SchemeKind.SINGLE_CHANNEL, m1)):
                for br in decompose(run_scheme(q, scheme, model), ideal):
                    assert br.fidelity >= 1.0 - 1e-10

    def test_pm_mode_validation(self):
        with pytest.raises(ValidationError):
            PmMode("static")
        with pytest.raises(ValidationError):
            PmMode("time_gated", 0.3)
        with pytest.raises(ValidationError):
            PmMode("gated")


class TestCircuitSerialization:
    @pytest.mark.parametrize("builder", [two_channel_encoder, single_channel_encoder])
    def test_round_trip(self, builder):
        c = builder()
        clone = Circuit.from_dict(json.loads(json.dumps(c.to_dict())))
        assert clone == c

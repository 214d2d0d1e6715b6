"""Command-line front end: transmit | montecarlo | qkd | verify.

All commands are deterministic functions of (config file bytes, flags);
reports embed the resolved configuration so results are re-derivable from
their own output files.  Exit codes: 0 success, 1 validation/config
error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    MONTECARLO_CSV_FIELDS,
    RUN_CSV_FIELDS,
    decompose,
    make_run_report,
    monte_carlo,
    montecarlo_csv_rows,
    run_report_csv_rows,
)
from .circuits import (
    INPUT_PATH,
    OMEGA1,
    OMEGA2,
    PM_CANCEL_REFLECTION,
    PM_MATCH_REFLECTION,
    CHANNEL_A,
    CHANNEL_B,
    SINGLE_CHANNEL,
    PmMode,
    SchemeKind,
    decode,
    encode_single_channel,
    encode_two_channel,
    run_scheme,
)
from .config import ExperimentConfig
from .elements import BS, FS, HWP, PBS, PM, WDM, Delay, PMSchedule, element_unitary_defect
from .errors import FreqguardError
from .noise import NoiseModel, apply_noise, sample_haar_su2
from .qkd import QKD_CSV_FIELDS, bb84_run, qkd_csv_rows
from .reference import (
    channel_a_decoded,
    channel_a_noisy,
    channel_b_decoded,
    single_channel_decoded,
    single_channel_encoded,
    two_channel_encoded,
)
from .states import (
    InputQubit,
    ModeKet,
    PhotonState,
    Polarization,
    condition,
    max_amplitude_deviation,
    prepare_input,
)

VERIFY_SEED = 20240901
CLOSED_FORM_TOL = 1e-12
UNITARITY_TOL = 1e-12
GAP_TOL = 1e-10


def _emit(payload: dict, csv_fields, csv_rows, output) -> None:
    if output.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_fields)
        writer.writerows(csv_rows)
        text = buf.getvalue()
    if output.path:
        Path(output.path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_transmit(config: ExperimentConfig) -> int:
    model = config.noise.model_for_trial(0, config.scheme.channels, config.scheme.timebins)
    state = run_scheme(
        config.input, config.scheme, model, config.pm_mode, encoder=config.resolve_encoder()
    )
    report = make_run_report(
        config.input, config.scheme, config.noise.to_dict(), config.pm_mode, state, seed=config.seed
    )
    payload = {"command": "transmit", "config": config.to_dict(), "report": report.to_dict()}
    _emit(payload, RUN_CSV_FIELDS, run_report_csv_rows(report), config.output)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if config.output.path:
        print(
            f"transmit: {len(report.branches)} branch(es), min_fidelity={report.min_fidelity:.12g}, "
            f"success={report.success_probability:.12g} -> {config.output.path}"
        )
    return 0


def cmd_montecarlo(config: ExperimentConfig) -> int:
    stats = monte_carlo(config)
    payload = {"command": "montecarlo", "config": config.to_dict(), "stats": stats.to_dict()}
    _emit(payload, MONTECARLO_CSV_FIELDS, montecarlo_csv_rows(stats), config.output)
    if config.output.path:
        print(
            f"montecarlo: {stats.trials} trial(s), min_fidelity={stats.min_fidelity:.12g}, "
            f"mean_success={stats.mean_success_probability:.12g} -> {config.output.path}"
        )
    return 0


def cmd_qkd(config: ExperimentConfig) -> int:
    report = bb84_run(
        config.n_bits, config.noise, config.protected, config.scheme, config.seed
    )
    payload = {"command": "qkd", "config": config.to_dict(), "report": report.to_dict()}
    _emit(payload, QKD_CSV_FIELDS, qkd_csv_rows(report), config.output)
    if config.output.path:
        print(
            f"qkd: {report.raw_bits} bits, sifted={report.sifted_bits}, "
            f"qber={report.qber:.6g} -> {config.output.path}"
        )
    return 0


def _random_qubit(rng: np.random.Generator) -> InputQubit:
    re_a, im_a, re_b, im_b = rng.standard_normal(4)
    a = complex(re_a, im_a)
    b = complex(re_b, im_b)
    n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return InputQubit(a / n, b / n)


def _closed_form_rows(draws: int, seed: int, corrupt_pm_sign: bool):
    """Max simulation-vs-closed-form amplitude deviation per pipeline stage."""
    rng = np.random.default_rng(seed)
    phase_a = PM_MATCH_REFLECTION if corrupt_pm_sign else PM_CANCEL_REFLECTION
    devs = {
        "two-channel-encoded": 0.0,
        "channel-a-noisy": 0.0,
        "channel-a-decoded": 0.0,
        "channel-b-decoded": 0.0,
        "single-channel-encoded": 0.0,
        "single-channel-decoded": 0.0,
    }
    for i in range(draws):
        q = _random_qubit(rng)
        u_a = sample_haar_su2(seed, 2 * i)
        u_b = sample_haar_su2(seed, 2 * i + 1)
        (da, _), (ea, _) = u_a.u[0], u_a.u[1]
        (db, _), (eb, _) = u_b.u[0], u_b.u[1]

        encoded = encode_two_channel(prepare_input(q, OMEGA2, INPUT_PATH))
        devs["two-channel-encoded"] = max(
            devs["two-channel-encoded"],
            max_amplitude_deviation(encoded, two_channel_encoded(q.alpha, q.beta)),
        )
        part_a, _ = condition(encoded, lambda k: k.path == CHANNEL_A)
        state_a = apply_noise(NoiseModel.per_channel({CHANNEL_A: u_a}), part_a, CHANNEL_A)
        devs["channel-a-noisy"] = max(
            devs["channel-a-noisy"],
            max_amplitude_deviation(state_a, channel_a_noisy(q.alpha, q.beta, da, ea)),
        )
        decoded_a = decode(state_a, CHANNEL_A, PMSchedule(phase_a))
        devs["channel-a-decoded"] = max(
            devs["channel-a-decoded"],
            max_amplitude_deviation(decoded_a, channel_a_decoded(q.alpha, q.beta, da, ea)),
        )
        part_b, _ = condition(encoded, lambda k: k.path == CHANNEL_B)
        state_b = apply_noise(NoiseModel.per_channel({CHANNEL_B: u_b}), part_b, CHANNEL_B)
        decoded_b = decode(state_b, CHANNEL_B, PMSchedule(PM_MATCH_REFLECTION))
        devs["channel-b-decoded"] = max(
            devs["channel-b-decoded"],
            max_amplitude_deviation(decoded_b, channel_b_decoded(q.alpha, q.beta, db, eb)),
        )

        enc1 = encode_single_channel(prepare_input(q, OMEGA2, INPUT_PATH))
        devs["single-channel-encoded"] = max(
            devs["single-channel-encoded"],
            max_amplitude_deviation(enc1, single_channel_encoded(q.alpha, q.beta)),
        )
        model = NoiseModel.per_timebin({(SINGLE_CHANNEL, 0): u_b, (SINGLE_CHANNEL, 1): u_a})
        noisy1 = apply_noise(model, enc1, SINGLE_CHANNEL)
        decoded1 = decode(
            noisy1,
            SINGLE_CHANNEL,
            PMSchedule(default_phase=phase_a, overrides=((0, PM_MATCH_REFLECTION),)),
        )
        ref1 = single_channel_decoded(
            q.alpha, q.beta, u_a.u[0, 0], u_a.u[1, 0], u_b.u[0, 1], u_b.u[1, 1]
        )
        devs["single-channel-decoded"] = max(
            devs["single-channel-decoded"], max_amplitude_deviation(decoded1, ref1)
        )
    return [(name, dev, CLOSED_FORM_TOL) for name, dev in devs.items()]


def _unitarity_row():
    h, v = Polarization.H, Polarization.V

    def kets(path, freqs=(OMEGA2,), bins=(0,)):
        return [
            ModeKet(p, f, path, b) for p in (h, v) for f in freqs for b in bins
        ]

    checks = [
        (PBS(inputs=("u_in1", "u_in2"), outputs=("u_o1", "u_o2")), kets("u_in1") + kets("u_in2")),
        (PBS(inputs=("u_in1",), outputs=("u_o1", "u_o2")), kets("u_in1")),
        (BS(inputs=("u_in1", "u_in2"), outputs=("u_o1", "u_o2")), kets("u_in1", (OMEGA1, OMEGA2)) + kets("u_in2", (OMEGA1, OMEGA2))),
        (HWP(path="u_p"), kets("u_p")),
        # FS is an isometry from its source frequency; a basis containing the
        # target frequency is not closed (amplitudes would merge there)
        (FS(path="u_p", from_freq=OMEGA2, to_freq=OMEGA1), kets("u_p", (OMEGA2,))),
        (WDM(input="u_in1", routes=((OMEGA1, "u_o1"), (OMEGA2, "u_o2"))), kets("u_in1", (OMEGA1, OMEGA2))),
        (PM(path="u_p", schedule=PMSchedule(0.7, ((0, -1.1), (1, 2.3)))), kets("u_p", (OMEGA2,), (0, 1, 2))),
        (Delay(path="u_p", bins=1), kets("u_p", (OMEGA2,), (0, 1))),
    ]
    worst = 0.0
    for element, basis in checks:
        worst = max(worst, element_unitary_defect(element, basis))
    return ("element-unitarity", worst, UNITARITY_TOL)


def _static_pm_gap_row(seed: int):
    """Quantifies the documented static-phase limitation.

    With one static decoder phase (-pi/2) the delayed-bin branches reach
    fidelity 1 but the prompt-bin branches land at
    (|alpha|^2 - |beta|^2)^2; the row passes when both values match that
    prediction, i.e. when the gap is reproduced exactly.
    """
    q = InputQubit(math.sqrt(0.8), math.sqrt(0.2))
    expected_gap = (0.8 - 0.2) ** 2
    u = sample_haar_su2(seed, 12345)
    model = NoiseModel.uniform(u)
    state = run_scheme(q, SchemeKind.SINGLE_CHANNEL, model, PmMode("static", PM_CANCEL_REFLECTION))
    branches = decompose(state, prepare_input(q, OMEGA2, INPUT_PATH))
    dev = 0.0
    for b in branches:
        expected = 1.0 if b.timebin == 1 else expected_gap
        dev = max(dev, abs(b.fidelity - expected))
    return ("static-pm-gap", dev, GAP_TOL)


def cmd_verify(
    seed: int = VERIFY_SEED,
    draws: int = 100,
    output_path: str | None = None,
    corrupt_pm_sign: bool = False,
) -> int:
    rows = _closed_form_rows(draws, seed, corrupt_pm_sign)
    rows.append(_unitarity_row())
    rows.append(_static_pm_gap_row(seed))
    all_ok = True
    print(f"{'check':26s} {'max deviation':>14s} {'threshold':>10s}  result")
    results = []
    for name, dev, tol in rows:
        ok = dev < tol
        all_ok = all_ok and ok
        print(f"{name:26s} {dev:14.3e} {tol:10.0e}  {'PASS' if ok else 'FAIL'}")
        results.append({"check": name, "max_deviation": dev, "threshold": tol, "pass": ok})
    print(
        "note: the static-pm-gap check documents that a single static decoder phase "
        "degrades the prompt-bin branches to (|alpha|^2-|beta|^2)^2 fidelity; "
        "the time-gated schedule removes the gap."
    )
    if output_path:
        Path(output_path).write_text(
            json.dumps({"command": "verify", "seed": seed, "draws": draws, "results": results}, indent=2)
            + "\n"
        )
    return 0 if all_ok else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqguard",
        description=(
            "Simulator for frequency-assisted polarization qubit transmission "
            "through noisy channels."
        ),
        epilog=(
            "CSV column sets: transmit %s | montecarlo %s | qkd %s"
            % (",".join(RUN_CSV_FIELDS), ",".join(MONTECARLO_CSV_FIELDS), ",".join(QKD_CSV_FIELDS))
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_trials=False):
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if with_trials:
            p.add_argument("--trials", type=int, default=None, help="override the config trial count")
        p.add_argument("--output", default=None, help="override the output file path")
        p.add_argument("--format", choices=("json", "csv"), default=None, help="override the output format")

    add_common(sub.add_parser("transmit", help="single-shot pipeline with branch report"))
    add_common(sub.add_parser("montecarlo", help="seeded noise-ensemble statistics"), with_trials=True)
    add_common(sub.add_parser("qkd", help="BB84 QBER with/without protection"))

    v = sub.add_parser("verify", help="closed-form equivalence and unitarity suite")
    v.add_argument("--seed", type=int, default=VERIFY_SEED)
    v.add_argument("--draws", type=int, default=100)
    v.add_argument("--output", default=None, help="also write the results as JSON")
    v.add_argument("--corrupt-pm-sign", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.seed, args.draws, args.output, args.corrupt_pm_sign)
        overrides = {"seed_override": args.seed}
        if getattr(args, "trials", None) is not None:
            overrides["trials_override"] = args.trials
        config = ExperimentConfig.load(args.config, **overrides)
        config = config.with_output(args.output, args.format)
        if args.command == "transmit":
            return cmd_transmit(config)
        if args.command == "montecarlo":
            return cmd_montecarlo(config)
        return cmd_qkd(config)
    except FreqguardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

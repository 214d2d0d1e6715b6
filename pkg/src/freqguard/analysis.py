"""Branch decomposition, success metrics, and Monte Carlo experiments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from ._packing import BIN_SHIFT, PATHS
from .circuits import INPUT_PATH, OMEGA2, PmMode, SchemeKind, run_scheme
from .errors import ConfigError, EmptyStateError
from .states import InputQubit, PhotonState, prepare_input, state_records

# Branches at least this far below fidelity 1 count as failures; exact
# branches sit at ~1e-15 error, corrupted ones at O(1), so the split is
# unambiguous.
FIDELITY_TOL = 1e-9

# Branches below this probability are dropped from reports (noise floor).
BRANCH_FLOOR = 1e-14


@dataclass(frozen=True)
class BranchOutcome:
    """One (output port, time bin) component of a final state."""

    port: str
    timebin: int
    probability: float
    conditional_state: PhotonState
    fidelity: float


def decompose(s: PhotonState, ideal: PhotonState) -> list[BranchOutcome]:
    """Split a final state into (port, time bin) branches.

    ``ideal`` is the intended qubit state on a single (path, bin); it is
    re-addressed to each branch's port and bin before the fidelity is
    taken.  Branches come out ordered by (port label, time bin); empty
    branches are omitted.
    """
    if s.is_empty:
        return []
    if ideal.is_empty:
        raise EmptyStateError("decompose needs a nonzero ideal state")
    i_cells = ideal._keys >> np.uint64(BIN_SHIFT)
    if i_cells.shape[0] and not bool(np.all(i_cells == i_cells[0])):
        raise ConfigError("the ideal state must sit on a single (path, timebin)")
    # low 9 bits hold (freq, pol); re-address the ideal to each branch by
    # ORing in the branch's (path, bin) high bits — key order is preserved
    i_low = ideal._keys & np.uint64((1 << BIN_SHIFT) - 1)
    i_norm = ideal.norm_sq()
    total = s.norm_sq()
    groups = s._keys >> np.uint64(BIN_SHIFT)
    _, starts = np.unique(groups, return_index=True)
    bounds = sorted(starts.tolist()) + [len(s)]
    outcomes = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        sub = PhotonState(s._keys[lo:hi].copy(), s._amps[lo:hi].copy())
        g = int(groups[lo])
        port_id = g >> 32
        timebin = g & 0xFFFFFFFF
        ref_keys = i_low | np.uint64(g << BIN_SHIFT)
        ov = K.inner(ref_keys, ideal._amps, sub._keys, sub._amps)
        sub_norm = sub.norm_sq()
        outcomes.append(
            BranchOutcome(
                port=PATHS.label_of(port_id),
                timebin=timebin,
                probability=sub_norm / total,
                conditional_state=sub.normalized(),
                fidelity=(ov.real * ov.real + ov.imag * ov.imag) / (i_norm * sub_norm),
            )
        )
    outcomes.sort(key=lambda b: (b.port, b.timebin))
    return outcomes


def success_probability(branches: Sequence[BranchOutcome], tol: float = FIDELITY_TOL) -> float:
    """Total probability of branches within ``tol`` of fidelity 1."""
    if not 0.0 < tol < 1.0:
        raise ConfigError(f"fidelity tolerance must be in (0, 1), got {tol}")
    return sum(b.probability for b in branches if b.fidelity >= 1.0 - tol)


@dataclass(frozen=True)
class RunReport:
    """Single-shot pipeline result with per-branch outcomes."""

    input_alpha: complex
    input_beta: complex
    scheme: str
    noise: dict
    pm_mode: dict
    seed: int | None
    branches: tuple[BranchOutcome, ...]
    success_probability: float
    min_fidelity: float
    warnings: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "input": {
                "alpha": [self.input_alpha.real, self.input_alpha.imag],
                "beta": [self.input_beta.real, self.input_beta.imag],
            },
            "scheme": self.scheme,
            "noise": self.noise,
            "pm_mode": self.pm_mode,
            "seed": self.seed,
            "branches": [
                {
                    "port": b.port,
                    "timebin": b.timebin,
                    "probability": b.probability,
                    "fidelity": b.fidelity,
                    "state": state_records(b.conditional_state),
                }
                for b in self.branches
            ],
            "success_probability": self.success_probability,
            "min_fidelity": self.min_fidelity,
            "warnings": list(self.warnings),
            "metadata": self.metadata,
        }


RUN_CSV_FIELDS = (
    "scheme",
    "alpha_re",
    "alpha_im",
    "beta_re",
    "beta_im",
    "noise_kind",
    "noise_placement",
    "port",
    "timebin",
    "probability",
    "fidelity",
    "success_probability",
    "min_fidelity",
)


def run_report_csv_rows(r: RunReport) -> list[list]:
    rows = []
    for b in r.branches:
        rows.append(
            [
                r.scheme,
                r.input_alpha.real,
                r.input_alpha.imag,
                r.input_beta.real,
                r.input_beta.imag,
                r.noise.get("kind", ""),
                r.noise.get("placement", ""),
                b.port,
                b.timebin,
                b.probability,
                b.fidelity,
                r.success_probability,
                r.min_fidelity,
            ]
        )
    return rows


def make_run_report(
    q: InputQubit,
    scheme: SchemeKind,
    noise_desc: dict,
    pm_mode: PmMode,
    final_state: PhotonState,
    seed: int | None = None,
    tol: float = FIDELITY_TOL,
) -> RunReport:
    ideal = prepare_input(q, OMEGA2, INPUT_PATH)
    branches = decompose(final_state, ideal)
    dropped = sum(1 for b in branches if b.probability < BRANCH_FLOOR)
    kept = tuple(b for b in branches if b.probability >= BRANCH_FLOOR)
    warnings = []
    degraded = [b for b in kept if b.fidelity < 1.0 - tol]
    if degraded and pm_mode.kind == "static":
        ports = ", ".join(f"{b.port}/bin{b.timebin}" for b in degraded)
        warnings.append(
            f"static phase modulator left {len(degraded)} branch(es) degraded ({ports}): "
            "a single phase can realign only one arm of the encoder output; "
            "the time-gated schedule (mode=time_gated) restores fidelity 1 on all branches"
        )
    return RunReport(
        input_alpha=q.alpha,
        input_beta=q.beta,
        scheme=scheme.value,
        noise=dict(noise_desc),
        pm_mode=pm_mode.to_dict(),
        seed=seed,
        branches=kept,
        success_probability=success_probability(kept, tol),
        min_fidelity=min((b.fidelity for b in kept), default=0.0),
        warnings=tuple(warnings),
        metadata={"branch_probability_floor": BRANCH_FLOOR, "branches_dropped": dropped},
    )


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial summary used for deterministic aggregation."""

    index: int
    min_fidelity: float
    mean_fidelity: float  # probability-weighted over branches
    success_probability: float
    branch_probabilities: tuple[tuple[str, int, float], ...]


@dataclass(frozen=True)
class MonteCarloStats:
    trials: int
    seed: int
    scheme: str
    noise: dict
    mean_fidelity: float
    min_fidelity: float
    mean_success_probability: float
    branch_probability_means: tuple[tuple[str, int, float], ...]

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "scheme": self.scheme,
            "noise": self.noise,
            "mean_fidelity": self.mean_fidelity,
            "min_fidelity": self.min_fidelity,
            "mean_success_probability": self.mean_success_probability,
            "branch_probability_means": [
                {"port": p, "timebin": t, "mean_probability": v}
                for p, t, v in self.branch_probability_means
            ],
        }


MONTECARLO_CSV_FIELDS = ("record", "port", "timebin", "value")


def montecarlo_csv_rows(stats: MonteCarloStats) -> list[list]:
    rows = [
        ["trials", "", "", stats.trials],
        ["mean_fidelity", "", "", stats.mean_fidelity],
        ["min_fidelity", "", "", stats.min_fidelity],
        ["mean_success_probability", "", "", stats.mean_success_probability],
    ]
    for p, t, v in stats.branch_probability_means:
        rows.append(["branch_mean_probability", p, t, v])
    return rows


def run_trial(config, trial: int) -> TrialOutcome:
    """One Monte Carlo trial; a pure function of (config, trial index)."""
    scheme = config.scheme
    model = config.noise.model_for_trial(trial, scheme.channels, scheme.timebins)
    state = run_scheme(config.input, scheme, model, config.pm_mode)
    ideal = prepare_input(config.input, OMEGA2, INPUT_PATH)
    branches = decompose(state, ideal)
    total = sum(b.probability for b in branches)
    mean_fid = (
        sum(b.probability * b.fidelity for b in branches) / total if total > 0 else 0.0
    )
    return TrialOutcome(
        index=trial,
        min_fidelity=min((b.fidelity for b in branches), default=0.0),
        mean_fidelity=mean_fid,
        success_probability=success_probability(branches),
        branch_probabilities=tuple((b.port, b.timebin, b.probability) for b in branches),
    )


def aggregate_trials(outcomes: Sequence[TrialOutcome], config) -> MonteCarloStats:
    """Reduce trial outcomes in index order (chunk-order independent)."""
    ordered = sorted(outcomes, key=lambda o: o.index)
    n = len(ordered)
    min_f = np.array([o.min_fidelity for o in ordered])
    mean_f = np.array([o.mean_fidelity for o in ordered])
    succ = np.array([o.success_probability for o in ordered])
    keys = sorted({(p, t) for o in ordered for p, t, _ in o.branch_probabilities})
    per_branch = {k: np.zeros(n) for k in keys}
    for i, o in enumerate(ordered):
        for p, t, v in o.branch_probabilities:
            per_branch[(p, t)][i] = v
    return MonteCarloStats(
        trials=n,
        seed=config.seed,
        scheme=config.scheme.value,
        noise=config.noise.to_dict(),
        mean_fidelity=float(np.mean(mean_f)),
        min_fidelity=float(np.min(min_f)),
        mean_success_probability=float(np.mean(succ)),
        branch_probability_means=tuple(
            (p, t, float(np.mean(per_branch[(p, t)]))) for p, t in keys
        ),
    )


def monte_carlo(config) -> MonteCarloStats:
    """Run ``config.trials`` seeded trials and aggregate deterministically."""
    if config.trials < 1:
        raise ConfigError(f"monte carlo needs trials >= 1, got {config.trials}")
    return aggregate_trials([run_trial(config, t) for t in range(config.trials)], config)

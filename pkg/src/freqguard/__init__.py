"""freqguard: frequency-assisted polarization qubit transmission simulator.

Models single photons carrying polarization, frequency, path, and
time-bin degrees of freedom through linear-optical encoders/decoders and
noisy channels, and verifies branch by branch that the recovered qubit
matches the one sent.
"""

from ._kernels import available_backends, backend_name, use_backend
from .analysis import (
    BranchOutcome,
    MonteCarloStats,
    RunReport,
    TrialOutcome,
    aggregate_trials,
    decompose,
    make_run_report,
    monte_carlo,
    run_trial,
    success_probability,
)
from .circuits import (
    CHANNEL_A,
    CHANNEL_B,
    INPUT_PATH,
    OMEGA1,
    OMEGA2,
    PM_CANCEL_REFLECTION,
    PM_MATCH_REFLECTION,
    PORT_C,
    PORT_D,
    SINGLE_CHANNEL,
    TIME_GATED_SCHEDULE,
    Circuit,
    PmMode,
    SchemeKind,
    channel_decoder,
    decode,
    encode_single_channel,
    encode_two_channel,
    run_scheme,
    single_channel_encoder,
    two_channel_encoder,
)
from .config import ExperimentConfig, OutputSpec
from .elements import (
    BS,
    FS,
    HWP,
    PBS,
    PM,
    WDM,
    Delay,
    Element,
    PMSchedule,
    apply_element,
    element_from_dict,
    element_to_dict,
    element_unitary_defect,
)
from .errors import (
    BasisError,
    ConfigError,
    EmptyStateError,
    FreqguardError,
    RoutingError,
    ValidationError,
    WiringError,
)
from .noise import (
    NoiseModel,
    NoiseSpec,
    PolarizationUnitary,
    apply_noise,
    complete_from_column,
    sample_haar_su2,
)
from .qkd import Basis, QkdReport, basis_states, bb84_run, measure
from .reference import REFERENCE_POINTS, closed_form
from .states import (
    InputQubit,
    ModeKet,
    PhotonState,
    Polarization,
    condition,
    fidelity,
    inner_product,
    max_amplitude_deviation,
    prepare_input,
    state_csv_rows,
    state_records,
    state_to_json,
)

__version__ = "0.1.0"

"""Excitation-wave logic on conductive networks.

A two-variable excitable-medium model integrated over masked grids
derived from images or synthetic geometry, with electrode potentials,
activity and excitation-frequency observers, and four ways of reading
two-input Boolean gates out of the dynamics.
"""

from .analysis import analyze
from .errors import (
    ArtifactIOError,
    ConfigError,
    CorruptImageError,
    ImageDecodeError,
    NumericalBlowupError,
    UndefinedActivityError,
    UnreadableFileError,
    UnsupportedFormatError,
    WavegatesError,
)
from .gates import (
    CoincidenceEvent,
    FrequencyDomain,
    GateCountTable,
    GateKind,
    SpikeEvent,
    activity_gate,
    channel_functions,
    classify_gate,
    count_gates,
    detect_spikes,
    extract_domains,
    frequency_gate_sites,
    merge_coincidences,
    rank_gates,
)
from .grid import (
    Channel,
    ConductiveGrid,
    Disc,
    Electrode,
    ElectrodeSet,
    GeometrySpec,
    Junction,
    ThresholdSpec,
    place_electrodes,
    synthesize,
    threshold_mask,
)
from .imgio import RGBImage, load_image
from .model import (
    FieldState,
    GATE_PAIRS,
    InputPair,
    SimParams,
    Stimulus,
    apply_impulse,
    laplacian,
    load_checkpoint,
    resting_state,
    run,
    save_checkpoint,
    step,
)
from .observe import (
    ActivityMeter,
    CoverageTracker,
    FrameRecorder,
    FrequencyAccumulator,
    FrequencyMatrix,
    PotentialProbe,
    PotentialTrace,
    measure_activity,
    normalize_frequency,
    probe_potential,
    render_frame,
)
from .scenario import Scenario, load_scenario, run_scenario, sweep

__version__ = "0.1.0"

__all__ = [
    "ActivityMeter",
    "ArtifactIOError",
    "Channel",
    "CoincidenceEvent",
    "ConductiveGrid",
    "ConfigError",
    "CorruptImageError",
    "CoverageTracker",
    "Disc",
    "Electrode",
    "ElectrodeSet",
    "FieldState",
    "FrameRecorder",
    "FrequencyAccumulator",
    "FrequencyDomain",
    "FrequencyMatrix",
    "GATE_PAIRS",
    "GateCountTable",
    "GateKind",
    "GeometrySpec",
    "ImageDecodeError",
    "InputPair",
    "Junction",
    "NumericalBlowupError",
    "PotentialProbe",
    "PotentialTrace",
    "RGBImage",
    "Scenario",
    "SimParams",
    "SpikeEvent",
    "Stimulus",
    "ThresholdSpec",
    "UndefinedActivityError",
    "UnreadableFileError",
    "UnsupportedFormatError",
    "WavegatesError",
    "activity_gate",
    "analyze",
    "apply_impulse",
    "channel_functions",
    "classify_gate",
    "count_gates",
    "detect_spikes",
    "extract_domains",
    "frequency_gate_sites",
    "laplacian",
    "load_checkpoint",
    "load_image",
    "load_scenario",
    "measure_activity",
    "merge_coincidences",
    "normalize_frequency",
    "place_electrodes",
    "probe_potential",
    "rank_gates",
    "render_frame",
    "resting_state",
    "run",
    "run_scenario",
    "save_checkpoint",
    "step",
    "sweep",
    "synthesize",
    "threshold_mask",
]

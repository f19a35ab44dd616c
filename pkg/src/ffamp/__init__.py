"""Phase-insensitive optical amplification with linear optics, homodyne
detection and feedforward: Gaussian simulation and noise-figure analysis."""

__version__ = "0.1.0"

from .amplifier import (
    AmplifierConfig,
    TrajectoryEnsemble,
    amplifier_channel,
    electronic_gain,
    phase_sensitive_amp,
    predict_phase_conjugate,
    run_ensemble,
    run_phase_conjugate,
    run_trajectories,
)
from .gaussian import (
    GaussianState,
    SymplecticOp,
    apply,
    beam_splitter,
    check_physical,
    coherent,
    displace,
    loss_channel,
    partial_trace,
    phase_shift,
    tensor,
    thermal,
    two_mode_squeezed,
    vacuum,
)
from .measurement import (
    MeasurementRecord,
    dual_homodyne,
    homodyne_sample,
    homodyne_stats,
    make_rng,
)
from .metrics import (
    NoiseFigureReport,
    added_noise,
    estimate_gain,
    nf_detector,
    nf_ideal,
    nf_technical,
    noise_figure,
)
from .spectrum import PowerSpectrum, peak_floor_report, synthesize_spectrum

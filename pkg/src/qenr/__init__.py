"""Gaussian-state simulator of a quantum-enhanced noise radar.

Two transmitters, a two-mode squeezed source and an ideal classical
correlated-noise source, are compared at matched output power after a noisy,
lossy receive chain. Detection uses the digitised signal-idler covariance.
"""

__version__ = "0.1.0"

from .analysis import (
    EnhancementPoint,
    FitError,
    FitResult,
    SweepResult,
    SweepRow,
    enhancement_model,
    enhancement_points,
    fit_gain,
    measured_enhancement,
    power_sweep,
    sweep_covariance,
    sweep_entanglement,
)
from .channels import (
    ChainParams,
    DetectedState,
    apply_amplifier,
    apply_loss,
    calibrate,
    db_to_linear,
    linear_to_db,
    measurement_chain,
    noise_photons,
)
from .gaussian import (
    OMEGA,
    GaussianState,
    is_physical,
    partial_transpose,
    photon_number,
    ppt_min_eigenvalue,
    symplectic_eigenvalues,
    tms_covariance,
)
from .receiver import (
    CovarianceEstimate,
    IQRecord,
    ROCPoint,
    derive_seed,
    detect,
    detection_statistic,
    estimate_covariance,
    pd_at_pfa,
    roc_curve,
    sample_iq,
    statistic_stderr,
    stream_covariance,
    wishart_covariance,
)
from .sources import (
    SourceSpec,
    classical_covariance_bound,
    classical_source,
    pump_to_photons,
    quantum_source,
)

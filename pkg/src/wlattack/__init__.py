"""Wavelength-attack simulator and analysis toolkit for heterodyne CVQKD.

The package models an intercept-resend eavesdropper who exploits the
wavelength dependence of the receiver's beam splitters: she heterodynes the
intercepted state and resends two tuned, non-interfering beams so that each
of Bob's detectors reads back her outcome.  Modules: shot-noise units and
seeded sampling (:mod:`wlattack.units`), the coupler transmittance model
(:mod:`wlattack.coupler`), homodyne noise models (:mod:`wlattack.homodyne`),
the attacking-equation solver (:mod:`wlattack.solver`), Monte Carlo sessions
(:mod:`wlattack.session`), conditional-variance analysis and parameter
estimation (:mod:`wlattack.analysis`), and a deterministic CLI
(:mod:`wlattack.cli`).
"""

__version__ = "0.1.0"

from .analysis import (
    EstimationReport,
    VarianceReport,
    estimate_parameters,
    excess_noise_detected,
    hiding_t2,
    sweep_v_be,
    v_ba,
    v_be_argmax,
    v_be_closed_form,
    v_be_general,
)
from .coupler import (
    DEFAULT_BAND,
    DEFAULT_COUPLER,
    DEFAULT_COUPLING,
    CouplerModel,
    WavelengthBand,
    invert_transmittance,
    transmittance,
)
from .errors import (
    BranchError,
    ConfigError,
    ContractViolationError,
    DomainError,
    InfeasibleError,
    InsufficientDataError,
    NoSolutionError,
    SessionInfeasibleError,
    UnrealizableError,
)
from .homodyne import (
    BeamState,
    DetectorSpec,
    LinearizationWarning,
    PortIntensities,
    balanced_output,
    one_port_ubhd_intensities,
    one_port_ubhd_samples,
    two_port_shot_noise_variance,
    two_port_ubhd_output,
    two_port_ubhd_vacuum_samples,
)
from .session import (
    AttackConfig,
    RoundRecord,
    SessionDataset,
    bob_measure,
    eve_heterodyne,
    resolve_t2,
    run_session,
)
from .solver import (
    AttackSolution,
    attack_residuals,
    realize_wavelengths,
    residual_scale,
    solve_general,
    solve_same_sign,
)
from .units import (
    ProtocolParams,
    QuadraturePair,
    RandomSource,
    ShotNoise,
    sample_gaussian_pair,
)

__all__ = [
    "AttackConfig",
    "AttackSolution",
    "BeamState",
    "BranchError",
    "ConfigError",
    "ContractViolationError",
    "CouplerModel",
    "DEFAULT_BAND",
    "DEFAULT_COUPLER",
    "DEFAULT_COUPLING",
    "DetectorSpec",
    "DomainError",
    "EstimationReport",
    "InfeasibleError",
    "InsufficientDataError",
    "LinearizationWarning",
    "NoSolutionError",
    "PortIntensities",
    "ProtocolParams",
    "QuadraturePair",
    "RandomSource",
    "RoundRecord",
    "SessionDataset",
    "SessionInfeasibleError",
    "ShotNoise",
    "UnrealizableError",
    "VarianceReport",
    "WavelengthBand",
    "attack_residuals",
    "balanced_output",
    "bob_measure",
    "estimate_parameters",
    "eve_heterodyne",
    "excess_noise_detected",
    "hiding_t2",
    "invert_transmittance",
    "one_port_ubhd_intensities",
    "one_port_ubhd_samples",
    "realize_wavelengths",
    "resolve_t2",
    "residual_scale",
    "run_session",
    "sample_gaussian_pair",
    "solve_general",
    "solve_same_sign",
    "sweep_v_be",
    "transmittance",
    "two_port_shot_noise_variance",
    "two_port_ubhd_output",
    "two_port_ubhd_vacuum_samples",
    "v_ba",
    "v_be_argmax",
    "v_be_closed_form",
    "v_be_general",
]

"""Quantum particle in a cavity with one oscillating wall and a matched
time-dependent harmonic potential: exact mode evolution, cyclic phase
decomposition, perturbed-boundary dynamics, and the two-detector readout
statistics built on the resulting phase shift."""

from .boundary import PhysicalConstants, WallMotion, light_crossing_time
from .basis import (
    PhaseDecomposition,
    dynamical_phase,
    dynamical_phase_mismatched,
    geometric_phase,
    phase_decomposition,
    phase_integral,
    psi,
    total_phase,
    total_phase_closed_form,
    wrap_phase,
)
from .dynamics import (
    AdiabaticPhase,
    CoefficientTrajectory,
    CoupledSystemConfig,
    IntegrationError,
    adiabatic_phase,
    evolve_coefficients,
    final_mode_phase,
    reconstruct_wavefunction,
    x2_matrix_element,
)
from .analysis import (
    CausalityReport,
    ConvergencePoint,
    PhaseProfile,
    VelocityReport,
    causality_check,
    convergence_study,
    extract_phase_profile,
    mode_velocity,
    momentum_matrices,
    period_mode_velocity,
    velocity_stats,
)
from .protocol import (
    DetectionProbability,
    ProtocolConfig,
    ProtocolOutcome,
    click_ratio,
    detection_probability,
    required_ensemble_size,
    simulate_ensemble,
)

__version__ = "0.1.0"

"""Phase-profile extraction, basis-size convergence, and velocity
diagnostics.

The observable of interest lives near the static wall: the local phase
picked up by the wavefunction over one period,

    phase(x) = -arg( phi(x,T) / phi(x,0) ),

unwrapped along x and compared against the cycle phase of the unperturbed
reference cavity. Node neighborhoods of phi(x,0) are excluded before taking
the ratio.

Velocity diagnostics support the subluminality bookkeeping: a light signal
needs tau = L0/c to cross the cavity, so results obtained within one wall
period T < tau involve no information carried at or above c, provided the
state itself has subluminal momentum content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import phase_integral, psi
from .boundary import PhysicalConstants, WallMotion, light_crossing_time
from .dynamics import (
    CoefficientTrajectory,
    CoupledSystemConfig,
    evolve_coefficients,
    reconstruct_wavefunction,
)

__all__ = [
    "PhaseProfile",
    "ConvergencePoint",
    "VelocityReport",
    "CausalityReport",
    "DEFAULT_NODE_THRESHOLD",
    "default_window",
    "default_reference_point",
    "extract_phase_profile",
    "convergence_study",
    "mode_velocity",
    "period_mode_velocity",
    "momentum_matrices",
    "velocity_stats",
    "causality_check",
]

# amplitude floor (relative to the profile maximum) below which a point is
# treated as a node neighborhood
DEFAULT_NODE_THRESHOLD = 1e-3


def default_window(L0: float) -> tuple[float, float]:
    """Default reporting window next to the static wall: (0, L0/10]."""
    return (0.0, L0 / 10.0)


def default_reference_point(L0: float) -> float:
    """Reference x for scalar phase extraction: midpoint of the default
    window.

    Single-point studies probe the same near-wall region in which the
    profile is reported. (The first antinode gives a larger amplitude but
    sits outside the measurement region and converges later with basis
    size.)
    """
    return L0 / 20.0


@dataclass(frozen=True)
class PhaseProfile:
    """Local cycle phase against a scalar reference phase.

    shift = phase - reference, per grid point; phase is unwrapped along x
    starting from the point nearest the static wall.
    """

    x: np.ndarray
    phase: np.ndarray
    reference: float
    shift: np.ndarray


@dataclass(frozen=True)
class ConvergencePoint:
    """One row of a basis-size study: extracted phase at the reference x."""

    k_max: int
    phase: float
    delta_prev: float | None


@dataclass(frozen=True)
class VelocityReport:
    """Per-mode velocity scale and time-averaged state velocity over c."""

    mode_v_over_c: np.ndarray
    mean_v_over_c: float
    std_v_over_c: float


@dataclass(frozen=True)
class CausalityReport:
    subluminal_window: bool
    margin: float


def extract_phase_profile(
    x,
    phi_0,
    phi_T,
    reference_phase: float,
    window: tuple[float, float] | None = None,
    node_threshold: float = DEFAULT_NODE_THRESHOLD,
) -> PhaseProfile:
    """Unwrapped local phase of phi_T against phi_0 on a shared grid.

    Points outside the window or with |phi_0| below node_threshold times
    the maximum amplitude are dropped. Multiplying both sample sets by a
    common nonzero constant leaves the result unchanged.
    """
    x = np.asarray(x, dtype=float)
    phi_0 = np.asarray(phi_0, dtype=complex)
    phi_T = np.asarray(phi_T, dtype=complex)
    if not (x.shape == phi_0.shape == phi_T.shape):
        raise ValueError("x, phi_0 and phi_T must share one grid")
    if x.size and np.any(np.diff(x) <= 0):
        raise ValueError("x must be strictly increasing")
    mask = np.ones(x.shape, dtype=bool)
    if window is not None:
        lo, hi = window
        mask &= (x >= lo) & (x <= hi)
    mask &= np.abs(phi_0) >= node_threshold * np.max(np.abs(phi_0))
    if not np.any(mask):
        raise ValueError("window lies entirely inside a node-exclusion zone")
    xs = x[mask]
    raw = -np.angle(phi_T[mask] / phi_0[mask])
    phase = np.unwrap(raw)
    return PhaseProfile(x=xs, phase=phase, reference=float(reference_phase), shift=phase - reference_phase)


def _phase_at_point(
    config: CoupledSystemConfig, trajectory: CoefficientTrajectory, x_ref: float
) -> float:
    T = config.motion_boundary.period()
    phi_T = reconstruct_wavefunction(trajectory, config.motion_boundary, config.constants, [x_ref], T)[0]
    phi_0 = psi(config.motion_boundary, config.constants, config.n_init, x_ref, 0.0)
    return float(-np.angle(phi_T / phi_0))


def convergence_study(
    config: CoupledSystemConfig, k_max_list, x_ref: float | None = None
) -> list[ConvergencePoint]:
    """Extracted phase at x_ref for each truncation order in k_max_list.

    Rows carry the difference against the previous row; stability of that
    difference against the target phase resolution is the acceptance rule
    for a truncation order.
    """
    k_list = [int(k) for k in k_max_list]
    if any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ValueError("k_max_list must be strictly increasing")
    if x_ref is None:
        x_ref = default_reference_point(config.motion_boundary.L0)
    rows: list[ConvergencePoint] = []
    prev = None
    for k in k_list:
        traj = evolve_coefficients(replace(config, k_max=k))
        value = _phase_at_point(config, traj, x_ref)
        rows.append(ConvergencePoint(k_max=k, phase=value, delta_prev=None if prev is None else value - prev))
        prev = value
    return rows


def mode_velocity(motion: WallMotion, constants: PhysicalConstants, n: int, t: float) -> float:
    """Forward-traveling-wave velocity of mode n at time t:
    n*pi*hbar/(m*L(t)) + L'(t)/2."""
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    return n * math.pi * constants.hbar / (constants.mass * motion.length(t)) + 0.5 * motion.length_dot(t)


def period_mode_velocity(motion: WallMotion, constants: PhysicalConstants, n: int) -> float:
    """Representative per-period velocity scale of mode n.

    The wall-velocity half-term averages to zero over a cycle; the initial
    length stands in for the cavity size, n*pi*hbar/(m*L0).
    """
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    return n * math.pi * constants.hbar / (constants.mass * motion.L0)


def momentum_matrices(
    motion_boundary: WallMotion, constants: PhysicalConstants, k_max: int, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """<psi_j|P|psi_k> and <psi_j|P^2|psi_k> over boundary modes at time t.

    Both matrices are Hermitian; the P matrix couples only opposite-parity
    pairs. The quadratic boundary phase contributes the flow terms
    proportional to the wall velocity.
    """
    hbar, m = constants.hbar, constants.mass
    L = motion_boundary.length(t)
    Ld = motion_boundary.length_dot(t)
    beta = m * Ld / (2.0 * hbar * L)
    k = np.arange(1, k_max + 1)
    J, K = np.meshgrid(k, k, indexing="ij")
    odd = (J + K) % 2 == 1
    with np.errstate(divide="ignore", invalid="ignore"):
        x1 = np.where(odd, -8.0 * J * K * L / (math.pi**2 * (J * J - K * K) ** 2), 0.0)
        c0 = np.where(odd, 4.0 * J / (math.pi * (J * J - K * K)), 0.0)
        x2 = 8.0 * J * K * ((-1.0) ** (J + K)) * L * L / (math.pi**2 * (J * J - K * K) ** 2)
        xc = -2.0 * J * L * ((-1.0) ** (J + K)) / (math.pi * (J * J - K * K))
    np.fill_diagonal(x1, L / 2.0)
    np.fill_diagonal(c0, 0.0)
    np.fill_diagonal(x2, L * L * (1.0 / 3.0 - 1.0 / (2.0 * k * k * math.pi**2)))
    np.fill_diagonal(xc, -L / (2.0 * math.pi * k))
    lam = (hbar * math.pi**2 / (2.0 * m)) * (k * k) * phase_integral(motion_boundary, 0.0, t)
    E = np.exp(1j * (lam[:, None] - lam[None, :]))
    P1 = -1j * hbar * E * (2j * beta * x1 + (K * math.pi / L) * c0)
    P2 = -(hbar**2) * E * (-4.0 * beta * beta * x2 + 4j * beta * (K * math.pi / L) * xc)
    P2 = P2 + np.diag(hbar**2 * (k * math.pi / L) ** 2)
    return P1, P2


def velocity_stats(
    trajectory: CoefficientTrajectory, motion_boundary: WallMotion, constants: PhysicalConstants
) -> VelocityReport:
    """Time-averaged velocity mean and standard deviation of the evolved
    state, plus the per-mode velocity scales.

    <v>(t) and <v^2>(t) come from the momentum matrices in the boundary
    basis; the averages use the trapezoidal rule over the stored samples.
    """
    times = trajectory.times
    vmean = np.empty(times.size)
    vvar = np.empty(times.size)
    m = constants.mass
    for i, t in enumerate(times):
        P1, P2 = momentum_matrices(motion_boundary, constants, trajectory.k_max, t)
        a = trajectory.coeffs[i]
        p1 = float(np.vdot(a, P1 @ a).real)
        p2 = float(np.vdot(a, P2 @ a).real)
        vmean[i] = p1 / m
        vvar[i] = max(p2 / (m * m) - vmean[i] ** 2, 0.0)
    T = times[-1] - times[0]
    mean_avg = float(np.trapezoid(vmean, times) / T)
    std_avg = float(np.trapezoid(np.sqrt(vvar), times) / T)
    modes = np.arange(1, trajectory.k_max + 1)
    mode_v = np.array([period_mode_velocity(motion_boundary, constants, int(n)) for n in modes])
    c = constants.c
    return VelocityReport(
        mode_v_over_c=mode_v / c, mean_v_over_c=mean_avg / c, std_v_over_c=std_avg / c
    )


def causality_check(motion: WallMotion, constants: PhysicalConstants) -> CausalityReport:
    """Whether one wall period fits inside the light-crossing time L0/c."""
    T = motion.period()
    tau = light_crossing_time(motion, constants)
    return CausalityReport(subluminal_window=T < tau, margin=tau - T)

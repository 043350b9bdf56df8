"""Exact moving-wall modes and their cyclic phases.

For a cavity of length L(t) whose in-cavity harmonic frequency satisfies
Omega^2 = -L''/L, the functions

    psi_n(x,t) = sqrt(2/L) * exp(-i*(hbar*pi^2*n^2/2m) * int_0^t L^-2 dt')
                 * exp(i*m*L'(t)*x^2 / (2*hbar*L(t))) * sin(n*pi*x/L(t))

solve the time-dependent Schroedinger equation with hard walls at x = 0 and
x = L(t). They are orthonormal at every instant but are not energy
eigenstates. Over one period each mode returns to itself up to the phase
factor exp(-i*mu_n); mu_n splits into a dynamical part (time integral of the
energy expectation) and a geometric remainder.

All phases are returned unwrapped (raw integral values); use
:func:`wrap_phase` for a mod-2pi representative. Comparisons between nearby
phases should always use the unwrapped values to avoid branch-cut artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .boundary import PhysicalConstants, WallMotion

__all__ = [
    "PhaseDecomposition",
    "phase_integral",
    "psi",
    "total_phase",
    "total_phase_closed_form",
    "dynamical_phase",
    "geometric_phase",
    "phase_decomposition",
    "dynamical_phase_mismatched",
    "wrap_phase",
]

# quadrature accuracy for all single-variable time integrals
_QUAD_KW = dict(epsabs=1e-12, epsrel=1e-12, limit=400)


def _check_mode(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"mode index must be an integer >= 1, got {n!r}")
    return int(n)


def wrap_phase(value: float) -> float:
    """Reduce a phase to the interval [0, 2*pi)."""
    return float(np.mod(value, 2.0 * math.pi))


@dataclass(frozen=True)
class PhaseDecomposition:
    """Cyclic phase of one mode split as total = dynamical + geometric.

    Constructed as (mu, mu - gamma, gamma), so the identity holds exactly;
    the independent route to the dynamical part is :func:`dynamical_phase`.
    """

    total: float
    dynamical: float
    geometric: float

    @property
    def total_mod_2pi(self) -> float:
        return wrap_phase(self.total)


def phase_integral(motion: WallMotion, t0: float, t: float, method: str = "closed") -> float:
    """Integral of 1/L^2 from t0 to t.

    The cosine family has the closed antiderivative of 1/(a + b*cos)^2 with
    a = L0 - q, b = q; ``method="quad"`` uses adaptive quadrature instead
    (absolute tolerance 1e-12), which is the route any non-cosine trajectory
    family would take.
    """
    if t < t0:
        raise ValueError(f"t must be >= t0, got t0={t0}, t={t}")
    if t == t0:
        return 0.0
    if method == "quad":
        # subdivide per period so QUADPACK resolves every oscillation
        periods = max(1, int(math.ceil((t - t0) / motion.period())))
        edges = np.linspace(t0, t, periods + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = quad(lambda s: 1.0 / motion.length(s) ** 2, lo, hi, **_QUAD_KW)
            total += val
        return total
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    return _phase_antiderivative(motion, t) - _phase_antiderivative(motion, t0)


def _phase_antiderivative(motion: WallMotion, t: float) -> float:
    # continuous antiderivative of 1/(a + b*cos(omega t))^2 on all of R
    a = motion.L0 - motion.q
    b = motion.q
    s2 = a * a - b * b  # = L0*(L0 - 2q) > 0
    s = math.sqrt(s2)
    theta = float(motion.omega * t)
    # atan of the half-angle substitution, shifted back onto a continuous branch
    branch = math.pi * math.floor(theta / (2.0 * math.pi) + 0.5)
    g = (2.0 / s) * (math.atan((a - b) * math.tan(theta / 2.0) / s) + branch)
    osc = -b * math.sin(theta) / (a + b * math.cos(theta))
    return (osc + a * g) / (motion.omega * s2)


def psi(motion: WallMotion, constants: PhysicalConstants, n: int, x, t: float):
    """Moving-wall mode n at positions x (scalar or array) and time t.

    Vanishes at both walls; raises if any x lies outside [0, L(t)].
    """
    n = _check_mode(n)
    x = np.asarray(x, dtype=float)
    L = motion.length(t)
    if np.any(x < 0.0) or np.any(x > L):
        raise ValueError(f"x outside the cavity [0, {L}] at t={t}")
    hbar, m = constants.hbar, constants.mass
    time_phase = np.exp(-1j * (hbar * math.pi**2 * n**2 / (2.0 * m)) * phase_integral(motion, 0.0, t))
    boundary_phase = np.exp(1j * m * motion.length_dot(t) * x * x / (2.0 * hbar * L))
    value = math.sqrt(2.0 / L) * time_phase * boundary_phase * np.sin(n * math.pi * x / L)
    return value if value.shape else complex(value)


def total_phase(motion: WallMotion, constants: PhysicalConstants, n: int, method: str = "closed") -> float:
    """Phase increment mu_n over one full period (unwrapped, positive)."""
    n = _check_mode(n)
    pref = constants.hbar * math.pi**2 * n**2 / (2.0 * constants.mass)
    return pref * phase_integral(motion, 0.0, motion.period(), method=method)


def total_phase_closed_form(
    L0: float, q: float, omega: float, n: int, constants: PhysicalConstants
) -> float:
    """Closed form of the cycle phase for the cosine wall family.

        mu_n = hbar * pi^3 * n^2 * (L0 - q) / (m * omega * (L0*(L0 - 2q))^(3/2))
    """
    n = _check_mode(n)
    if not q < L0 / 2:
        raise ValueError(f"q must be below L0/2 = {L0 / 2}, got {q}")
    num = constants.hbar * math.pi**3 * n**2 * (L0 - q)
    den = constants.mass * omega * (L0 * (L0 - 2.0 * q)) ** 1.5
    return num / den


def _energy_expectation(motion: WallMotion, constants: PhysicalConstants, n: int, t: float) -> float:
    # <H>(t) for mode n: box kinetic term plus the wall-motion contribution
    hbar, m = constants.hbar, constants.mass
    L = motion.length(t)
    Ld = motion.length_dot(t)
    Ldd = motion.length_ddot(t)
    kinetic = hbar**2 * math.pi**2 * n**2 / (2.0 * m * L * L)
    wall = m * (2.0 * math.pi**2 * n**2 - 3.0) / (12.0 * n**2 * math.pi**2) * (Ld * Ld - L * Ldd)
    return kinetic + wall


def dynamical_phase(motion: WallMotion, constants: PhysicalConstants, n: int) -> float:
    """Dynamical phase over one period: (1/hbar) * int <H>(t) dt."""
    n = _check_mode(n)
    val, _ = quad(
        lambda t: _energy_expectation(motion, constants, n, t) / constants.hbar,
        0.0,
        motion.period(),
        **_QUAD_KW,
    )
    return val


def geometric_phase(motion: WallMotion, constants: PhysicalConstants, n: int) -> float:
    """Geometric phase over one period.

        gamma_n = m*(2*pi^2*n^2 - 3)/(12*hbar*pi^2*n^2)
                  * int_0^T [L*L'' - (L')^2] dt

    Vanishes for a static wall and is invariant under q -> -q for the
    cosine family (the integrand is quadratic in the amplitude).
    """
    n = _check_mode(n)
    pref = constants.mass * (2.0 * math.pi**2 * n**2 - 3.0) / (12.0 * constants.hbar * math.pi**2 * n**2)
    val, _ = quad(
        lambda t: motion.length(t) * motion.length_ddot(t) - motion.length_dot(t) ** 2,
        0.0,
        motion.period(),
        **_QUAD_KW,
    )
    return pref * val


def phase_decomposition(motion: WallMotion, constants: PhysicalConstants, n: int) -> PhaseDecomposition:
    """Cycle phase of mode n split as (mu, mu - gamma, gamma)."""
    mu = total_phase(motion, constants, n)
    gamma = geometric_phase(motion, constants, n)
    return PhaseDecomposition(total=mu, dynamical=mu - gamma, geometric=gamma)


def dynamical_phase_mismatched(
    motion_potential: WallMotion,
    motion_boundary: WallMotion,
    constants: PhysicalConstants,
    n: int,
) -> float:
    """Dynamical phase when the potential tracks one wall law and the
    boundary another.

    The energy expectation is taken in the mode of the boundary trajectory
    while the harmonic term uses the frequency induced by the potential
    trajectory. Reduces to :func:`dynamical_phase` when both laws coincide.
    """
    n = _check_mode(n)
    if motion_potential.L0 != motion_boundary.L0:
        raise ValueError(
            f"initial lengths must match, got {motion_potential.L0} and {motion_boundary.L0}"
        )
    if motion_potential.omega != motion_boundary.omega:
        raise ValueError("cyclic comparison requires a common period")
    hbar, m = constants.hbar, constants.mass
    T = motion_boundary.period()
    pref_kin = hbar * math.pi**2 * n**2 / (2.0 * m)
    pref_wall = m * (2.0 * math.pi**2 * n**2 - 3.0) / (12.0 * hbar * n**2 * math.pi**2)

    def wall_term(t):
        L2 = motion_boundary.length(t)
        return (
            motion_boundary.length_dot(t) ** 2
            - motion_potential.length_ddot(t) / motion_potential.length(t) * L2 * L2
        )

    val, _ = quad(wall_term, 0.0, T, **_QUAD_KW)
    return pref_kin * phase_integral(motion_boundary, 0.0, T) + pref_wall * val

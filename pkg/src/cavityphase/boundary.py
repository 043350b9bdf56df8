"""Wall trajectories for the oscillating-wall cavity.

The cavity occupies 0 <= x <= L(t). The left wall is fixed at x = 0 and the
right wall follows the cosine law

    L(t) = L0 + q * (cos(omega * t) - 1),

which starts at rest (L(0) = L0, L'(0) = 0) and is periodic with period
T = 2*pi/omega. The in-cavity harmonic frequency that makes the standard
moving-wall mode functions exact solutions is

    Omega^2(t) = -L''(t) / L(t),

which is negative (inverted oscillator) over part of the cycle.

Everything is expressed in atomic units: hbar = 1, lengths in bohr, masses
in electron masses, and c = 137.035999.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["PhysicalConstants", "WallMotion", "light_crossing_time"]


@dataclass(frozen=True)
class PhysicalConstants:
    """Atomic-unit constants. Only the particle mass is adjustable."""

    mass: float
    hbar: float = 1.0
    c: float = 137.035999

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive and finite, got {self.mass}")
        if self.hbar != 1.0 or self.c != 137.035999:
            raise ValueError("hbar and c are fixed by the unit system")


@dataclass(frozen=True)
class WallMotion:
    """Cosine wall trajectory L(t) = L0 + q*(cos(omega*t) - 1).

    Any additional trajectory family must supply analytic L, L' and L''
    so that the induced frequency Omega^2 = -L''/L carries no
    differentiation noise. |q| < L0/2 keeps L0*(L0 - 2q) > 0, which the
    closed-form cycle integrals require; q >= 0 is the conventional
    orientation (wall swings inward first).
    """

    L0: float
    q: float
    omega: float

    def __post_init__(self):
        if not (self.L0 > 0 and math.isfinite(self.L0)):
            raise ValueError(f"L0 must be positive, got {self.L0}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not (abs(self.q) < self.L0 / 2):
            raise ValueError(
                f"|q| must be below L0/2 = {self.L0 / 2} to keep L(t) > 0, got q = {self.q}"
            )

    def length(self, t):
        """Cavity length L(t); strictly positive."""
        return self.L0 + self.q * (math.cos(self.omega * t) - 1.0)

    def length_dot(self, t):
        """Wall velocity L'(t) = -q*omega*sin(omega*t)."""
        return -self.q * self.omega * math.sin(self.omega * t)

    def length_ddot(self, t):
        """Wall acceleration L''(t) = -q*omega^2*cos(omega*t)."""
        return -self.q * self.omega**2 * math.cos(self.omega * t)

    def omega_squared(self, t):
        """Induced harmonic frequency Omega^2(t) = -L''(t)/L(t)."""
        return -self.length_ddot(t) / self.length(t)

    def period(self):
        """Oscillation period T = 2*pi/omega."""
        return 2.0 * math.pi / self.omega


def light_crossing_time(motion: WallMotion, constants: PhysicalConstants) -> float:
    """Time tau = L0/c for a light signal to cross the cavity at rest."""
    return motion.L0 / constants.c

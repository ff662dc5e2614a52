"""Physical constants, derived scales and the nondimensional coefficient vector."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, NonPositiveFrequency

# Layout of the coefficient vector consumed by the compiled kernels.
C_GAS = 0  # (P0 + 2 sigma / R0) / S
C_EXP = 1  # 3 kappa
C_COMP = 2  # 3 kappa R0 omega0 / c
C_VISC = 3  # 4 mu omega0 / S
C_SURF = 4  # 2 sigma / (R0 S)
C_P0 = 5  # P0 / S
C_AMP = 6  # a / S
C_FREQ = 7  # omega / omega0
C_SHELL = 8  # 4 chi / (R0 S)
C_SVISC = 9  # 4 kappa_s omega0 / (R0 S)
C_COUPLE = 10  # R0 / d
N_COEFFS = 11

_POSITIVE = ("rho", "c", "p0", "r0", "omega", "d")
_NON_NEGATIVE = ("sigma", "mu", "chi", "kappa_s", "a")


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional constants of the three-bubble model, SI units.

    ``a`` is the acoustic pressure amplitude in Pa and ``d`` the common
    center-to-center distance of the equilateral configuration in m.
    """

    rho: float = 998.0
    sigma: float = 0.0725
    mu: float = 0.001
    c: float = 1500.0
    kappa: float = 1.07
    chi: float = 0.22
    kappa_s: float = 2.4e-9
    p0: float = 99297.0
    r0: float = 1.72e-6
    a: float = 1.48e6
    omega: float = 2.87e7
    d: float = 47 * 1.72e-6

    def __post_init__(self):
        for name in _POSITIVE:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        for name in _NON_NEGATIVE:
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be non-negative, got {value!r}")
        if not self.kappa >= 1:
            raise ConfigError(f"kappa must be >= 1, got {self.kappa!r}")
        if not self.d > 2 * self.r0:
            raise ConfigError(
                f"d = {self.d!r} m must exceed 2*r0 = {2 * self.r0!r} m (bubbles overlap)"
            )

    @classmethod
    def from_pressures(cls, p_stat, p_v, **kwargs):
        """Build with ``p0 = p_stat - p_v``."""
        return cls(p0=p_stat - p_v, **kwargs)

    @property
    def d_over_r0(self):
        return self.d / self.r0

    def with_control(self, d_over_r0=None, a=None):
        """Copy with new control parameters; ``d_over_r0`` is in units of r0."""
        changes = {}
        if d_over_r0 is not None:
            changes["d"] = d_over_r0 * self.r0
        if a is not None:
            changes["a"] = a
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DerivedScales:
    omega0: float
    time_scale: float
    period_tau: float


def natural_frequency(p: PhysicalParams) -> DerivedScales:
    """Linear eigenfrequency of an encapsulated bubble and the map period.

    ``omega0**2 = [3 kappa P0 + 2 (3 kappa - 1) sigma / R0 + 4 chi / R0] / (rho R0**2)``
    """
    bracket = (
        3 * p.kappa * p.p0
        + 2 * (3 * p.kappa - 1) * p.sigma / p.r0
        + 4 * p.chi / p.r0
    )
    omega0_sq = bracket / (p.rho * p.r0**2)
    if not omega0_sq > 0:
        raise NonPositiveFrequency(
            f"omega0^2 = {omega0_sq!r} is not positive for {p!r}"
        )
    omega0 = math.sqrt(omega0_sq)
    return DerivedScales(
        omega0=omega0,
        time_scale=1.0 / omega0,
        period_tau=2 * math.pi * omega0 / p.omega,
    )


def coefficients(p: PhysicalParams) -> np.ndarray:
    """Nondimensional coefficient vector for the compiled vector field.

    Pressures are scaled by ``rho R0**2 omega0**2``; radii by ``R0``;
    time by ``1/omega0``.
    """
    omega0 = natural_frequency(p).omega0
    scale = p.rho * p.r0**2 * omega0**2
    out = np.empty(N_COEFFS)
    out[C_GAS] = (p.p0 + 2 * p.sigma / p.r0) / scale
    out[C_EXP] = 3 * p.kappa
    out[C_COMP] = 3 * p.kappa * p.r0 * omega0 / p.c
    out[C_VISC] = 4 * p.mu * omega0 / scale
    out[C_SURF] = 2 * p.sigma / (p.r0 * scale)
    out[C_P0] = p.p0 / scale
    out[C_AMP] = p.a / scale
    out[C_FREQ] = p.omega / omega0
    out[C_SHELL] = 4 * p.chi / (p.r0 * scale)
    out[C_SVISC] = 4 * p.kappa_s * omega0 / (p.r0 * scale)
    out[C_COUPLE] = p.r0 / p.d
    return out

"""Coupled vector field of three Bjerknes-coupled encapsulated bubbles.

The state vector is laid out as ``(r1, r2, r3, u1, u2, u3)`` where ``r`` are
radii in units of R0 and ``u = dr/dtau`` with ``tau = omega0 t``. The
neighbour-acceleration coupling makes the accelerations implicit; they are
recovered from ``M(r) du/dtau = F(r, u, tau)`` with ``M_ii = r_i`` and
``M_ij = (R0/d) r_j**2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import params as P
from .exceptions import RadiusUnderflow, SingularMassMatrix

R_MIN = 0.01
DET_MIN = 1e-12


@dataclass(frozen=True)
class State:
    """Nondimensional phase point of the three-bubble system."""

    r: tuple
    u: tuple
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(x) for x in self.r))
        object.__setattr__(self, "u", tuple(float(x) for x in self.u))
        if len(self.r) != 3 or len(self.u) != 3:
            raise ValueError("State needs three radii and three velocities")

    @classmethod
    def from_vector(cls, y, tau=0.0):
        y = np.asarray(y, dtype=float)
        return cls(r=y[:3], u=y[3:6], tau=float(tau))

    @classmethod
    def equilibrium(cls, perturb_r3=0.0):
        return cls(r=(1.0, 1.0, 1.0 + perturb_r3), u=(0.0, 0.0, 0.0))

    def to_vector(self):
        return np.array(self.r + self.u, dtype=float)

    def permuted(self, perm):
        """Relabel bubbles: bubble ``i`` of the result is bubble ``perm[i]``."""
        return State(
            r=[self.r[k] for k in perm], u=[self.u[k] for k in perm], tau=self.tau
        )


@njit(cache=True)
def _pressure(c, r, u, tau):
    gas = c[P.C_GAS] * r ** (-c[P.C_EXP]) * (1.0 - c[P.C_COMP] * u)
    return (
        gas
        - c[P.C_VISC] * u / r
        - c[P.C_SURF] / r
        - c[P.C_P0]
        - c[P.C_AMP] * np.sin(c[P.C_FREQ] * tau)
        - c[P.C_SHELL] * (1.0 - 1.0 / r)
        - c[P.C_SVISC] * u / (r * r)
    )


@njit(cache=True)
def _pressure_partials(c, r, u):
    """Partial derivatives of the scaled pressure with respect to r and u."""
    gas_r = c[P.C_GAS] * r ** (-c[P.C_EXP])
    d_r = (
        -c[P.C_EXP] * gas_r / r * (1.0 - c[P.C_COMP] * u)
        + c[P.C_VISC] * u / (r * r)
        + c[P.C_SURF] / (r * r)
        - c[P.C_SHELL] / (r * r)
        + 2.0 * c[P.C_SVISC] * u / (r * r * r)
    )
    d_u = -gas_r * c[P.C_COMP] - c[P.C_VISC] / r - c[P.C_SVISC] / (r * r)
    return d_r, d_u


@njit(cache=True)
def _mass_inverse(c, y, inv):
    """Write M(r)^-1 into ``inv`` and return det M."""
    q = c[P.C_COUPLE]
    m00 = y[0]
    m11 = y[1]
    m22 = y[2]
    w0 = q * y[0] * y[0]
    w1 = q * y[1] * y[1]
    w2 = q * y[2] * y[2]
    # column j off-diagonals all equal w_j
    a00, a01, a02 = m00, w1, w2
    a10, a11, a12 = w0, m11, w2
    a20, a21, a22 = w0, w1, m22
    c00 = a11 * a22 - a12 * a21
    c01 = a12 * a20 - a10 * a22
    c02 = a10 * a21 - a11 * a20
    det = a00 * c00 + a01 * c01 + a02 * c02
    if abs(det) < DET_MIN:
        return det
    inv[0, 0] = c00 / det
    inv[1, 0] = c01 / det
    inv[2, 0] = c02 / det
    inv[0, 1] = (a02 * a21 - a01 * a22) / det
    inv[1, 1] = (a00 * a22 - a02 * a20) / det
    inv[2, 1] = (a01 * a20 - a00 * a21) / det
    inv[0, 2] = (a01 * a12 - a02 * a11) / det
    inv[1, 2] = (a02 * a10 - a00 * a12) / det
    inv[2, 2] = (a00 * a11 - a01 * a10) / det
    return det


@njit(cache=True)
def _forcing(c, t, y, f):
    q = c[P.C_COUPLE]
    s0 = y[0] * y[3] * y[3]
    s1 = y[1] * y[4] * y[4]
    s2 = y[2] * y[5] * y[5]
    f[0] = _pressure(c, y[0], y[3], t) - 1.5 * y[3] * y[3] - 2.0 * q * (s1 + s2)
    f[1] = _pressure(c, y[1], y[4], t) - 1.5 * y[4] * y[4] - 2.0 * q * (s0 + s2)
    f[2] = _pressure(c, y[2], y[5], t) - 1.5 * y[5] * y[5] - 2.0 * q * (s0 + s1)


@njit(cache=True)
def bubble_rhs(t, y, c, out):
    inv = np.empty((3, 3))
    f = np.empty(3)
    det = _mass_inverse(c, y, inv)
    if abs(det) < DET_MIN:
        out[:] = np.nan
        return
    _forcing(c, t, y, f)
    out[0] = y[3]
    out[1] = y[4]
    out[2] = y[5]
    for i in range(3):
        out[3 + i] = inv[i, 0] * f[0] + inv[i, 1] * f[1] + inv[i, 2] * f[2]


@njit(cache=True)
def bubble_jac(t, y, c, jac):
    q = c[P.C_COUPLE]
    inv = np.empty((3, 3))
    f = np.empty(3)
    acc = np.empty(3)
    jac[:, :] = 0.0
    for i in range(3):
        jac[i, 3 + i] = 1.0
    det = _mass_inverse(c, y, inv)
    if abs(det) < DET_MIN:
        jac[3:, :] = np.nan
        return
    _forcing(c, t, y, f)
    for i in range(3):
        acc[i] = inv[i, 0] * f[0] + inv[i, 1] * f[1] + inv[i, 2] * f[2]

    # G[:, k] = dF/dy_k - (dM/dy_k) acc, then rows 3..5 of J are M^-1 G
    g = np.zeros((3, 6))
    for i in range(3):
        dp_r, dp_u = _pressure_partials(c, y[i], y[3 + i])
        g[i, i] += dp_r
        g[i, 3 + i] += dp_u - 3.0 * y[3 + i]
        for j in range(3):
            if j != i:
                g[i, j] -= 2.0 * q * y[3 + j] * y[3 + j]
                g[i, 3 + j] -= 4.0 * q * y[j] * y[3 + j]
    for k in range(3):
        for i in range(3):
            if i == k:
                g[i, k] -= acc[k]
            else:
                g[i, k] -= 2.0 * q * y[k] * acc[k]
    for i in range(3):
        for k in range(6):
            jac[3 + i, k] = inv[i, 0] * g[0, k] + inv[i, 1] * g[1, k] + inv[i, 2] * g[2, k]


def _vector(s):
    if isinstance(s, State):
        return s.to_vector(), s.tau
    y = np.asarray(s, dtype=float)
    return y, 0.0


def _check(p, y):
    if np.min(y[:3]) < R_MIN:
        raise RadiusUnderflow(
            f"radius {np.min(y[:3])!r} below r_min={R_MIN} at state {y.tolist()}"
        )
    c = P.coefficients(p)
    inv = np.empty((3, 3))
    det = _mass_inverse(c, y, inv)
    if abs(det) < DET_MIN:
        raise SingularMassMatrix(
            f"|det M| = {abs(det):.3e} < {DET_MIN} at state {y.tolist()} for {p!r}"
        )
    return c


def pressure_term(p: P.PhysicalParams, r_i: float, u_i: float, tau: float) -> float:
    """Scaled bubble-wall pressure ``P_i / (rho R0**2 omega0**2)``."""
    if not r_i > 0:
        raise RadiusUnderflow(f"radius {r_i!r} is not positive")
    return float(_pressure(P.coefficients(p), float(r_i), float(u_i), float(tau)))


def vector_field(p: P.PhysicalParams, s) -> np.ndarray:
    """Time derivative ``(dr/dtau, du/dtau)`` at ``s``.

    ``s`` is a :class:`State` or a 6-vector (then ``tau = 0``).
    """
    y, tau = _vector(s)
    c = _check(p, y)
    out = np.empty(6)
    bubble_rhs(tau, y, c, out)
    return out


def jacobian(p: P.PhysicalParams, s) -> np.ndarray:
    """Analytic 6x6 Jacobian of :func:`vector_field` at fixed ``tau``."""
    y, tau = _vector(s)
    c = _check(p, y)
    out = np.empty((6, 6))
    bubble_jac(tau, y, c, out)
    return out


def jacobian_fd(p: P.PhysicalParams, s, rel_step=1e-7) -> np.ndarray:
    """Central finite-difference Jacobian; used to cross-check :func:`jacobian`."""
    y, tau = _vector(s)
    c = _check(p, y)
    out = np.empty((6, 6))
    fp = np.empty(6)
    fm = np.empty(6)
    for k in range(6):
        h = rel_step * max(abs(y[k]), 1.0)
        yp = y.copy()
        ym = y.copy()
        yp[k] += h
        ym[k] -= h
        bubble_rhs(tau, yp, c, fp)
        bubble_rhs(tau, ym, c, fm)
        out[:, k] = (fp - fm) / (2 * h)
    return out

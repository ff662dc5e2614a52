"""Adaptive Dormand-Prince 5(4) propagation with optional tangent flow.

Tangent vectors are integrated with the same Runge-Kutta stages as the state
(the variational equations ``dV/dt = J(t, y) V`` are appended to the state),
but only the state enters the error norm, so tangents ride the state's step
sequence. The same stages also integrate ``trace J`` along the trajectory,
which gives the phase-volume contraction used for divergence checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .exceptions import (
    ConfigError,
    RadiusUnderflow,
    StepBudgetExceeded,
    StepUnderflow,
)
from .model import R_MIN, State
from .systems import System, bubble_system

OK, RUPTURE, BUDGET, UNDERFLOW = 0, 1, 2, 3
H_MIN = 1e-14

# Dormand & Prince (1980) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_max: float = 0.5
    max_steps: int = 1_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            value = getattr(self, name)
            if not 0 < value < 1e-2:
                raise ConfigError(f"{name} must lie in (0, 1e-2), got {value!r}")
        for name in ("h_init", "h_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")


@dataclass
class TangentFrame:
    """Tangent basis stored column-wise: ``vectors[:, k]`` is the k-th vector."""

    vectors: np.ndarray
    log_norms: np.ndarray = field(default=None)

    def __post_init__(self):
        self.vectors = np.array(self.vectors, dtype=float)
        if self.log_norms is None:
            self.log_norms = np.zeros(self.vectors.shape[1])

    @classmethod
    def identity(cls, dim, count=None):
        return cls(np.eye(dim)[:, : dim if count is None else count])

    def orthonormalize(self):
        """QR re-orthonormalization; returns the log-stretches of this step."""
        q, r = np.linalg.qr(self.vectors)
        diag = np.diag(r)
        signs = np.where(diag < 0, -1.0, 1.0)
        self.vectors = q * signs
        stretch = np.log(np.abs(diag))
        self.log_norms = self.log_norms + stretch
        return stretch


@njit
def _deriv(rhs, jac, c, t, z, n, m, out, jbuf):
    rhs(t, z[:n], c, out[:n])
    if m == 0:
        return 0.0
    jac(t, z[:n], c, jbuf)
    tr = 0.0
    for i in range(n):
        tr += jbuf[i, i]
    for i in range(n):
        for k in range(m):
            s = 0.0
            for j in range(n):
                s += jbuf[i, j] * z[n + j * m + k]
            out[n + i * m + k] = s
    return tr


# not cached: the on-disk cache cannot key on function-typed arguments
@njit
def _integrate(rhs, jac, c, z, n, m, t, t_end, h, rtol, atol, hmax,
               max_steps, rmin, nrad):
    """Advance ``z`` in place from ``t`` to ``t_end``.

    Returns ``(status, t, h_next, steps, trace_integral)``.
    """
    size = z.shape[0]
    k1 = np.empty(size)
    k2 = np.empty(size)
    k3 = np.empty(size)
    k4 = np.empty(size)
    k5 = np.empty(size)
    k6 = np.empty(size)
    k7 = np.empty(size)
    w = np.empty(size)
    znew = np.empty(size)
    jbuf = np.empty((n, n))
    trace_int = 0.0
    steps = 0
    if t_end == t:
        return OK, t, h, steps, trace_int
    direction = 1.0 if t_end > t else -1.0
    tr1 = _deriv(rhs, jac, c, t, z, n, m, k1, jbuf)
    err_prev = 1e-4
    rejected = False
    h_keep = h
    while direction * (t_end - t) > 0:
        if steps >= max_steps:
            return BUDGET, t, h, steps, trace_int
        if h > hmax:
            h = hmax
        last = False
        h_keep = h
        if h >= direction * (t_end - t):
            h = direction * (t_end - t)
            last = True
        hs = direction * h

        for i in range(size):
            w[i] = z[i] + hs * _A21 * k1[i]
        _deriv(rhs, jac, c, t + _C2 * hs, w, n, m, k2, jbuf)  # b2 = 0
        for i in range(size):
            w[i] = z[i] + hs * (_A31 * k1[i] + _A32 * k2[i])
        tr3 = _deriv(rhs, jac, c, t + _C3 * hs, w, n, m, k3, jbuf)
        for i in range(size):
            w[i] = z[i] + hs * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        tr4 = _deriv(rhs, jac, c, t + _C4 * hs, w, n, m, k4, jbuf)
        for i in range(size):
            w[i] = z[i] + hs * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i]
                                + _A54 * k4[i])
        tr5 = _deriv(rhs, jac, c, t + _C5 * hs, w, n, m, k5, jbuf)
        for i in range(size):
            w[i] = z[i] + hs * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                + _A64 * k4[i] + _A65 * k5[i])
        tr6 = _deriv(rhs, jac, c, t + hs, w, n, m, k6, jbuf)
        for i in range(size):
            znew[i] = z[i] + hs * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                   + _B5 * k5[i] + _B6 * k6[i])
        t_new = t_end if last else t + hs
        tr7 = _deriv(rhs, jac, c, t_new, znew, n, m, k7, jbuf)
        steps += 1

        acc = 0.0
        for i in range(n):
            e = hs * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                      + _E6 * k6[i] + _E7 * k7[i])
            sc = atol + rtol * max(abs(z[i]), abs(znew[i]))
            acc += (e / sc) ** 2
        err = np.sqrt(acc / n)

        if err <= 1.0:
            trace_int += hs * (_B1 * tr1 + _B3 * tr3 + _B4 * tr4 + _B5 * tr5
                               + _B6 * tr6)
            t = t_new
            for i in range(size):
                z[i] = znew[i]
                k1[i] = k7[i]
            tr1 = tr7
            for i in range(nrad):
                if z[i] < rmin:
                    return RUPTURE, t, h, steps, trace_int
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * err ** -0.14 * err_prev ** 0.08
                fac = min(5.0, max(0.2, fac))
            if rejected:
                fac = min(fac, 1.0)
            err_prev = max(err, 1e-4)
            rejected = False
            h = h * fac
            if last and h_keep > h:
                h = h_keep
        else:
            if math.isnan(err):
                fac = 0.1
            else:
                fac = max(0.2, 0.9 * err ** -0.2)
            h = h * fac
            rejected = True
            if h < H_MIN:
                return UNDERFLOW, t, h, steps, trace_int
    return OK, t, h, steps, trace_int


class Propagator:
    """Stateful driver around the compiled kernel for one trajectory.

    Keeps the adaptive step size between calls so that repeated landings on
    stroboscopic times do not restart the controller.
    """

    def __init__(self, system: System, cfg: IntegratorConfig, y0, tau0=0.0,
                 n_tangents=0, r_min=R_MIN):
        self.system = system
        self.cfg = cfg
        self.n = system.dim
        self.m = n_tangents
        self.z = np.zeros(self.n + self.n * self.m)
        self.z[: self.n] = np.asarray(y0, dtype=float)
        if self.m:
            self.z[self.n:] = np.eye(self.n)[:, : self.m].ravel()
        self.tau = float(tau0)
        self.h = cfg.h_init
        self.r_min = r_min
        self.steps = 0
        self.trace_integral = 0.0

    @property
    def y(self):
        return self.z[: self.n]

    @property
    def tangents(self):
        return self.z[self.n:].reshape(self.n, self.m)

    def set_tangents(self, vectors):
        self.z[self.n:] = np.asarray(vectors, dtype=float).ravel()

    def advance(self, tau_target):
        s = self.system
        status, tau, h, steps, tr = _integrate(
            s.rhs, s.jac, s.coeffs, self.z, self.n, self.m, self.tau,
            float(tau_target), self.h, self.cfg.rel_tol, self.cfg.abs_tol,
            min(self.cfg.h_max, s.max_step), self.cfg.max_steps, self.r_min, s.n_radii,
        )
        self.tau, self.h = tau, h
        self.steps += steps
        self.trace_integral += tr
        if status == RUPTURE:
            raise RadiusUnderflow(
                f"radius fell below r_min={self.r_min} at tau={tau!r}", tau=tau)
        if status == BUDGET:
            raise StepBudgetExceeded(
                f"{self.cfg.max_steps} steps used before tau={tau_target!r}"
                f" (reached tau={tau!r})", tau=tau)
        if status == UNDERFLOW:
            raise StepUnderflow(f"step size below {H_MIN} at tau={tau!r}", tau=tau)


def _as_system(p):
    return p if isinstance(p, System) else bubble_system(p)


def _unpack(s):
    if isinstance(s, State):
        return s.to_vector(), s.tau
    return np.asarray(s, dtype=float), 0.0


def _pack(template, y, tau):
    if isinstance(template, State):
        return State.from_vector(y, tau)
    return y.copy()


def step_to(p, cfg: IntegratorConfig, s, tau_target):
    """Propagate ``s`` to exactly ``tau_target``.

    ``p`` is a :class:`~tribubble.params.PhysicalParams` or a prepared
    :class:`~tribubble.systems.System`; ``s`` a :class:`State` (or a plain
    vector starting at ``tau = 0`` for harness fields).
    """
    y, tau = _unpack(s)
    if tau_target < tau:
        raise ValueError(f"tau_target {tau_target!r} precedes state time {tau!r}")
    prop = Propagator(_as_system(p), cfg, y, tau)
    prop.advance(tau_target)
    return _pack(s, prop.y, prop.tau)


def step_with_tangents(p, cfg: IntegratorConfig, s, frame: TangentFrame, tau_target):
    """Propagate ``s`` and every column of ``frame`` under the linearized flow."""
    y, tau = _unpack(s)
    if tau_target < tau:
        raise ValueError(f"tau_target {tau_target!r} precedes state time {tau!r}")
    vectors = np.asarray(frame.vectors, dtype=float)
    prop = Propagator(_as_system(p), cfg, y, tau, n_tangents=vectors.shape[1])
    prop.set_tangents(vectors)
    prop.advance(tau_target)
    out = TangentFrame(prop.tangents.copy(), np.array(frame.log_norms, dtype=float))
    return _pack(s, prop.y, prop.tau), out

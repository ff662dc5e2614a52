"""Vector fields packaged for the integrator, including validation harnesses.

A :class:`System` bundles a compiled right-hand side ``rhs(t, y, c, out)``,
its Jacobian ``jac(t, y, c, out)``, the coefficient vector ``c`` and the
stroboscopic period. The Lyapunov, section and sweep layers only see this
interface, so the linear and Lorenz harness fields exercise exactly the same
machinery as the bubble model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import model
from .params import PhysicalParams, coefficients, natural_frequency


@dataclass(frozen=True, eq=False)
class System:
    name: str
    rhs: object
    jac: object
    coeffs: np.ndarray
    dim: int
    period: float
    n_radii: int = 0
    max_step: float = float("inf")
    params: PhysicalParams | None = field(default=None, repr=False)


def bubble_system(p: PhysicalParams) -> System:
    return System(
        name="bubbles",
        rhs=model.bubble_rhs,
        jac=model.bubble_jac,
        coeffs=coefficients(p),
        dim=6,
        period=natural_frequency(p).period_tau,
        n_radii=3,
        params=p,
    )


@njit(cache=True)
def linear_rhs(t, y, c, out):
    for i in range(y.shape[0]):
        out[i] = c[i] * y[i]


@njit(cache=True)
def linear_jac(t, y, c, jac):
    jac[:, :] = 0.0
    for i in range(y.shape[0]):
        jac[i, i] = c[i]


def linear_system(rates=(-1.0, -2.0, -3.0, -4.0, -5.0, -6.0), period=1.0) -> System:
    """``dy_i/dt = rates[i] * y_i``; its Lyapunov spectrum is ``rates``.

    The state decays to zero, so the error controller alone would let the
    step grow until the (uncontrolled) tangents lose accuracy; the step is
    therefore capped.
    """
    rates = np.asarray(rates, dtype=float)
    return System("linear", linear_rhs, linear_jac, rates, len(rates), period,
                  max_step=0.01)


@njit(cache=True)
def lorenz_rhs(t, y, c, out):
    out[0] = c[0] * (y[1] - y[0])
    out[1] = y[0] * (c[1] - y[2]) - y[1]
    out[2] = y[0] * y[1] - c[2] * y[2]


@njit(cache=True)
def lorenz_jac(t, y, c, jac):
    jac[0, 0] = -c[0]
    jac[0, 1] = c[0]
    jac[0, 2] = 0.0
    jac[1, 0] = c[1] - y[2]
    jac[1, 1] = -1.0
    jac[1, 2] = -y[0]
    jac[2, 0] = y[1]
    jac[2, 1] = y[0]
    jac[2, 2] = -c[2]


def lorenz_system(sigma=10.0, rho=28.0, beta=8.0 / 3.0, period=0.5) -> System:
    return System("lorenz", lorenz_rhs, lorenz_jac,
                  np.array([sigma, rho, beta]), 3, period)


LORENZ_START = np.array([1.0, 1.0, 20.0])


def harness_field(name: str) -> System:
    """Validation field by name: ``linear`` or ``lorenz``."""
    if name == "linear":
        return linear_system()
    if name == "lorenz":
        return lorenz_system()
    raise ValueError(f"unknown test field {name!r}; expected 'linear' or 'lorenz'")


def default_start(system: System) -> np.ndarray:
    """Symmetry-broken start used when the caller gives no initial state."""
    if system.name == "bubbles":
        return model.State.equilibrium(perturb_r3=1e-3).to_vector()
    if system.name == "lorenz":
        return LORENZ_START.copy()
    return np.ones(system.dim)

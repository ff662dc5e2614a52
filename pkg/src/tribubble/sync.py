"""Synchronization-manifold membership, dwell fractions and the reduced field.

Points are in state layout ``(r1, r2, r3, u1, u2, u3)``. A point lies in the
partial manifold ``S_ij`` when ``|r_i - r_j| + |u_i - u_j| < eps`` and in the
complete manifold ``S`` when at least two of the pairwise criteria hold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import params as P
from .exceptions import RadiusUnderflow
from .model import R_MIN, _pressure
from .systems import System

EPS = 1e-6
PAIRS = ((0, 1), (0, 2), (1, 2))

TAG_NONE, TAG_S12, TAG_S13, TAG_S23, TAG_S = range(5)
TAG_NAMES = ("none", "S12", "S13", "S23", "S")


@dataclass(frozen=True)
class SyncFlags:
    s12: bool
    s13: bool
    s23: bool
    s: bool

    def partial_only(self):
        """``S*_ij = S_ij minus S`` for the three pairs."""
        return (self.s12 and not self.s, self.s13 and not self.s,
                self.s23 and not self.s)


def _vector(state):
    if hasattr(state, "to_vector"):
        return state.to_vector()
    return np.asarray(state, dtype=float)


def pair_distances(points):
    """L1 distances to S12, S13, S23 for one point or an (N, 6) array."""
    y = np.asarray(points, dtype=float)
    return np.stack(
        [np.abs(y[..., i] - y[..., j]) + np.abs(y[..., 3 + i] - y[..., 3 + j])
         for i, j in PAIRS],
        axis=-1,
    )


def membership(s, eps=EPS) -> SyncFlags:
    pair = pair_distances(_vector(s)) < eps
    return SyncFlags(bool(pair[0]), bool(pair[1]), bool(pair[2]), bool(pair.sum() >= 2))


def in_complete_sync(y, eps=EPS):
    pair = pair_distances(y) < eps
    return bool(pair.sum() >= 2)


def tags(points, eps=EPS) -> np.ndarray:
    """Integer tag per point: one of ``TAG_NONE .. TAG_S``."""
    pair = pair_distances(np.atleast_2d(points)) < eps
    out = np.full(pair.shape[0], TAG_NONE, dtype=np.int8)
    out[pair[:, 0]] = TAG_S12
    out[pair[:, 1]] = TAG_S13
    out[pair[:, 2]] = TAG_S23
    out[pair.sum(axis=1) >= 2] = TAG_S
    return out


@dataclass(frozen=True)
class SyncFractions:
    """Fractions of stroboscopic samples spent in S, in some S*_ij, or in none.

    ``frac_S12`` etc. count ``S*_ij`` (pairwise synchronous but not in S), so
    they add up to ``frac_partial``.
    """

    frac_S: float
    frac_partial: float
    frac_async: float
    frac_S12: float
    frac_S13: float
    frac_S23: float
    n_samples: int

    def as_row(self):
        return (self.frac_S, self.frac_partial, self.frac_async,
                self.frac_S12, self.frac_S13, self.frac_S23)


def fractions_from_tags(tag_array) -> SyncFractions:
    t = np.asarray(tag_array)
    n = len(t)
    if n == 0:
        raise ValueError("cannot compute dwell fractions of an empty cloud")
    f_s = np.count_nonzero(t == TAG_S) / n
    f_12 = np.count_nonzero(t == TAG_S12) / n
    f_13 = np.count_nonzero(t == TAG_S13) / n
    f_23 = np.count_nonzero(t == TAG_S23) / n
    f_p = np.count_nonzero((t >= TAG_S12) & (t <= TAG_S23)) / n
    # 1 - x rounds so that (f_s + f_p) + f_async == 1 exactly for x in [0, 1]
    f_async = 1.0 - (f_s + f_p)
    return SyncFractions(f_s, f_p, f_async, f_12, f_13, f_23, n)


def dwell_fractions(cloud) -> SyncFractions:
    """Dwell fractions from a :class:`~tribubble.poincare.SectionCloud` or tag array."""
    tag_array = getattr(cloud, "tags", None)
    if tag_array is None:
        tag_array = cloud
    return fractions_from_tags(tag_array)


@njit(cache=True)
def _sync_accel(c, r, u, t, neighbours, q):
    force = _pressure(c, r, u, t) - 1.5 * u * u - 2.0 * neighbours * q * r * u * u
    return force / (r + neighbours * q * r * r)


@njit(cache=True)
def reduced_rhs(t, y, c, out):
    """Completely synchronous motion of ``c[N_COEFFS]`` equidistant neighbours."""
    out[0] = y[1]
    out[1] = _sync_accel(c, y[0], y[1], t, c[P.N_COEFFS], c[P.C_COUPLE])


@njit(cache=True)
def reduced_jac(t, y, c, jac):
    h = 1e-7 * max(abs(y[0]), 1.0)
    k = 1e-7 * max(abs(y[1]), 1.0)
    n = c[P.N_COEFFS]
    q = c[P.C_COUPLE]
    jac[0, 0] = 0.0
    jac[0, 1] = 1.0
    jac[1, 0] = (_sync_accel(c, y[0] + h, y[1], t, n, q)
                 - _sync_accel(c, y[0] - h, y[1], t, n, q)) / (2 * h)
    jac[1, 1] = (_sync_accel(c, y[0], y[1] + k, t, n, q)
                 - _sync_accel(c, y[0], y[1] - k, t, n, q)) / (2 * k)


def synchronous_field(p: P.PhysicalParams, r, u, tau, n_bubbles=3):
    """Reduced field of ``n_bubbles`` identical equidistant bubbles in lockstep."""
    if not r > 0:
        raise RadiusUnderflow(f"radius {r!r} is not positive")
    c = P.coefficients(p)
    return float(u), float(_sync_accel(c, float(r), float(u), float(tau),
                                       float(n_bubbles - 1), c[P.C_COUPLE]))


def reduced_synchronous_field(p: P.PhysicalParams, r, u, tau):
    """``(dr/dtau, du/dtau)`` on the complete-synchronization manifold."""
    return synchronous_field(p, r, u, tau, n_bubbles=3)


def two_bubble_synchronous_field(p: P.PhysicalParams, r, u, tau):
    """In-phase motion of a symmetric bubble pair at distance ``p.d``."""
    return synchronous_field(p, r, u, tau, n_bubbles=2)


def reduced_system(p: P.PhysicalParams, n_bubbles=3) -> System:
    """Two-dimensional ``(r, u)`` system for the integrator."""
    c = np.append(P.coefficients(p), float(n_bubbles - 1))
    return System(
        name=f"synchronous-{n_bubbles}",
        rhs=reduced_rhs,
        jac=reduced_jac,
        coeffs=c,
        dim=2,
        period=P.natural_frequency(p).period_tau,
        n_radii=1,
        params=p,
    )


__all__ = [
    "EPS", "R_MIN", "SyncFlags", "SyncFractions", "TAG_NAMES", "dwell_fractions",
    "fractions_from_tags", "in_complete_sync", "membership", "pair_distances",
    "reduced_synchronous_field", "reduced_system", "synchronous_field", "tags",
    "two_bubble_synchronous_field",
]

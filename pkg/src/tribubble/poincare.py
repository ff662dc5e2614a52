"""Stroboscopic sections, map-period detection and attractor-component counting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import sync
from .integrator import IntegratorConfig, Propagator, _as_system, _unpack

CLUSTER_EPS = 1e-3
PERIOD_EPS = 1e-6
KEEP_POINTS = 4096


@dataclass
class SectionCloud:
    """Map points sampled at ``tau_k = k * period`` with synchronization tags.

    ``points`` rows use the state layout ``(r1, r2, r3, u1, u2, u3)``;
    ``k`` holds the integer period index of each row.
    """

    points: np.ndarray
    k: np.ndarray
    period: float
    tags: np.ndarray = field(default=None)
    params: object = field(default=None, repr=False)
    eps: float = sync.EPS

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.k = np.asarray(self.k, dtype=np.int64)
        if self.tags is None:
            if self.points.shape[1] == 6:
                self.tags = sync.tags(self.points, self.eps)
            else:
                self.tags = np.full(len(self.points), sync.TAG_NONE, dtype=np.int8)

    def __len__(self):
        return len(self.points)

    @property
    def taus(self):
        return self.k * self.period

    @classmethod
    def from_points(cls, points, period=1.0, first_k=1, params=None):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k = np.arange(first_k, first_k + len(points))
        return cls(points, k, period, params=params)


def sample_section(p, cfg: IntegratorConfig, s0, skip_periods=1000,
                   keep_points=KEEP_POINTS) -> SectionCloud:
    """Settle for ``skip_periods`` forcing periods, then record ``keep_points``
    stroboscopic samples.

    Raises :class:`~tribubble.exceptions.RadiusUnderflow` on rupture.
    """
    if skip_periods < 0 or keep_points <= 0:
        raise ValueError("skip_periods must be >= 0 and keep_points > 0")
    system = _as_system(p)
    y0, tau0 = _unpack(s0)
    period = system.period
    k0 = round(tau0 / period)
    prop = Propagator(system, cfg, y0, tau0)
    for k in range(1, skip_periods + 1):
        prop.advance((k0 + k) * period)
    points = np.empty((keep_points, system.dim))
    first = k0 + skip_periods + 1
    for i in range(keep_points):
        prop.advance((first + i) * period)
        points[i] = prop.y
    return SectionCloud(points, np.arange(first, first + keep_points), period,
                        params=system.params)


def _points(cloud):
    return cloud.points if isinstance(cloud, SectionCloud) else np.atleast_2d(cloud)


def detect_period(cloud, max_period=64, eps=PERIOD_EPS):
    """Smallest ``n <= max_period`` with every point within ``eps`` (L-inf) of
    the point ``n`` samples later, or ``None``."""
    x = _points(cloud)
    if len(x) < 4 * max_period:
        raise ValueError(
            f"need at least {4 * max_period} points to test periods up to {max_period}"
        )
    for n in range(1, max_period + 1):
        if np.max(np.abs(x[n:] - x[:-n])) <= eps:
            return n
    return None


def count_components(cloud, cluster_eps=CLUSTER_EPS):
    """Connected components of the graph joining points within ``cluster_eps``
    in the L-inf norm (single linkage)."""
    x = _points(cloud)
    if len(x) == 0:
        raise ValueError("empty cloud")
    pairs = cKDTree(x).query_pairs(cluster_eps, p=np.inf, output_type="ndarray")
    graph = coo_matrix(
        (np.ones(len(pairs), dtype=np.int8), (pairs[:, 0], pairs[:, 1])),
        shape=(len(x), len(x)),
    )
    n, _ = connected_components(graph, directed=False)
    return int(n)

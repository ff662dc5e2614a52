"""Two-parameter regime charts and one-parameter path scans with continuation.

Chart pixels are seeded the way multistable systems need: an attractor is
settled at a seed point on the largest-distance column, continued up and
down that column in the amplitude, and every row is then continued towards
smaller distances from its column pixel. Rows are independent once the
column is done and can run in worker processes; results do not depend on
the number of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import sync
from .config import AnalysisSettings
from .exceptions import RadiusUnderflow, StepBudgetExceeded, StepUnderflow
from .integrator import IntegratorConfig, Propagator
from .lyapunov import RegimeClass, benettin_spectrum, classify
from .params import PhysicalParams
from .poincare import count_components, detect_period
from .systems import bubble_system, default_start, harness_field

FAILURES = (RadiusUnderflow, StepBudgetExceeded, StepUnderflow)
log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemFactory:
    """Picklable map from a control point ``(d/R0, a)`` to a prepared system."""

    params: PhysicalParams = field(default_factory=PhysicalParams)
    test_field: str | None = None

    def __call__(self, d_over_r0, a):
        if self.test_field is not None:
            return harness_field(self.test_field)
        return bubble_system(self.params.with_control(d_over_r0=d_over_r0, a=a))


@dataclass(frozen=True)
class PixelResult:
    d_over_r0: float
    a: float
    exponents: np.ndarray
    regime: RegimeClass
    converged: bool
    n_periods: int
    final_state: np.ndarray | None = field(default=None, repr=False)
    error: str | None = None


@dataclass(frozen=True)
class ChartSpec:
    d_range: tuple = (20.0, 47.0)
    a_range: tuple = (1.3e6, 1.7e6)
    nx: int = 200
    ny: int = 200
    seed: tuple = (47.0, 1.48e6)
    transient_periods: int = 1_000
    accumulate_periods: int = 20_000
    seed_settle_periods: int = 10_000
    zero_tol: float = 1e-4

    def __post_init__(self):
        (d0, d1), (a0, a1) = self.d_range, self.a_range
        if not (d1 > d0 and a1 > a0):
            raise ValueError("chart ranges must be increasing and non-degenerate")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("pixel counts must be positive")
        sd, sa = self.seed
        if not (d0 <= sd <= d1 and a0 <= sa <= a1):
            raise ValueError(f"seed {self.seed} lies outside the chart")

    @property
    def d_values(self):
        return np.linspace(*self.d_range, self.nx)

    @property
    def a_values(self):
        return np.linspace(*self.a_range, self.ny)

    @property
    def seed_index(self):
        """(column, row) of the pixel nearest to the seed point."""
        return (int(np.argmin(np.abs(self.d_values - self.seed[0]))),
                int(np.argmin(np.abs(self.a_values - self.seed[1]))))

    @classmethod
    def from_settings(cls, s: AnalysisSettings, **kwargs):
        return cls(transient_periods=s.chart_transient_periods,
                   accumulate_periods=s.chart_accumulate_periods,
                   seed_settle_periods=s.seed_settle_periods,
                   zero_tol=s.zero_tol, **kwargs)


def _settle(system, cfg, y0, periods):
    prop = Propagator(system, cfg, y0)
    for k in range(1, periods + 1):
        prop.advance(k * system.period)
    return prop.y.copy()


def compute_pixel(factory, cfg, d_over_r0, a, y0, transient, accumulate, zero_tol=1e-4):
    system = factory(d_over_r0, a)
    try:
        spec = benettin_spectrum(system, cfg, y0, transient, accumulate)
    except FAILURES as exc:
        return PixelResult(d_over_r0, a, np.full(system.dim, np.nan),
                           RegimeClass.ESCAPE_RUPTURE, False, 0, None, str(exc))
    return PixelResult(d_over_r0, a, spec.exponents, classify(spec, zero_tol),
                       spec.converged, spec.n_periods, spec.final_state)


def _continue(factory, cfg, points, y_start, transient, accumulate, zero_tol):
    """Compute ``points`` in order, each seeded by the last successful state."""
    out = []
    y = y_start
    for d_over_r0, a in points:
        pixel = compute_pixel(factory, cfg, d_over_r0, a, y, transient, accumulate, zero_tol)
        out.append(pixel)
        if pixel.final_state is not None:
            y = pixel.final_state
    return out


def _row_task(args):
    return _continue(*args)


def run_chart(spec: ChartSpec, factory=None, cfg=None, workers=1, y0=None):
    """Regime chart as a ``(ny, nx)`` object array of :class:`PixelResult`.

    Row ``j`` holds amplitude ``spec.a_values[j]``; column ``i`` distance
    ``spec.d_values[i]``.
    """
    factory = factory or SystemFactory()
    cfg = cfg or IntegratorConfig()
    ds, as_ = spec.d_values, spec.a_values
    col, row0 = spec.seed_index
    seed_system = factory(*spec.seed)
    start = default_start(seed_system) if y0 is None else np.asarray(y0, dtype=float)
    try:
        seed_state = _settle(seed_system, cfg, start, spec.seed_settle_periods)
    except FAILURES:
        seed_state = start

    run = (spec.transient_periods, spec.accumulate_periods, spec.zero_tol)
    grid = np.empty((spec.ny, spec.nx), dtype=object)
    up = _continue(factory, cfg, [(ds[col], as_[j]) for j in range(row0, spec.ny)],
                   seed_state, *run)
    seed_pixel = up[0]
    down_start = seed_pixel.final_state if seed_pixel.final_state is not None else seed_state
    down = _continue(factory, cfg, [(ds[col], as_[j]) for j in range(row0 - 1, -1, -1)],
                     down_start, *run)
    for j, pixel in zip(range(row0, spec.ny), up):
        grid[j, col] = pixel
    for j, pixel in zip(range(row0 - 1, -1, -1), down):
        grid[j, col] = pixel

    tasks = []
    for j in range(spec.ny):
        column_pixel = grid[j, col]
        y_row = column_pixel.final_state
        if y_row is None:
            y_row = seed_state
        tasks.append((factory, cfg, [(ds[i], as_[j]) for i in range(col - 1, -1, -1)],
                      y_row, *run))
    if workers > 1 and spec.nx > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_task, tasks))
    else:
        rows = [_row_task(t) for t in tasks]
    for j, row in enumerate(rows):
        for i, pixel in zip(range(col - 1, -1, -1), row):
            grid[j, i] = pixel
    # beyond-seed columns (seed not on the last column) continue rightwards
    if col < spec.nx - 1:
        right = [(factory, cfg, [(ds[i], as_[j]) for i in range(col + 1, spec.nx)],
                  grid[j, col].final_state if grid[j, col].final_state is not None
                  else seed_state, *run) for j in range(spec.ny)]
        for j, row in enumerate(map(_row_task, right)):
            for i, pixel in zip(range(col + 1, spec.nx), row):
                grid[j, i] = pixel
    return grid


NAMED_PATHS = {
    "AB": ((36.5, 1.4e6), (36.5, 1.52e6)),
    "CD": ((35.0, 1.1416e6), (46.5, 1.56e6)),
    "EF": ((26.0, 1.3e6), (16.5, 1.3e6)),
    "GH": ((16.5, 1.4e6), (22.0, 1.4e6)),
}


@dataclass(frozen=True)
class PathSpec:
    """Straight segment in the ``(d/R0, a)`` plane sampled at ``n_samples`` points.

    ``direction`` ``"forward"`` walks from ``start`` to ``end``. With policy
    ``"continuation"`` each sample starts from the previous sample's final
    state; with ``"fixed"`` every sample starts from ``initial_state``.
    """

    start: tuple
    end: tuple
    n_samples: int = 200
    direction: str = "forward"
    policy: str = "continuation"
    initial_state: tuple | None = None
    settle_periods: int = 1_000
    transient_periods: int = 1_000
    accumulate_periods: int = 20_000
    keep_points: int = 4096
    cluster_eps: float = 1e-3
    period_eps: float = 1e-6
    max_period: int = 64
    membership_eps: float = 1e-6
    zero_tol: float = 1e-4

    def __post_init__(self):
        if tuple(self.start) == tuple(self.end):
            raise ValueError("path endpoints must differ")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be 'forward' or 'backward'")
        if self.policy not in ("continuation", "fixed"):
            raise ValueError("policy must be 'continuation' or 'fixed'")
        if self.policy == "fixed" and self.initial_state is None:
            raise ValueError("the fixed policy needs an initial_state")

    @classmethod
    def named(cls, name, **kwargs):
        start, end = NAMED_PATHS[name.upper()]
        return cls(start=start, end=end, **kwargs)

    def points(self):
        s = np.linspace(0.0, 1.0, self.n_samples)
        if self.direction == "backward":
            s = s[::-1]
        (d0, a0), (d1, a1) = self.start, self.end
        return [(d0 + t * (d1 - d0), a0 + t * (a1 - a0)) for t in s]

    def param_value(self, d_over_r0, a):
        """The varying coordinate; the path fraction when both vary."""
        (d0, a0), (d1, a1) = self.start, self.end
        if a0 == a1:
            return d_over_r0
        if d0 == d1:
            return a
        return (d_over_r0 - d0) / (d1 - d0)


@dataclass(frozen=True)
class PathSample:
    param_value: float
    d_over_r0: float
    a: float
    exponents: np.ndarray
    regime: RegimeClass
    converged: bool
    n_periods: int
    fractions: sync.SyncFractions | None
    components: int | None
    period: int | None
    final_state: np.ndarray | None = field(default=None, repr=False)


def run_path(spec: PathSpec, factory=None, cfg=None):
    """Scan ``spec`` and return one :class:`PathSample` per point."""
    factory = factory or SystemFactory()
    cfg = cfg or IntegratorConfig()
    points = spec.points()
    first = factory(*points[0])
    if spec.initial_state is not None:
        y = np.asarray(spec.initial_state, dtype=float)
    else:
        y = default_start(first)
        try:
            y = _settle(first, cfg, y, spec.settle_periods)
        except FAILURES:
            pass
    fixed = np.asarray(spec.initial_state, dtype=float) if spec.policy == "fixed" else None

    samples = []
    for d_over_r0, a in points:
        system = factory(d_over_r0, a)
        start = fixed if fixed is not None else y
        param = spec.param_value(d_over_r0, a)
        try:
            lam = benettin_spectrum(system, cfg, start, spec.transient_periods,
                                    spec.accumulate_periods)
        except FAILURES:
            samples.append(PathSample(param, d_over_r0, a, np.full(system.dim, np.nan),
                                      RegimeClass.ESCAPE_RUPTURE, False, 0,
                                      None, None, None))
            continue
        cloud = lam.section[-spec.keep_points:]
        fractions = None
        if system.dim == 6:
            fractions = sync.fractions_from_tags(sync.tags(cloud, spec.membership_eps))
        period = None
        if len(cloud) >= 4 * spec.max_period:
            period = detect_period(cloud, spec.max_period, spec.period_eps)
        samples.append(PathSample(
            param, d_over_r0, a, lam.exponents, classify(lam, spec.zero_tol),
            lam.converged, lam.n_periods, fractions,
            count_components(cloud, spec.cluster_eps), period, lam.final_state,
        ))
        log.info("path sample %d/%d at %.6g: %s", len(samples), len(points), param,
                 samples[-1].regime.value)
        y = lam.final_state
    return samples

"""Benettin Lyapunov spectra, regime classification and phase-conditional spectra."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import RadiusUnderflow
from .integrator import IntegratorConfig, Propagator, TangentFrame, _as_system, _unpack
from .sync import in_complete_sync

ZERO_TOL = 1e-4
CONVERGENCE_TOL = 1e-4
MIN_DWELL = 0.01


class RegimeClass(enum.Enum):
    PERIODIC = "Periodic"
    QUASIPERIODIC = "Quasiperiodic"
    CHAOTIC = "Chaotic"
    CHAOTIC_EXTRA_ZERO = "ChaoticExtraZero"
    HYPERCHAOTIC2 = "Hyperchaotic2"
    HYPERCHAOTIC2_EXTRA_ZERO = "Hyperchaotic2ExtraZero"
    HYPERCHAOTIC3 = "Hyperchaotic3"
    ESCAPE_RUPTURE = "EscapeRupture"

    def __str__(self):
        return self.value

    @property
    def signature(self):
        """Sign pattern including the trivial flow-direction zero."""
        return _SIGNATURES[self]

    @property
    def rgb(self):
        return PALETTE[self]


_SIGNATURES = {
    RegimeClass.HYPERCHAOTIC3: "<+, +, +, 0, -, ...>",
    RegimeClass.HYPERCHAOTIC2_EXTRA_ZERO: "<+, +, 0, 0, -, ...>",
    RegimeClass.HYPERCHAOTIC2: "<+, +, 0, -, ...>",
    RegimeClass.CHAOTIC: "<+, 0, -, ...>",
    RegimeClass.CHAOTIC_EXTRA_ZERO: "<+, 0, 0, -, ...>",
    RegimeClass.QUASIPERIODIC: "<0, 0, -, -, ...>",
    RegimeClass.PERIODIC: "<0, -, -, ...>",
    RegimeClass.ESCAPE_RUPTURE: "",
}

# xcolor: red, cyan, teal, yellow, magenta, green!80!black, blue
PALETTE = {
    RegimeClass.HYPERCHAOTIC3: (255, 0, 0),
    RegimeClass.HYPERCHAOTIC2_EXTRA_ZERO: (0, 255, 255),
    RegimeClass.HYPERCHAOTIC2: (0, 128, 128),
    RegimeClass.CHAOTIC: (255, 255, 0),
    RegimeClass.CHAOTIC_EXTRA_ZERO: (255, 0, 255),
    RegimeClass.QUASIPERIODIC: (0, 204, 0),
    RegimeClass.PERIODIC: (0, 0, 255),
    RegimeClass.ESCAPE_RUPTURE: (0, 0, 0),
}

_BY_COUNTS = {
    (0, 0): RegimeClass.PERIODIC,
    (0, 1): RegimeClass.QUASIPERIODIC,
    (1, 0): RegimeClass.CHAOTIC,
    (1, 1): RegimeClass.CHAOTIC_EXTRA_ZERO,
    (2, 0): RegimeClass.HYPERCHAOTIC2,
    (2, 1): RegimeClass.HYPERCHAOTIC2_EXTRA_ZERO,
}
_BY_POSITIVE = {
    0: RegimeClass.PERIODIC,
    1: RegimeClass.CHAOTIC,
    2: RegimeClass.HYPERCHAOTIC2,
}


@dataclass
class LyapunovSpectrum:
    """Six (or ``dim``) exponents sorted descending, per unit nondimensional time.

    ``trace_mean`` is the time average of ``trace J`` over the accumulation
    window and ``section`` holds the state at every stroboscopic time of that
    window (rows in state-vector layout).
    """

    exponents: np.ndarray
    n_periods: int
    transient_periods: int
    converged: bool
    trace_mean: float = float("nan")
    final_state: np.ndarray | None = None
    final_tau: float = 0.0
    section: np.ndarray | None = field(default=None, repr=False)
    history: np.ndarray | None = field(default=None, repr=False)

    @property
    def lambdas(self):
        return self.exponents

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, i):
        return self.exponents[i]


def sign_counts(spectrum, zero_tol=ZERO_TOL):
    """Number of positive and of zero exponents at tolerance ``zero_tol``."""
    lam = np.asarray(getattr(spectrum, "exponents", spectrum), dtype=float)
    positive = int(np.sum(lam > zero_tol))
    zero = int(np.sum(np.abs(lam) <= zero_tol))
    return positive, zero


def is_ambiguous(spectrum, zero_tol=ZERO_TOL):
    """True when the sign counts match no row of the regime table."""
    positive, zero = sign_counts(spectrum, zero_tol)
    return positive < 3 and (positive, zero) not in _BY_COUNTS


def classify(spectrum, zero_tol=ZERO_TOL) -> RegimeClass:
    """Map a spectrum to its regime by counting positive and zero exponents.

    Sign patterns outside the table fall back to the class with the same
    number of positive exponents and no extra zero; see :func:`is_ambiguous`.
    """
    positive, zero = sign_counts(spectrum, zero_tol)
    if positive >= 3:
        return RegimeClass.HYPERCHAOTIC3
    regime = _BY_COUNTS.get((positive, zero))
    if regime is None:
        regime = _BY_POSITIVE[positive]
    return regime


@dataclass
class _Run:
    stretches: np.ndarray  # (periods, m) log-stretch per period
    section: np.ndarray  # (periods, n) state at each stroboscopic time
    elapsed: float
    trace_integral: float
    final_state: np.ndarray
    final_tau: float


def _random_frame(dim, seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _run(system, cfg, y0, tau0, transient_periods, accumulate_periods,
         frame_seed=None, renorm_per_period=1):
    period = system.period
    n = system.dim
    settle = Propagator(system, cfg, y0, tau0)
    k0 = round(tau0 / period)
    for k in range(1, transient_periods + 1):
        settle.advance((k0 + k) * period)

    prop = Propagator(system, cfg, settle.y.copy(), settle.tau, n_tangents=n)
    prop.h = settle.h
    frame = TangentFrame(np.eye(n) if frame_seed is None else _random_frame(n, frame_seed))
    prop.set_tangents(frame.vectors)
    stretches = np.empty((accumulate_periods, n))
    section = np.empty((accumulate_periods, n))
    base = k0 + transient_periods
    for k in range(accumulate_periods):
        total = np.zeros(n)
        for j in range(1, renorm_per_period + 1):
            prop.advance((base + k + j / renorm_per_period) * period)
            frame.vectors = prop.tangents
            total += frame.orthonormalize()
            prop.set_tangents(frame.vectors)
        stretches[k] = total
        section[k] = prop.y
    return _Run(stretches, section, accumulate_periods * period,
                prop.trace_integral, prop.y.copy(), prop.tau)


def _converged(history, tol=CONVERGENCE_TOL):
    tail = history[-max(2, len(history) // 10):]
    return bool(np.all(tail.max(axis=0) - tail.min(axis=0) < tol))


def benettin_spectrum(p, cfg: IntegratorConfig, s0, transient_periods=20_000,
                      accumulate_periods=100_000, *, frame_seed=None,
                      renorm_per_period=1, keep_history=False) -> LyapunovSpectrum:
    """Lyapunov spectrum by tangent-frame renormalization at stroboscopic times.

    The state is first settled for ``transient_periods`` forcing periods
    without tangents. An orthonormal frame (identity, or random with
    ``frame_seed``) is then propagated for ``accumulate_periods`` periods and
    re-orthonormalized by QR ``renorm_per_period`` times per period.

    Raises :class:`~tribubble.exceptions.RadiusUnderflow` on rupture.
    """
    if transient_periods < 0 or accumulate_periods <= 0:
        raise ValueError("period counts must be positive")
    system = _as_system(p)
    y0, tau0 = _unpack(s0)
    run = _run(system, cfg, y0, tau0, transient_periods, accumulate_periods,
               frame_seed, renorm_per_period)
    times = system.period * np.arange(1, accumulate_periods + 1)
    history = np.cumsum(run.stretches, axis=0) / times[:, None]
    lam = history[-1]
    order = np.argsort(-lam, kind="stable")
    return LyapunovSpectrum(
        exponents=lam[order],
        n_periods=accumulate_periods,
        transient_periods=transient_periods,
        converged=_converged(history),
        trace_mean=run.trace_integral / run.elapsed,
        final_state=run.final_state,
        final_tau=run.final_tau,
        section=run.section,
        history=history if keep_history else None,
    )


@dataclass
class PartialSpectrum:
    exponents: np.ndarray | None
    dwell_fraction: float
    dwell_time: float

    @property
    def sufficient(self):
        return self.exponents is not None


@dataclass
class ConditionalSpectra:
    sync: PartialSpectrum
    async_: PartialSpectrum
    full: LyapunovSpectrum


def _partial(stretches, mask, period, total):
    count = int(mask.sum())
    fraction = count / total
    dwell = count * period
    if fraction <= MIN_DWELL:
        return PartialSpectrum(None, fraction, dwell)
    lam = stretches[mask].sum(axis=0) / dwell
    return PartialSpectrum(np.sort(lam)[::-1], fraction, dwell)


def conditional_spectra(p, cfg: IntegratorConfig, s0, transient_periods=20_000,
                        accumulate_periods=100_000, membership_eps=1e-6,
                        *, frame_seed=None) -> ConditionalSpectra:
    """Split the per-period log-stretches by complete-synchronization state.

    A period's stretches go to the synchronous accumulator when the state at
    its closing renormalization lies in S. Each partial spectrum is divided
    by its own dwell time and is only reported above a 1% dwell fraction.
    """
    system = _as_system(p)
    y0, tau0 = _unpack(s0)
    run = _run(system, cfg, y0, tau0, transient_periods, accumulate_periods, frame_seed)
    mask = np.array([in_complete_sync(y, membership_eps) for y in run.section])
    total = len(mask)
    sync = _partial(run.stretches, mask, system.period, total)
    asyn = _partial(run.stretches, ~mask, system.period, total)
    # partition: the two fractions must add to exactly one
    asyn.dwell_fraction = 1.0 - sync.dwell_fraction
    times = system.period * np.arange(1, accumulate_periods + 1)
    history = np.cumsum(run.stretches, axis=0) / times[:, None]
    full = LyapunovSpectrum(
        exponents=np.sort(history[-1])[::-1],
        n_periods=accumulate_periods,
        transient_periods=transient_periods,
        converged=_converged(history),
        trace_mean=run.trace_integral / run.elapsed,
        final_state=run.final_state,
        final_tau=run.final_tau,
        section=run.section,
    )
    return ConditionalSpectra(sync, asyn, full)


def spectrum_or_rupture(p, cfg, s0, transient_periods, accumulate_periods, **kwargs):
    """Like :func:`benettin_spectrum` but returns ``None`` on rupture."""
    try:
        return benettin_spectrum(p, cfg, s0, transient_periods, accumulate_periods, **kwargs)
    except RadiusUnderflow:
        return None

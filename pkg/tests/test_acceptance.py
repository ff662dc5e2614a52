"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line (``DEVIATION`` for the two
criteria that only hold if the default constants match the original ones);
the lines are printed in the terminal summary by ``conftest.py``.
Criteria 7 and 8 assert that the runs complete within budget and report the
regimes they find without asserting them.
"""

import itertools
import time
from dataclasses import replace

import numpy as np
import pytest
import sympy as sp

from tribubble.cli import cmd_les, cmd_path, cmd_simulate, main
from tribubble.config import AnalysisSettings, RunConfig
from tribubble.csvio import read_rows
from tribubble.integrator import IntegratorConfig, Propagator
from tribubble.lyapunov import RegimeClass, benettin_spectrum, classify, sign_counts
from tribubble.model import State
from tribubble.params import PhysicalParams
from tribubble.poincare import count_components
from tribubble.sweep import PathSpec
from tribubble.sync import (
    fractions_from_tags,
    reduced_synchronous_field,
    reduced_system,
    two_bubble_synchronous_field,
)
from tribubble.systems import LORENZ_START, bubble_system, linear_system, lorenz_system

from conftest import ACCEPTANCE, CHAOTIC_POINT

CFG = IntegratorConfig()


def record(number, ok, detail, conditional=False):
    status = "PASS" if ok else ("DEVIATION" if conditional else "FAIL")
    line = f"criterion {number}: {status} - {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def propagate(system, y0, periods):
    prop = Propagator(system, CFG, y0)
    out = []
    for k in range(1, periods + 1):
        prop.advance(k * system.period)
        out.append(prop.y.copy())
    return np.array(out)


def test_criterion_1_benettin_certification():
    t0 = time.perf_counter()
    lorenz = benettin_spectrum(lorenz_system(), CFG, LORENZ_START, 200, 20_000).exponents
    linear = benettin_spectrum(linear_system(), CFG, np.ones(6), 5, 200).exponents
    elapsed = time.perf_counter() - t0
    ref = np.array([0.906, 0.0, -14.572])
    lorenz_ok = (abs(lorenz[0] - ref[0]) <= 0.02 * abs(ref[0])
                 and abs(lorenz[2] - ref[2]) <= 0.02 * abs(ref[2])
                 and abs(lorenz[1]) < 1e-3)
    linear_err = np.max(np.abs(linear - (-np.arange(1.0, 7.0))))
    ok = lorenz_ok and linear_err < 1e-6 and elapsed < 60
    record(1, ok, f"Lorenz {np.array2string(lorenz, precision=5)}, linear max error "
                  f"{linear_err:.1e}, {elapsed:.1f} s")
    assert ok


DIVERGENCE_POINTS = [
    ((47.0, 1.48e6), State((1.0, 1.0, 1.001), (0, 0, 0))),
    (CHAOTIC_POINT, State((1.02,) * 3, (0,) * 3)),
    ((36.5, 1.4667e6), State((1.0, 1.01, 0.99), (0, 0, 0))),
    ((22.6, 1.3e6), State((1.0, 1.0, 1.001), (0, 0, 0))),
    ((20.15, 1.4e6), State((1.0, 1.0, 1.001), (0, 0, 0))),
]


def test_criterion_2_divergence_identity():
    worst = 0.0
    for point, start in DIVERGENCE_POINTS:
        p = PhysicalParams().with_control(*point)
        spec = benettin_spectrum(p, CFG, start, 1_000, 5_000)
        worst = max(worst, abs(spec.exponents.sum() - spec.trace_mean))
    ok = worst < 5e-3
    record(2, ok, f"max |sum(lambda) - <trace J>| = {worst:.2e} over 5 attractors")
    assert ok


def test_criterion_3_synchronization_invariance():
    system = bubble_system(PhysicalParams().with_control(*CHAOTIC_POINT))
    traj = propagate(system, [1.02] * 3 + [0.0] * 3, 1_000)
    defect = np.max(np.abs(traj[:, [0, 0, 1]] - traj[:, [1, 2, 2]]).sum(axis=1)
                    + np.abs(traj[:, [3, 3, 4]] - traj[:, [4, 5, 5]]).sum(axis=1))
    y0 = np.array([1.0, 1.02, 0.97, 0.0, 0.01, -0.01])
    perm = [2, 0, 1]
    cols = perm + [3 + i for i in perm]
    a = propagate(system, y0, 100)
    b = propagate(system, y0[cols], 100)
    equivariance = np.max(np.abs(a[:, cols] - b))
    ok = defect < 1e-9 and equivariance < 1e-8
    record(3, ok, f"L1 defect {defect:.1e} over 1e3 periods, permutation deviation "
                  f"{equivariance:.1e} over 1e2 periods")
    assert ok


def test_criterion_4_reduced_system():
    p = PhysicalParams().with_control(*CHAOTIC_POINT)
    full = propagate(bubble_system(p), [1.02] * 3 + [0.0] * 3, 100)
    red = propagate(reduced_system(p), [1.02, 0.0], 100)
    traj_err = np.max(np.abs(full[:, 0] - red[:, 0]) / np.abs(red[:, 0]))

    r, u, q, P = sp.symbols("r u q P", real=True)

    def sync_accel(n, coupling):
        acc = sp.symbols(f"a0:{n}")
        eqs = [sp.Eq(r * acc[i] + sp.Rational(3, 2) * u**2,
                     P - sum(coupling * (2 * r * u**2 + r**2 * acc[j])
                             for j in range(n) if j != i)) for i in range(n)]
        return sp.solve(eqs, acc, dict=True)[0][acc[0]]

    symbolic = sp.simplify(sync_accel(3, q) - sync_accel(2, 2 * q)) == 0

    rng = np.random.default_rng(7)
    base = PhysicalParams().with_control(d_over_r0=36.5)
    half = base.with_control(d_over_r0=36.5 / 2)
    worst = 0.0
    for _ in range(1000):
        x, v, tau = rng.uniform(0.3, 3), rng.uniform(-2, 2), rng.uniform(0, 20)
        three = reduced_synchronous_field(base, x, v, tau)[1]
        two = two_bubble_synchronous_field(half, x, v, tau)[1]
        worst = max(worst, abs(three - two) / max(abs(two), 1e-300))
    ok = traj_err < 1e-8 and symbolic and worst < 1e-12
    record(4, ok, f"trajectory relative error {traj_err:.1e}, symbolic identity "
                  f"{'holds' if symbolic else 'fails'}, numeric max {worst:.1e} at 1e3 states")
    assert ok


def reference_regime(lam, tol=1e-4):
    pos = sum(x > tol for x in lam)
    zero = sum(abs(x) <= tol for x in lam)
    if pos >= 3:
        return RegimeClass.HYPERCHAOTIC3
    table = {(0, 0): "Periodic", (0, 1): "Quasiperiodic", (1, 0): "Chaotic",
             (1, 1): "ChaoticExtraZero", (2, 0): "Hyperchaotic2",
             (2, 1): "Hyperchaotic2ExtraZero"}
    fallback = {0: "Periodic", 1: "Chaotic", 2: "Hyperchaotic2"}
    return RegimeClass(table.get((pos, zero), fallback[pos]))


def test_criterion_5_partition_and_taxonomy(tmp_path):
    rng = np.random.default_rng(11)
    rows_ok = True
    for _ in range(2_000):
        tags = rng.integers(0, 5, size=rng.integers(1, 3000))
        f = fractions_from_tags(tags)
        rows_ok &= f.frac_S + f.frac_partial + f.frac_async == 1.0
    rc = RunConfig(analysis=AnalysisSettings(keep_points=64))
    spec = PathSpec(start=(36.0, 1.4667e6), end=(37.0, 1.4667e6), n_samples=3,
                    settle_periods=50, transient_periods=20, accumulate_periods=64,
                    keep_points=64, max_period=8, initial_state=None)
    cmd_path(rc, tmp_path, spec)
    emitted = read_rows(tmp_path / "fractions.csv") + read_rows(tmp_path / "path.csv")
    for row in emitted:
        rows_ok &= (float(row["frac_S"]) + float(row["frac_partial"])
                    + float(row["frac_async"])) == 1.0

    near = (1e-4, np.nextafter(1e-4, 1), np.nextafter(1e-4, 0), -1e-4,
            np.nextafter(-1e-4, -1), 0.0, 0.3, -0.3)
    n_checked = 0
    taxonomy_ok = True
    for lam in itertools.combinations_with_replacement(near, 6):
        lam = np.sort(np.array(lam))[::-1]
        taxonomy_ok &= classify(lam) is reference_regime(lam)
        n_checked += 1
    taxonomy_ok &= sign_counts([1e-4])[1] == 1 and sign_counts([np.nextafter(1e-4, 1)])[0] == 1
    ok = bool(rows_ok and taxonomy_ok)
    record(5, ok, f"{len(emitted)} emitted rows + 2000 random tag sets partition exactly; "
                  f"{n_checked} threshold spectra classified")
    assert ok


def test_criterion_6_determinism(tmp_path):
    conf = tmp_path / "c.conf"
    conf.write_text("chart_transient_periods = 20\nchart_accumulate_periods = 60\n"
                    "seed_settle_periods = 50\n")
    outputs = []
    for workers in (1, 2, 8):
        out = tmp_path / f"w{workers}"
        code = main(["chart", "--config", str(conf), "--grid", "4x3", "--d-range", "44,47",
                     "--a-range", "1.44e6,1.52e6", "--workers", str(workers), "--out", str(out)])
        assert code == 0
        outputs.append(((out / "chart.csv").read_bytes(), (out / "chart.ppm").read_bytes()))
    ok = outputs[0] == outputs[1] == outputs[2]
    record(6, ok, "chart.csv and chart.ppm bitwise identical for 1, 2, 8 workers"
           if ok else "chart output differs between worker counts")
    assert ok


CAPTION_POINTS = [
    ((36.5, 1.4667e6), RegimeClass.QUASIPERIODIC),
    ((36.5, 1.484e6), RegimeClass.HYPERCHAOTIC2),
    ((36.5, 1.52e6), RegimeClass.HYPERCHAOTIC3),
    ((22.6, 1.3e6), RegimeClass.CHAOTIC_EXTRA_ZERO),
    ((20.15, 1.4e6), RegimeClass.HYPERCHAOTIC2_EXTRA_ZERO),
]


@pytest.mark.slow
def test_criterion_7_caption_points(tmp_path):
    analysis = AnalysisSettings(transient_periods=10_000, accumulate_periods=50_000,
                                skip_periods=1_000, keep_points=4096)
    found, slowest, agree = [], 0.0, True
    for i, (point, expected) in enumerate(CAPTION_POINTS):
        rc = RunConfig(params=PhysicalParams().with_control(*point), analysis=analysis)
        t0 = time.perf_counter()
        spec, regime = cmd_les(rc, tmp_path / f"p{i}")
        slowest = max(slowest, time.perf_counter() - t0)
        lead = ", ".join(f"{v:+.2e}" for v in spec.exponents[:3])
        note = f"{point}: {regime.value} [{lead}, ...]"
        agree &= regime is expected
        if expected is RegimeClass.QUASIPERIODIC:
            cloud = cmd_simulate(rc, tmp_path / f"s{i}")
            comps = count_components(cloud, analysis.cluster_eps)
            agree &= comps == 16
            note += f" ({comps} components)"
        found.append(note + ("" if regime is expected else f", expected {expected.value}"))
    record(7, agree, "; ".join(found) + f"; slowest point {slowest:.0f} s", conditional=True)
    assert slowest < 300


def period_doubling_then_chaos(samples):
    """First samples reporting periods 8, 16, 32 in order, then a chaotic one."""
    idx = []
    for target in (8, 16, 32):
        start = idx[-1] + 1 if idx else 0
        hits = [i for i in range(start, len(samples)) if samples[i].period == target]
        if not hits:
            return False, idx
        idx.append(hits[0])
    chaos = [i for i in range(idx[-1] + 1, len(samples))
             if samples[i].regime in (RegimeClass.CHAOTIC, RegimeClass.CHAOTIC_EXTRA_ZERO)]
    return bool(chaos), idx


@pytest.mark.slow
def test_criterion_8_path_ef(tmp_path):
    analysis = AnalysisSettings(chart_transient_periods=500, chart_accumulate_periods=2048,
                                keep_points=2048)
    rc = RunConfig(analysis=analysis)
    spec = replace(PathSpec.named("EF", n_samples=200), transient_periods=500,
                   accumulate_periods=2048, keep_points=2048)
    t0 = time.perf_counter()
    samples = cmd_path(rc, tmp_path, spec)
    elapsed = time.perf_counter() - t0
    cascade, _ = period_doubling_then_chaos(samples)
    extra_zero = [s.d_over_r0 for s in samples if s.regime is RegimeClass.CHAOTIC_EXTRA_ZERO]
    window = bool(extra_zero) and any(22.45 <= d <= 22.85 for d in extra_zero)
    regimes = {}
    for s in samples:
        regimes[s.regime.value] = regimes.get(s.regime.value, 0) + 1
    periods = sorted({s.period for s in samples if s.period is not None})
    detail = (f"periods seen {periods}, cascade 8->16->32->chaos "
              f"{'found' if cascade else 'not found'}, ChaoticExtraZero near [22.45, 22.85] "
              f"{'found' if window else 'not found'}; regimes {regimes}; {elapsed / 60:.0f} min")
    record(8, cascade and window, detail, conditional=True)
    assert elapsed < 3600

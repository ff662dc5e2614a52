"""Command-line front end: ``tribubble {simulate,les,chart,path,sync,replay}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, csvio
from .exceptions import ConfigError, RadiusUnderflow, StepBudgetExceeded, StepUnderflow
from .lyapunov import RegimeClass, benettin_spectrum, classify, conditional_spectra
from .poincare import SectionCloud, count_components, detect_period, sample_section
from .sweep import ChartSpec, NAMED_PATHS, PathSpec, SystemFactory, run_chart, run_path
from .sync import dwell_fractions
from .systems import default_start

log = logging.getLogger("tribubble")

EXIT_OK, EXIT_CONFIG, EXIT_RUPTURE, EXIT_BUDGET = 0, 2, 3, 4


@dataclass
class RunManifest:
    config_path: str | None
    config_sha256: str
    subcommand: str
    output_dir: str
    seed: int | None
    tool_version: str
    argv: list

    def write(self, out_dir):
        path = Path(out_dir) / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")
        return path

    @classmethod
    def read(cls, path):
        return cls(**json.loads(Path(path).read_text()))


def _config_text(path):
    if path is None:
        return cfgmod.default_config_text()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def load_run_config(path, d_over_r0=None, amp=None):
    text = _config_text(path)
    rc = cfgmod.loads(text)
    try:
        params = rc.params.with_control(d_over_r0=d_over_r0, a=amp)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return replace(rc, params=params), text


def _system(rc, test_field):
    factory = SystemFactory(rc.params, test_field)
    return factory, factory(rc.params.d_over_r0, rc.params.a)


def _start(system, initial_state):
    if initial_state is None:
        return default_start(system)
    if len(initial_state) != system.dim:
        raise ConfigError(f"initial state needs {system.dim} values")
    return np.asarray(initial_state, dtype=float)


def cmd_simulate(rc, out, periods=None, test_field=None, initial_state=None):
    """Stroboscopic samples after the configured transient -> ``section.csv``."""
    _, system = _system(rc, test_field)
    s = rc.analysis
    cloud = sample_section(system, rc.integrator, _start(system, initial_state), s.skip_periods,
                           periods or s.keep_points)
    csvio.write_cloud(Path(out) / "section.csv", cloud)
    period = None
    if len(cloud) >= 4 * s.max_period:
        period = detect_period(cloud, s.max_period, s.period_eps)
    comps = count_components(cloud, s.cluster_eps)
    print(f"points={len(cloud)} components={comps} period={period}")
    return cloud


def cmd_les(rc, out, periods=None, test_field=None, seed=None, initial_state=None):
    """Lyapunov spectrum and regime at one control point -> ``spectrum.csv``."""
    _, system = _system(rc, test_field)
    s = rc.analysis
    spec = benettin_spectrum(system, rc.integrator, _start(system, initial_state),
                             s.transient_periods, periods or s.accumulate_periods,
                             frame_seed=seed)
    regime = classify(spec, s.zero_tol)
    csvio.write_spectra(Path(out) / "spectrum.csv",
                        [(rc.params.d_over_r0, rc.params.a, spec, regime)])
    lam = " ".join(f"{v:+.6e}" for v in spec.exponents)
    print(f"regime={regime.value} converged={spec.converged} lambda=[{lam}]")
    return spec, regime


def cmd_chart(rc, out, grid=(200, 200), periods=None, workers=1, test_field=None,
              d_range=None, a_range=None, seed_point=None):
    """Regime chart -> ``chart.csv`` and ``chart.ppm``."""
    factory, _ = _system(rc, test_field)
    kwargs = {"nx": grid[0], "ny": grid[1]}
    if d_range:
        kwargs["d_range"] = d_range
    if a_range:
        kwargs["a_range"] = a_range
    if seed_point:
        kwargs["seed"] = seed_point
    spec = ChartSpec.from_settings(rc.analysis, **kwargs)
    if periods:
        spec = replace(spec, accumulate_periods=periods)
    result = run_chart(spec, factory, rc.integrator, workers=workers)
    csvio.write_chart(Path(out) / "chart.csv", result)
    csvio.write_ppm(Path(out) / "chart.ppm", result)
    counts = {}
    for px in result.ravel():
        counts[px.regime.value] = counts.get(px.regime.value, 0) + 1
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return result


def cmd_path(rc, out, spec: PathSpec, test_field=None):
    """One-parameter scan -> ``path.csv`` and ``fractions.csv``."""
    factory, system = _system(rc, test_field)
    if spec.initial_state is not None:
        _start(system, spec.initial_state)
    samples = run_path(spec, factory, rc.integrator)
    csvio.write_path(Path(out) / "path.csv", samples)
    csvio.write_fractions(Path(out) / "fractions.csv",
                          [(s.param_value, s.fractions) for s in samples
                           if s.fractions is not None])
    for s in samples:
        print(f"{s.param_value:.6g} {s.regime.value} components={s.components}"
              f" period={s.period}")
    return samples


def cmd_sync(rc, out, periods=None, test_field=None, seed=None, initial_state=None):
    """Dwell fractions and phase-conditional spectra -> ``fractions.csv``,
    ``conditional.csv``."""
    _, system = _system(rc, test_field)
    s = rc.analysis
    cond = conditional_spectra(system, rc.integrator, _start(system, initial_state),
                               s.transient_periods, periods or s.accumulate_periods,
                               s.membership_eps, frame_seed=seed)
    cloud = SectionCloud.from_points(cond.full.section, system.period)
    fractions = dwell_fractions(cloud)
    csvio.write_fractions(Path(out) / "fractions.csv", [(rc.params.d_over_r0, fractions)])
    csvio.write_conditional(Path(out) / "conditional.csv", cond)
    print(f"frac_S={fractions.frac_S:.6g} frac_partial={fractions.frac_partial:.6g}"
          f" frac_async={fractions.frac_async:.6g}")
    return fractions, cond


def _pair(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'X,Y', got {text!r}") from None
    return x, y


def _grid(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NXxNY, got {text!r}") from None
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return nx, ny


def _state(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="tribubble", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--out", metavar="DIR", default="out")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for a random initial tangent frame")
    common.add_argument("--test-field", choices=("linear", "lorenz"), default=None)
    common.add_argument("--periods", type=int, default=None, metavar="N")
    common.add_argument("-v", "--verbose", action="store_true")
    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--d-over-r0", type=float, default=None, metavar="F")
    point.add_argument("--amp", type=float, default=None, metavar="F",
                       help="acoustic amplitude a in Pa")
    point.add_argument("--initial-state", type=_state, default=None,
                       metavar="r1,r2,r3,u1,u2,u3")

    sub.add_parser("simulate", parents=[common, point], help="stroboscopic samples")
    sub.add_parser("les", parents=[common, point], help="Lyapunov spectrum and regime")
    sub.add_parser("sync", parents=[common, point],
                   help="dwell fractions and conditional spectra")
    chart = sub.add_parser("chart", parents=[common], help="two-parameter regime chart")
    chart.add_argument("--grid", type=_grid, default=(200, 200), metavar="NXxNY")
    chart.add_argument("--workers", type=int, default=os.cpu_count() or 1, metavar="N")
    chart.add_argument("--d-range", type=_pair, default=None, metavar="LO,HI")
    chart.add_argument("--a-range", type=_pair, default=None, metavar="LO,HI")
    chart.add_argument("--seed-point", type=_pair, default=None, metavar="D,A")

    path = sub.add_parser("path", parents=[common], help="one-parameter path scan")
    path.add_argument("--name", choices=sorted(NAMED_PATHS), default=None)
    path.add_argument("--from", dest="start", type=_pair, default=None, metavar="D,A")
    path.add_argument("--to", dest="end", type=_pair, default=None, metavar="D,A")
    path.add_argument("--samples", type=int, default=200)
    path.add_argument("--backward", action="store_true")
    path.add_argument("--policy", choices=("continuation", "fixed"), default="continuation")
    path.add_argument("--initial-state", type=_state, default=None,
                      metavar="r1,r2,r3,u1,u2,u3")

    replay = sub.add_parser("replay", help="re-run from a manifest.json")
    replay.add_argument("manifest")
    replay.add_argument("--out", metavar="DIR", default=None)
    return parser


def _path_spec(args, rc):
    if args.name:
        start, end = NAMED_PATHS[args.name]
    elif args.start and args.end:
        start, end = args.start, args.end
    else:
        raise ConfigError("path needs --name or both --from and --to")
    s = rc.analysis
    return PathSpec(
        start=start, end=end, n_samples=args.samples,
        direction="backward" if args.backward else "forward",
        policy=args.policy, initial_state=args.initial_state,
        transient_periods=s.chart_transient_periods,
        accumulate_periods=args.periods or s.chart_accumulate_periods,
        keep_points=s.keep_points, cluster_eps=s.cluster_eps, period_eps=s.period_eps,
        max_period=s.max_period, membership_eps=s.membership_eps, zero_tol=s.zero_tol,
    )


def _rupture_dominated(regimes):
    regimes = list(regimes)
    bad = sum(r is RegimeClass.ESCAPE_RUPTURE for r in regimes)
    return bool(regimes) and bad * 2 > len(regimes)


def run(args, argv):
    if args.command == "replay":
        manifest = RunManifest.read(args.manifest)
        again = list(manifest.argv)
        if args.out is not None:
            i = again.index("--out") if "--out" in again else None
            if i is None:
                again += ["--out", args.out]
            else:
                again[i + 1] = args.out
        return main(again)

    rc, text = load_run_config(args.config, getattr(args, "d_over_r0", None),
                               getattr(args, "amp", None))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    RunManifest(
        config_path=args.config,
        config_sha256=hashlib.sha256(text.encode()).hexdigest(),
        subcommand=args.command,
        output_dir=str(out),
        seed=args.seed,
        tool_version=__version__,
        argv=list(argv),
    ).write(out)

    tf = args.test_field
    y0 = getattr(args, "initial_state", None)
    if args.command == "simulate":
        cmd_simulate(rc, out, args.periods, tf, y0)
    elif args.command == "les":
        cmd_les(rc, out, args.periods, tf, args.seed, y0)
    elif args.command == "sync":
        cmd_sync(rc, out, args.periods, tf, args.seed, y0)
    elif args.command == "chart":
        result = cmd_chart(rc, out, args.grid, args.periods, max(1, args.workers), tf,
                           args.d_range, args.a_range, args.seed_point)
        if _rupture_dominated(px.regime for px in result.ravel()):
            print("rupture-dominated chart", file=sys.stderr)
            return EXIT_RUPTURE
    elif args.command == "path":
        samples = cmd_path(rc, out, _path_spec(args, rc), tf)
        if _rupture_dominated(s.regime for s in samples):
            print("rupture-dominated path", file=sys.stderr)
            return EXIT_RUPTURE
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False)
                        else logging.WARNING)
    try:
        return run(args, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RadiusUnderflow as exc:
        print(f"rupture at tau={exc.tau!r}: {exc}", file=sys.stderr)
        return EXIT_RUPTURE
    except (StepBudgetExceeded, StepUnderflow) as exc:
        print(f"integration failed at tau={exc.tau!r}: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())

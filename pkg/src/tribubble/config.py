"""Flat ``key = value`` configuration files.

One assignment per line, ``#`` starts a comment. Physical keys are the
:class:`~tribubble.params.PhysicalParams` field names (SI units) plus the
``p_stat``/``p_v`` alternative to ``p0``; the remaining keys tune the
integrator and the analyses.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .exceptions import ConfigError
from .integrator import IntegratorConfig
from .params import PhysicalParams

PHYSICAL_KEYS = tuple(f.name for f in dataclasses.fields(PhysicalParams))
PRESSURE_KEYS = ("p_stat", "p_v")
INTEGRATOR_KEYS = tuple(f.name for f in dataclasses.fields(IntegratorConfig))


@dataclass(frozen=True)
class AnalysisSettings:
    transient_periods: int = 20_000
    accumulate_periods: int = 100_000
    chart_transient_periods: int = 1_000
    chart_accumulate_periods: int = 20_000
    seed_settle_periods: int = 10_000
    skip_periods: int = 1_000
    keep_points: int = 4096
    cluster_eps: float = 1e-3
    period_eps: float = 1e-6
    max_period: int = 64
    membership_eps: float = 1e-6
    zero_tol: float = 1e-4


ANALYSIS_KEYS = tuple(f.name for f in dataclasses.fields(AnalysisSettings))
_INT_KEYS = {"max_steps"} | {
    f.name for f in dataclasses.fields(AnalysisSettings) if f.type == "int"
}


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)


def parse_assignments(text: str) -> dict:
    """Parse ``key = value`` lines into a dict of numbers, keyed by name."""
    known = set(PHYSICAL_KEYS + PRESSURE_KEYS + INTEGRATOR_KEYS + ANALYSIS_KEYS)
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"value of {key!r} is not a number: {value!r}", lineno) from None
        if key in _INT_KEYS:
            if number != int(number):
                raise ConfigError(f"{key!r} must be an integer, got {value!r}", lineno)
            number = int(number)
        values[key] = (number, lineno)
    return values


def build_config(values: dict) -> RunConfig:
    def pick(keys):
        return {k: values[k][0] for k in keys if k in values}

    physical = pick(PHYSICAL_KEYS)
    pressures = pick(PRESSURE_KEYS)
    if pressures:
        if len(pressures) != 2:
            lineno = values[next(iter(pressures))][1]
            raise ConfigError("p_stat and p_v must be given together", lineno)
        if "p0" in physical:
            raise ConfigError("give either p0 or the pair p_stat, p_v", values["p0"][1])
        physical["p0"] = pressures["p_stat"] - pressures["p_v"]
    try:
        return RunConfig(
            params=PhysicalParams(**physical),
            integrator=IntegratorConfig(**pick(INTEGRATOR_KEYS)),
            analysis=AnalysisSettings(**pick(ANALYSIS_KEYS)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def loads(text: str) -> RunConfig:
    return build_config(parse_assignments(text))


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def default_config_text() -> str:
    return resources.files("tribubble").joinpath("data/default.conf").read_text()

"""Three Bjerknes-coupled encapsulated bubbles: simulation and chaos diagnostics."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ConfigError,
    NonPositiveFrequency,
    RadiusUnderflow,
    SingularMassMatrix,
    StepBudgetExceeded,
    StepUnderflow,
)
from .integrator import IntegratorConfig, TangentFrame, step_to, step_with_tangents  # noqa: E402
from .lyapunov import (  # noqa: E402
    LyapunovSpectrum,
    RegimeClass,
    benettin_spectrum,
    classify,
    conditional_spectra,
)
from .model import State, jacobian, pressure_term, vector_field  # noqa: E402
from .params import DerivedScales, PhysicalParams, natural_frequency  # noqa: E402
from .poincare import SectionCloud, count_components, detect_period, sample_section  # noqa: E402
from .sweep import ChartSpec, PathSpec, run_chart, run_path  # noqa: E402
from .sync import (  # noqa: E402
    SyncFractions,
    dwell_fractions,
    membership,
    reduced_synchronous_field,
)

__all__ = [
    "ChartSpec", "ConfigError", "DerivedScales", "IntegratorConfig", "LyapunovSpectrum",
    "NonPositiveFrequency", "PathSpec", "PhysicalParams", "RadiusUnderflow", "RegimeClass",
    "SectionCloud", "SingularMassMatrix", "State", "StepBudgetExceeded", "StepUnderflow",
    "SyncFractions", "TangentFrame", "__version__", "benettin_spectrum", "classify",
    "conditional_spectra", "count_components", "detect_period", "dwell_fractions",
    "jacobian", "membership", "natural_frequency", "pressure_term", "reduced_synchronous_field",
    "run_chart", "run_path", "sample_section", "step_to", "step_with_tangents", "vector_field",
]

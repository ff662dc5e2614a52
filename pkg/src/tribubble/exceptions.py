"""Exception types raised by the simulation and analysis layers."""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NonPositiveFrequency(ValueError):
    """The linear eigenfrequency bracket is not positive."""


class SingularMassMatrix(ArithmeticError):
    """The 3x3 acceleration system cannot be solved reliably."""


class RadiusUnderflow(ArithmeticError):
    """A bubble radius fell below the rupture threshold."""

    def __init__(self, message, tau=None):
        self.tau = tau
        super().__init__(message)


class StepBudgetExceeded(RuntimeError):
    """The integrator used up ``max_steps`` before reaching its target."""

    def __init__(self, message, tau=None):
        self.tau = tau
        super().__init__(message)


class StepUnderflow(RuntimeError):
    """The step-size controller drove the step below 1e-14."""

    def __init__(self, message, tau=None):
        self.tau = tau
        super().__init__(message)

"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent model configuration.

    Carries a list of individual problems so callers can report them all
    at once instead of failing on the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class IntegrabilityError(ArithmeticError):
    """A quadrature did not converge to a finite value.

    ``factor`` names the offending integrand component.
    """

    def __init__(self, message, factor=""):
        self.factor = factor
        super().__init__(message if not factor else f"{message} (factor: {factor})")


class DominationError(RuntimeError):
    """No finite dominating intensity bound is available at some time."""

    def __init__(self, message, at_time=None):
        self.at_time = at_time
        super().__init__(message)


class BandViolationError(ValueError):
    """The lower band function exceeded the upper one at a sampled point."""


class SupercriticalError(ValueError):
    """Branching/cluster configuration has mean offspring >= 1."""


class SimulationCapError(RuntimeError):
    """A scan or cycle count exceeded its configured cap.

    ``diagnostics`` holds whatever partial state is useful for debugging
    (e.g. an RE-chain trajectory).
    """

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics
        super().__init__(message)

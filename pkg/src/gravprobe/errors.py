"""Exception hierarchy. Each family maps to a distinct CLI exit code."""


class GravProbeError(Exception):
    exit_code = 1


class ConfigError(GravProbeError, ValueError):
    """Bad configuration: unknown key, type mismatch, missing field, parse failure."""

    exit_code = 2


class ValidationError(ConfigError):
    """One or more physical invariants of a parameter record are violated.

    ``problems`` holds ``(field_path, message)`` pairs, one per violation.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{path} {msg}" for path, msg in self.problems]
        super().__init__("invalid parameters:\n  " + "\n  ".join(lines))


class InstabilityError(GravProbeError):
    """The linearised dynamics have no steady state."""

    exit_code = 3


class NumericError(GravProbeError, ArithmeticError):
    exit_code = 4


class SingularConfigurationError(NumericError):
    """A formula hits a genuine singularity (coincident masses, zero denominators)."""


class FarFieldError(ConfigError):
    """The far-field approximation is requested outside its validity range."""


class UnphysicalStateError(NumericError):
    """A covariance matrix violates the uncertainty principle."""

    def __init__(self, message, min_symplectic_eigenvalue):
        self.min_symplectic_eigenvalue = min_symplectic_eigenvalue
        super().__init__(f"{message} (min symplectic eigenvalue {min_symplectic_eigenvalue:.6g})")

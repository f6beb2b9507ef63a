"""Exception hierarchy.

Everything raised deliberately by the package derives from
:class:`PTLatticeError`. The CLI maps :class:`ValidationError` to exit code 1
and every other :class:`PTLatticeError` to exit code 2.
"""


class PTLatticeError(Exception):
    """Base class for all package errors."""


class ValidationError(PTLatticeError, ValueError):
    """Invalid user input (parameters, configuration)."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


class NumericalError(PTLatticeError, RuntimeError):
    """A numerical procedure failed or produced an inconsistent result."""

    check = "numerical"


class DomainError(NumericalError):
    """Evaluation requested at a singular point (band edge, pole)."""

    check = "domain"


class SingularSystemError(NumericalError):
    """Scattering linear system is singular (bound state at the energy)."""

    check = "singular_system"


class RootFindingError(NumericalError):
    check = "root_count"


class DegenerateRootError(NumericalError):
    check = "null_space_dimension"


class ExceptionalPointError(NumericalError):
    check = "eigenvector_condition"


class CorrespondenceError(NumericalError):
    """Theorem check failed; the offending report is attached."""

    check = "correspondence"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class HorizonError(NumericalError):
    """A finite lead was too short for the simulated time window."""

    def __init__(self, message, check="lead_end_mass"):
        super().__init__(message)
        self.check = check

"""Exception types raised across the package."""


class EcsBellError(Exception):
    """Base class for all package errors."""


class DegenerateState(EcsBellError, ValueError):
    """The requested state has zero norm (odd ECS at zero amplitude)."""


class OutOfRange(EcsBellError, ValueError):
    """A scalar argument lies outside its admissible domain."""


class DimensionTooSmall(EcsBellError, ValueError):
    """A Fock-space truncation would silently discard probability mass."""


class NonHermitianResult(EcsBellError, ArithmeticError):
    """An expectation value of a Hermitian observable came out complex."""


class NoConvergence(EcsBellError, RuntimeError):
    """No optimizer start reached the gradient tolerance."""


class UnknownScenario(EcsBellError, KeyError):
    """The scenario id is not in the registry."""


class UsageError(EcsBellError, ValueError):
    """Bad command-line flag or configuration key."""

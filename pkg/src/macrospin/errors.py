"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition (bad norm, bad shape, bad value)."""


class CapacityError(ValueError):
    """Requested system size exceeds the configured dense-vector limit."""


class EnsembleDomainError(ValueError):
    """Ensemble query lies outside the reachable domain (empty window, energy out of range)."""


class NumericalRangeError(ArithmeticError):
    """A computation left the representable floating-point range (e.g. all Boltzmann weights underflow)."""


class DiagonalizationError(RuntimeError):
    """Eigensolver failed to converge; carries enough context to replay the realization."""


class RunFailureError(RuntimeError):
    """Too many realizations of a batch run failed."""

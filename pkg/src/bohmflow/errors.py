"""Exception hierarchy shared by all modules."""


class BohmFlowError(Exception):
    """Base class for every error raised by :mod:`bohmflow`."""


class InvalidModelError(BohmFlowError, ValueError):
    """Model parameters are non-finite or otherwise unusable."""


class DomainError(BohmFlowError, ValueError):
    """Position or time outside the region where a model is defined."""


class NodeProximityError(BohmFlowError, ArithmeticError):
    """Phase or velocity requested too close to a node of the wavefunction."""

    def __init__(self, message, x=None, t=None):
        super().__init__(message)
        self.x = x
        self.t = t


class IntegrationError(BohmFlowError, RuntimeError):
    """The trajectory integrator could not meet its tolerance."""


class BracketError(BohmFlowError, RuntimeError):
    """Root not enclosed after the allowed number of bracket expansions."""


class QuadratureError(BohmFlowError, RuntimeError):
    """Adaptive quadrature did not converge."""


class SamplingError(BohmFlowError, RuntimeError):
    """Inverse-CDF sampling failed to converge."""


class BoundaryMassError(BohmFlowError, RuntimeError):
    """A grid wavefunction carries non-negligible amplitude at the domain edge."""


class GridMismatchError(BohmFlowError, ValueError):
    """Two density fields do not share a grid or a time."""


class ConfigError(BohmFlowError, ValueError):
    """A run configuration could not be parsed or failed validation."""

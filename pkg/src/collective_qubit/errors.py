class ConfigError(ValueError):
    """Bad configuration file, key, or value."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (step underflow, quadrature non-convergence...)."""


class UnattainableError(NumericalError):
    """Requested target cannot be reached within the allowed range."""


class QuadratureError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

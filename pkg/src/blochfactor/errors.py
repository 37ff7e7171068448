class BlochError(Exception):
    pass


class InvalidInputError(BlochError, ValueError):
    pass


class InfeasibleError(BlochError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IllConditionedError(BlochError):
    """Raised when distinct disc points are too close for a stable construction."""


class BudgetExceededError(BlochError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CertificateUnavailableError(BlochError):
    pass


class ReconstructionError(BlochError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InconsistencyError(BlochError):
    pass

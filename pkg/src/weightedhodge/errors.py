"""Exception types raised across the package."""


class WeightedHodgeError(Exception):
    """Base class for all package errors.

    ``code`` is a short machine-readable tag used by the command line
    driver when it emits JSON error records.
    """

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class MeshError(WeightedHodgeError, ValueError):
    code = "mesh"


class EstimatorError(WeightedHodgeError, ValueError):
    code = "estimator"


class WeightError(WeightedHodgeError, ValueError):
    code = "weight"


class AssemblyError(WeightedHodgeError, ValueError):
    code = "assembly"


class SolverError(WeightedHodgeError, RuntimeError):
    code = "solver"


class ConfigError(WeightedHodgeError, ValueError):
    code = "config"

class ShaperError(Exception):
    def __init__(self, message: str = "", options: dict = None):
        super().__init__(message)
        self.name = self.__class__.__name__
        self.options = options


# arguments
class InvalidInputError(ShaperError):
    pass


# channel
class GeometryError(ShaperError):
    pass


# rate engine
class ComponentCapError(ShaperError):
    def __init__(self, components: int, cap: int, options: dict = None):
        message = (
            f"Mixture would need {components} components, above the configured cap of {cap}"
        )
        super().__init__(message, options)
        self.components = components
        self.cap = cap


class GridCoverageError(ShaperError):
    def __init__(self, lo: float, hi: float, needed_lo: float, needed_hi: float, options: dict = None):
        message = (
            f"Quadrature grid [{lo:.6g}, {hi:.6g}] does not cover "
            f"[{needed_lo:.6g}, {needed_hi:.6g}] (mean ± 6σ of every component)"
        )
        super().__init__(message, options)


# optimizers
class InfeasibleZfError(ShaperError):
    def __init__(self, rank: int, users: int, options: dict = None):
        message = (
            f"Zero-forcing is undefined: channel matrix has rank {rank} but there are {users} users"
        )
        super().__init__(message, options)


class SolverError(ShaperError):
    pass


# config
class ConfigNotSetError(ShaperError):
    def __init__(self, key: str, options: dict = None):
        message = f'Configuration key "{key}" is not set'
        super().__init__(message, options)


class ConfigValidationError(ShaperError):
    def __init__(self, path: str, reason: str, options: dict = None):
        message = f"Invalid config at '{path}': {reason}" if path else f"Invalid config: {reason}"
        super().__init__(message, options)
        self.path = path
        self.reason = reason


# experiment output
class ReportError(ShaperError):
    pass


class Errors:
    ShaperError = ShaperError
    InvalidInputError = InvalidInputError
    GeometryError = GeometryError
    ComponentCapError = ComponentCapError
    GridCoverageError = GridCoverageError
    InfeasibleZfError = InfeasibleZfError
    SolverError = SolverError
    ConfigNotSetError = ConfigNotSetError
    ConfigValidationError = ConfigValidationError
    ReportError = ReportError

class FlagFrameError(ValueError):
    """Base class for every error raised by the toolkit."""


class DimensionMismatchError(FlagFrameError):
    pass


class NonFiniteError(FlagFrameError):
    pass


class NotHermitianError(FlagFrameError):
    pass


class NotPositiveSemidefiniteError(FlagFrameError):
    pass


class ConvergenceError(FlagFrameError):
    pass


class ParameterRangeError(FlagFrameError):
    pass


class LayoutError(FlagFrameError):
    """A ParamSet does not match the factor layout of its scheme."""


class SchemeError(FlagFrameError):
    pass


class NotUnitaryError(FlagFrameError):
    pass


class FactorizationError(FlagFrameError):
    pass


class ContractionError(FlagFrameError):
    pass


class SpectrumError(FlagFrameError):
    pass


class DocumentError(FlagFrameError):
    pass

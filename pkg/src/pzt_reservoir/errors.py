"""Exception hierarchy shared by every stage of the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


# ingestion
class MagicMismatch(PipelineError, ValueError):
    pass


class Truncated(PipelineError, ValueError):
    pass


class InvalidLabel(PipelineError, ValueError):
    pass


class UnsupportedFormat(PipelineError, ValueError):
    pass


class Corrupt(PipelineError, ValueError):
    pass


class InsufficientClass(PipelineError, ValueError):
    pass


class NotDivisible(PipelineError, ValueError):
    pass


# encoding / features
class WrongShape(PipelineError, ValueError):
    pass


class WrongLength(PipelineError, ValueError):
    pass


class NonFinite(PipelineError, ValueError):
    pass


class IndexOutOfRange(PipelineError, IndexError):
    pass


class NegativeFrequency(PipelineError, ValueError):
    pass


class InvalidParams(PipelineError, ValueError):
    pass


class TooShort(PipelineError, ValueError):
    pass


class Unfittable(PipelineError, ValueError):
    """Clip duration cannot produce a full 32-frame spectrogram."""


# reservoir
class ConfigInvalid(PipelineError, ValueError):
    pass


class NoConvergence(PipelineError, ArithmeticError):
    pass


# readout / evaluation
class DimensionMismatch(PipelineError, ValueError):
    pass


class SingleClass(PipelineError, ValueError):
    pass


class TooFewSamples(PipelineError, ValueError):
    pass


class LengthMismatch(PipelineError, ValueError):
    pass


class EmptyInput(PipelineError, ValueError):
    pass

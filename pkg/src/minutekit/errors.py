"""Exception hierarchy shared by all minutekit modules."""


class MinutekitError(Exception):
    """Base class for every error raised by minutekit."""


# ingestion
class EmptyTranscript(MinutekitError, ValueError):
    pass


class MalformedTranscript(MinutekitError, ValueError):
    pass


# segmentation
class InvalidBudget(MinutekitError, ValueError):
    pass


class CoverageGap(MinutekitError, ValueError):
    pass


class EmptyPartition(MinutekitError, ValueError):
    pass


# summarization
class EmptyBlock(MinutekitError, ValueError):
    pass


# minute parsing
class EmptyBuffer(MinutekitError, IndexError):
    pass


class StackUnderflow(MinutekitError, IndexError):
    pass


class PredictorFailure(MinutekitError, RuntimeError):
    pass


class InconsistentTree(MinutekitError, ValueError):
    pass


# features
class EmptyCorpus(MinutekitError, ValueError):
    pass


class InvalidN(MinutekitError, ValueError):
    pass


# learning
class EmptyDataset(MinutekitError, ValueError):
    pass


class SingleClassData(MinutekitError, ValueError):
    pass


class TooFewRows(MinutekitError, ValueError):
    pass


class DimensionMismatch(MinutekitError, ValueError):
    pass


class TrainingDiverged(MinutekitError, ArithmeticError):
    """Gradient descent produced non-finite weights (step size too large)."""


class LengthMismatch(MinutekitError, ValueError):
    pass


# evaluation
class NoReferences(MinutekitError, ValueError):
    pass


class DegenerateInput(MinutekitError, ValueError):
    pass


# cli / persistence
class ConfigError(MinutekitError, ValueError):
    pass


class ModelVersionError(MinutekitError, ValueError):
    pass

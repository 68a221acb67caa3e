"""Exception hierarchy shared across the package.

Three broad families map onto CLI exit codes: configuration problems (2),
data/file problems (3), and numerical divergence (4).
"""


class SnnLzcError(Exception):
    """Base class for all package errors."""


class ConfigError(SnnLzcError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class DataError(SnnLzcError):
    """Malformed or missing data files (CLI exit code 3)."""


class NumericalError(SnnLzcError):
    """Numerical divergence during training (CLI exit code 4)."""


class FewerThanTwoSpikesError(SnnLzcError):
    """Inter-spike intervals need at least two spikes."""


class DimensionMismatchError(SnnLzcError):
    """Vector/matrix dimensions do not agree."""


class WidthDoesNotDivideSequenceError(ConfigError):
    """Layer width must divide the input sequence length."""


class GridMismatchError(SnnLzcError):
    """Operands live on different time grids."""


class LayerWidthMismatchError(SnnLzcError):
    """Spike-train count does not match the layer width."""


class EmptySequenceError(SnnLzcError):
    """LZ parsing requires a non-empty sequence."""


class SequenceTooShortError(SnnLzcError):
    """Normalized LZC requires length >= 2."""


class MissingClassError(SnnLzcError):
    """Every class needs at least one training example."""


class EmptyTestSetError(SnnLzcError):
    """Accuracy over an empty test set is undefined."""


class EmptyDatasetError(SnnLzcError):
    """Hyperparameter search needs a non-empty dataset."""


class MissingPotentialTraceError(SnnLzcError):
    """Tempotron updates need retained membrane potentials."""


class NonfiniteLossError(NumericalError):
    """Training loss became NaN or infinite."""


class NoResultsFoundError(DataError):
    """Report generation found no completed results."""

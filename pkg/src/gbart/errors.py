"""Exception types raised by the gbart library."""


class GbartError(Exception):
    """Base class for all gbart errors."""


class InvalidInputError(GbartError, ValueError):
    """An input array or argument violates a precondition (non-finite values, bad shape, ...)."""


class InvalidMoveError(GbartError, ValueError):
    """A structural tree edit targets a node that does not exist or has the wrong shape."""


class GroupViolationError(GbartError, ValueError):
    """A split rule uses a variable outside the tree's assigned group."""


class DegenerateResponseError(GbartError, ValueError):
    """The response is constant, so it cannot be scaled for sampling.

    Callers that need a model anyway should fall back to predicting the mean.
    """


class InvalidPartitionError(GbartError, ValueError):
    """A variable partition is not a disjoint, covering, nonempty grouping of predictors."""


class InsufficientDataError(GbartError, ValueError):
    """Too few observations for the requested split or search."""


class InvalidCaseError(GbartError, ValueError):
    """Unknown synthetic dataset case number."""


class InvalidFoldError(GbartError, ValueError):
    """Fold count outside the valid range for the dataset size."""


class CsvParseError(GbartError, ValueError):
    """A CSV cell could not be parsed as a finite real number."""


class CsvSchemaError(GbartError, ValueError):
    """The CSV file is missing the target column or a requested column."""

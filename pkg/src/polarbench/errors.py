"""Exception types shared across the package."""


class PolarBenchError(Exception):
    """Base class for all errors raised by polarbench."""


class ParseError(PolarBenchError, ValueError):
    """A token could not be parsed according to its column kind."""


class SchemaMismatch(PolarBenchError, ValueError):
    """Row or parameter layout does not match the expected schema."""


class EmptyDataset(PolarBenchError, ValueError):
    pass


class DomainError(PolarBenchError, ValueError):
    """A value lies outside the domain of the operation."""


class MissingNotRepresentable(PolarBenchError, ValueError):
    """Compact representations have no room for a missing value."""


class LengthMismatch(PolarBenchError, ValueError):
    pass


class EmptyModel(PolarBenchError, ValueError):
    pass


class ClassTooSmall(PolarBenchError, ValueError):
    pass


class SingleClassFold(PolarBenchError, ValueError):
    """AUROC is undefined because only one class is present."""


class TooFewPairs(PolarBenchError, ValueError):
    """Fewer than three non-zero paired differences."""


class DegenerateClassWarning(UserWarning):
    """A class has fewer rows than there are folds."""

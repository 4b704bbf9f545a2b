"""Exception hierarchy.

Every error carries a short ``tag`` that the command line driver prints as a
stable prefix, so scripts can match on the error class without parsing text.
"""


class IgoError(Exception):
    tag = "error"


class DimensionError(IgoError, ValueError):
    tag = "dimension"


class SymmetryError(IgoError, ValueError):
    tag = "symmetry"


class ConvergenceError(IgoError, ArithmeticError):
    tag = "convergence"


class RankError(IgoError, ValueError):
    tag = "rank"

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class DomainError(IgoError, ValueError):
    tag = "domain"


class SampleSizeError(IgoError, ValueError):
    tag = "sample-size"


class NotFittedError(IgoError, AttributeError):
    tag = "not-fitted"


# file formats


class FileFormatError(IgoError):
    """Base for everything that is wrong with a file on disk."""

    tag = "format"

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = str(path)


class UnsupportedFormatError(FileFormatError):
    tag = "unsupported-format"


class TruncatedFileError(FileFormatError):
    tag = "truncated"


class ZeroDimensionError(FileFormatError):
    tag = "zero-dimension"


class BadMagicError(FileFormatError):
    tag = "bad-magic"


class VersionMismatchError(FileFormatError):
    tag = "version"


class PayloadLengthError(FileFormatError):
    tag = "payload-length"


class NonFiniteError(FileFormatError):
    tag = "non-finite"


class ManifestError(FileFormatError):
    tag = "manifest"


class MissingGroundTruthError(IgoError):
    tag = "missing-ground-truth"

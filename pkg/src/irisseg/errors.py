"""Exception hierarchy.

Every error carries a stable ``code`` (its class name) so the CLI can emit a
machine-readable record. ``exit_status`` follows the CLI convention: 2 for
data errors, 3 for internal invariant failures.
"""


class IrisSegError(Exception):
    exit_status = 2

    @property
    def code(self):
        return type(self).__name__


# geometry
class InvalidBoundary(IrisSegError):
    pass


class NoIntersection(IrisSegError):
    pass


class NonPositiveScale(IrisSegError):
    pass


# masks / metrics
class DimensionMismatch(IrisSegError):
    pass


class EmptySequence(IrisSegError):
    pass


# rubbersheet / encoder
class InvalidDimensions(IrisSegError):
    pass


class BadBandCount(IrisSegError):
    pass


class FingerprintMismatch(IrisSegError):
    pass


# statistics
class EmptyPopulation(IrisSegError):
    pass


class DegenerateTable(IrisSegError):
    pass


class LengthMismatch(IrisSegError):
    pass


class TooShort(IrisSegError):
    pass


class ComparisonSetMismatch(IrisSegError):
    pass


# experiments
class InvalidScaleSet(IrisSegError):
    pass


class UnknownImageId(IrisSegError):
    pass


class InvalidConfig(IrisSegError):
    pass


# file formats
class MalformedHeader(IrisSegError):
    pass


class TruncatedData(IrisSegError):
    pass


class UnsupportedMaxval(IrisSegError):
    pass


class ParseError(IrisSegError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantViolation(IrisSegError):
    pass


class PupilExceedsLimbic(InvariantViolation):
    pass


class InternalInvariantError(IrisSegError):
    exit_status = 3

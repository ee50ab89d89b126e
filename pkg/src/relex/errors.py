"""Exception hierarchy.

Each class carries an ``exit_code`` used by the command line: 2 for input
validation, 3 for resource limits, 4 for violated mathematical properties.
"""


class RelexError(Exception):
    exit_code = 1


class ValidationError(RelexError, ValueError):
    exit_code = 2


class ResourceLimit(RelexError):
    exit_code = 3

    def __init__(self, message, largest_feasible=None):
        super().__init__(message)
        self.largest_feasible = largest_feasible


class PropertyViolation(RelexError):
    exit_code = 4


# groups
class OrderMismatch(PropertyViolation):
    pass


class ActionNotHomomorphic(ValidationError):
    pass


class NotAQuotient(PropertyViolation):
    pass


# cayley
class NotGenerating(ValidationError):
    pass


class Disconnected(ValidationError):
    pass


class NotASubgroup(ValidationError):
    pass


class NotInvariant(ValidationError):
    pass


# spectra
class NotSymmetric(ValidationError):
    pass


class NotNormal(ValidationError):
    pass


class DegenerateDenominator(ValidationError):
    pass


class NoConvergence(RelexError):
    exit_code = 4


class ConvergenceError(RelexError):
    exit_code = 4


# embed
class SandwichViolation(PropertyViolation):
    pass


class LipschitzViolation(PropertyViolation):
    pass


class NotCND(PropertyViolation):
    pass


# detect
class GenerationFailed(RelexError):
    exit_code = 3


class CompressionTooWeak(PropertyViolation):
    pass


# cache
class CorruptCache(ValidationError):
    pass


class VersionMismatch(ValidationError):
    pass

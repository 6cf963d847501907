# coding: utf-8


"""Exceptions raised across berezin_lab.

Every exception derives from ``ValueError`` through :class:`BerezinLabError`, so callers written
against plain ``ValueError`` keep working.
"""


__all__ = ['BerezinLabError', 'ShapeMismatch', 'NotSkewSymmetric', 'OddOrder', 'NotHermitian',
           'Singular', 'NotSelfDual', 'NotBasisProjection', 'KernelPairingFailure', 'NotBogoliubov',
           'NotAntisymmetric', 'DegenerateOverlap', 'CapacityExceeded', 'SymbolViolation',
           'ParityViolation', 'NotSelfAdjoint', 'SpaceMismatch', 'SingularCovariance',
           'GridTooCoarse', 'NotPSD', 'NotApplicable', 'GapTooSmall', 'ModelError', 'ConfigError',
           'VerificationFailure']


class BerezinLabError(ValueError):
    """Base class; ``context`` keeps the numbers behind the failure."""

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_record(self):
        record = {'error': type(self).__name__, 'message': self.message}
        record.update({k: _plain(v) for k, v in self.context.items()})
        return record


def _plain(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


class ShapeMismatch(BerezinLabError):
    pass


class NotSkewSymmetric(BerezinLabError):
    pass


class OddOrder(BerezinLabError):
    pass


class NotHermitian(BerezinLabError):
    pass


class Singular(BerezinLabError, ArithmeticError):
    pass


class NotSelfDual(BerezinLabError):
    pass


class NotBasisProjection(BerezinLabError):
    pass


class KernelPairingFailure(BerezinLabError):
    pass


class NotBogoliubov(BerezinLabError):
    pass


class NotAntisymmetric(BerezinLabError):
    pass


class DegenerateOverlap(BerezinLabError):
    pass


class CapacityExceeded(BerezinLabError):
    pass


class SymbolViolation(BerezinLabError):
    pass


class ParityViolation(BerezinLabError):
    pass


class NotSelfAdjoint(BerezinLabError):
    pass


class SpaceMismatch(BerezinLabError):
    pass


class SingularCovariance(Singular):
    pass


class GridTooCoarse(BerezinLabError):
    pass


class NotPSD(BerezinLabError):
    pass


class NotApplicable(BerezinLabError):
    pass


class GapTooSmall(BerezinLabError):
    pass


class ModelError(BerezinLabError):
    """Invalid or inconsistent model file."""


class ConfigError(BerezinLabError):
    """Invalid command-line configuration."""


class VerificationFailure(BerezinLabError):
    """A bound was violated or two evaluation routes disagree."""

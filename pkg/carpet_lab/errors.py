"""
errors.py

This module defines the exception hierarchy of the carpet lab.

Every exception derives from CarpetLabError, itself a RuntimeError, and carries the
exit code the command line surface reports when the exception escapes a command:

- InputError (2): the input document or an argument cannot describe a valid request
- BudgetError (3): the request needs more depth, resolution or samples than allowed
- GeometryError (1): a geometric certificate could not be produced for the input
"""


class CarpetLabError(RuntimeError):
    """Base class for all carpet lab errors."""

    exit_code = 1


class InputError(CarpetLabError):
    """The input cannot describe a valid request."""

    exit_code = 2


class BudgetError(CarpetLabError):
    """The request exceeds a configured budget."""

    exit_code = 3


class GeometryError(CarpetLabError):
    """A geometric certificate could not be produced."""

    exit_code = 1


class InputParseError(InputError):
    """The IFS document or a preset is malformed."""


class EmptySystemError(InputError):
    """Fewer than two maps were given."""


class NonContractiveError(InputError):
    """Some linear entry has absolute value at least one."""


class DegenerateMapError(InputError):
    """Some linear entry is zero."""


class SymbolOutOfRangeError(InputError):
    """A word uses a symbol outside 1..N."""


class NoInvariantStartError(InputError):
    """No invariant starting interval was found for the hull iteration."""


class ScaleOutOfRangeError(InputError):
    """A scale lies outside (0, 1)."""


class NegativeEpsilonError(InputError):
    """A neighbourhood radius is negative."""


class ScalingBelowOneError(InputError):
    """A miniset scaling coefficient is below one."""


class EmptyInputError(InputError):
    """A point set is empty."""


class EmptyCloudError(InputError):
    """A tangent cloud is empty."""


class PreconditionError(InputError):
    """A structural condition required by the operation does not hold."""


class DepthBudgetExceededError(BudgetError):
    """The word enumeration would exceed the configured budget."""


class ResolutionTooCoarseError(BudgetError):
    """The sample resolution is too coarse for the requested scales."""


class UndecidableError(BudgetError):
    """The certification depth is too small to decide the predicate."""


class EmptyIntersectionError(GeometryError):
    """A set has no points inside the restricting ball."""


class EmptyIndexSetError(GeometryError):
    """No index satisfies the defining inequality at this scale."""


class UncertifiedHullError(GeometryError):
    """The bounding rectangle is not certified tightly enough for an exact sweep."""

"""Exception types raised across the package."""


class CRRigidError(Exception):
    """Base class for all errors raised by cr_rigid."""


class JetError(CRRigidError, ValueError):
    """Invalid jet operation (center mismatch, order too low, division by zero jet)."""


class SeriesDomainError(JetError):
    """A univariate series cannot be expanded at the requested point."""


class ImplicitSolveError(CRRigidError):
    """The implicit function solve did not produce a graph jet."""


class DomainError(CRRigidError, ValueError):
    """A point lies outside the evaluation domain of a surface."""


class LeviDegenerateError(CRRigidError):
    """The Levi form is below the nondegeneracy threshold."""


class RealizationError(CRRigidError):
    """An ES-family surface could not be realized on any admissible radius."""


class GridError(CRRigidError, ValueError):
    """A grid is too small or otherwise unusable."""


class SpecError(CRRigidError, ValueError):
    """Malformed surface specification document."""

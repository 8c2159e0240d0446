"""Exception hierarchy for vekualab.

Every error that library operations raise on contract violations lives here so
callers (and the CLI exit-code mapping) can catch one base class.
"""

from __future__ import annotations


class VekuaError(Exception):
    """Base class for all vekualab errors."""


# --- geometry ---------------------------------------------------------------

class InvalidDomain(VekuaError):
    """Domain parameters violate the shape invariants (or domain is unbounded
    where a bounded one is required)."""


class SpacingTooCoarse(VekuaError):
    """Grid spacing leaves fewer than 4 samples across a dimension or fewer
    than 4 interior points."""


class EmptyIntersection(VekuaError):
    """Truncation disc contains no interior point of the domain."""


# --- weights ----------------------------------------------------------------

class DomainSingularity(VekuaError):
    """A weight field was evaluated on its singular set."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = list(points) if points is not None else []


class NuOutOfRange(VekuaError):
    """|nu| >= 1 somewhere, breaking the sqrt(1 - nu^2) transforms."""


class SigmaNonpositive(VekuaError):
    """sigma <= 0 somewhere; the conductivity link requires sigma > 0."""


class MissingNeighbor(VekuaError):
    """A finite-difference stencil needed a value that is undefined (NaN or
    outside the sampled closure)."""


# --- pompeiu / solver -------------------------------------------------------

class TargetOutsideDomain(VekuaError):
    """Transform evaluation was requested outside the closed domain."""


class EmptyDomain(VekuaError):
    """No quadrature cells: the grid carries no in-domain points."""


class SeedNotHolomorphic(VekuaError):
    """The solver seed failed the discrete holomorphy gate."""


class NoConvergence(VekuaError):
    """Fixed-point iteration failed to contract; carries the update history."""

    def __init__(self, message, updates):
        super().__init__(message)
        self.updates = list(updates)


class SingularWeight(VekuaError):
    """The weight is undefined on grid points the operation must evaluate."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = list(points) if points is not None else []


class RadiusOutOfRange(VekuaError):
    """A circle-mean radius fell outside (0, 1)."""


# --- principles -------------------------------------------------------------

class DomainNotInRightHalfPlane(VekuaError):
    """A half-plane condition was requested on a grid with Re z <= 0 points."""


class DiscIntersectsDomain(VekuaError):
    """The log-map disc D(center, radius) meets the closed domain."""


class BranchCutCrossesDomain(VekuaError):
    """The chosen logarithm branch cut passes through the domain."""


class StripNotCovered(VekuaError):
    """The grid does not cover the requested strip/abscissa range."""


class ZeroModulusLine(VekuaError):
    """Some sampled line has sup |w| = 0, so log-convexity is undefined."""


class NonpositiveBoundaryMax(VekuaError):
    """M(a) or M(b) is not strictly positive."""


class NoDampersForUnboundedDomain(VekuaError):
    """Unbounded-mode verification was requested without a damper family."""


class ImageOutsideDomain(DomainSingularity):
    """The exponential map sent evaluation points into the weight's singular
    set or otherwise outside its domain of definition."""


# --- cli --------------------------------------------------------------------

class ConfigInvalid(VekuaError):
    """Experiment configuration failed to parse or validate."""

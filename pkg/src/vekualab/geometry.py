"""Planar domains and their uniform-grid discretizations.

Domains are immutable value objects describing open subsets of the plane.
Grids tile the bounding box with a uniform spacing and classify every lattice
node as interior, boundary, truncation edge, or outside.  Truncation edges
(arcs or cut lines introduced only to make an unbounded set finite) are tagged
separately from the true topological boundary so that maximum-principle
verifiers can treat them with an exhaustion argument instead of counting them
as boundary data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import EmptyIntersection, InvalidDomain, SpacingTooCoarse

# Membership tolerance for the continuous domains: a point within this
# distance (in constraint slack) of the boundary counts as boundary.
BOUNDARY_TOL = 1e-12


class Membership(IntEnum):
    """Continuous-domain membership of a single point."""

    OUTSIDE = 0
    BOUNDARY = 1
    INTERIOR = 2


class PointClass(IntEnum):
    """Grid-node classification.  TRUNCATION marks nodes resolved to the
    artificial truncation edge rather than the true boundary."""

    OUTSIDE = 0
    BOUNDARY = 1
    TRUNCATION = 2
    INTERIOR = 3


def _as_complex_array(z):
    return np.asarray(z, dtype=np.complex128)


@dataclass(frozen=True)
class DomainSpec:
    """Base class for domain shapes.  Subclasses implement the slack masks
    used for membership and the distances to the true-boundary and
    truncation-edge parts."""

    kind = "abstract"

    # -- shape predicates (vectorized over complex arrays) -------------------

    def strict_inside(self, z) -> np.ndarray:
        raise NotImplementedError

    def in_closure(self, z) -> np.ndarray:
        raise NotImplementedError

    def part_distances(self, z):
        """(distance to true boundary, distance to truncation edge)."""
        raise NotImplementedError

    # -- extents --------------------------------------------------------------

    @property
    def is_bounded(self) -> bool:
        raise NotImplementedError

    def bounding_box(self):
        """(x0, x1, y0, y1) of the closure; InvalidDomain if unbounded."""
        raise NotImplementedError

    def min_abs(self) -> float:
        """inf |z| over the open domain."""
        raise NotImplementedError

    def max_abs(self) -> float:
        """sup |z| over the closure (inf for unbounded domains)."""
        raise NotImplementedError

    # -- serialization ---------------------------------------------------------

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Rectangle(DomainSpec):
    x0: float
    x1: float
    y0: float
    y1: float

    kind = "rect"

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidDomain(
                f"rectangle needs x0 < x1 and y0 < y1, got "
                f"({self.x0}, {self.x1}, {self.y0}, {self.y1})"
            )

    def _slack(self, z):
        z = _as_complex_array(z)
        x, y = z.real, z.imag
        return np.minimum.reduce([x - self.x0, self.x1 - x, y - self.y0, self.y1 - y])

    def strict_inside(self, z):
        return self._slack(z) > BOUNDARY_TOL

    def in_closure(self, z):
        return self._slack(z) >= -BOUNDARY_TOL

    def part_distances(self, z):
        z = _as_complex_array(z)
        x, y = z.real, z.imag
        d_true = np.minimum.reduce(
            [np.abs(x - self.x0), np.abs(self.x1 - x), np.abs(y - self.y0), np.abs(self.y1 - y)]
        )
        return d_true, np.full_like(d_true, np.inf)

    @property
    def is_bounded(self):
        return True

    def bounding_box(self):
        return (self.x0, self.x1, self.y0, self.y1)

    def min_abs(self):
        dx = 0.0 if self.x0 <= 0.0 <= self.x1 else min(abs(self.x0), abs(self.x1))
        dy = 0.0 if self.y0 <= 0.0 <= self.y1 else min(abs(self.y0), abs(self.y1))
        return math.hypot(dx, dy)

    def max_abs(self):
        return max(
            math.hypot(x, y) for x in (self.x0, self.x1) for y in (self.y0, self.y1)
        )

    def to_config(self):
        return {"kind": "rect", "x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1}


@dataclass(frozen=True)
class UnitDisc(DomainSpec):
    kind = "unit_disc"

    def _slack(self, z):
        return 1.0 - np.abs(_as_complex_array(z))

    def strict_inside(self, z):
        return self._slack(z) > BOUNDARY_TOL

    def in_closure(self, z):
        return self._slack(z) >= -BOUNDARY_TOL

    def part_distances(self, z):
        d_true = np.abs(1.0 - np.abs(_as_complex_array(z)))
        return d_true, np.full_like(d_true, np.inf)

    @property
    def is_bounded(self):
        return True

    def bounding_box(self):
        return (-1.0, 1.0, -1.0, 1.0)

    def min_abs(self):
        return 0.0

    def max_abs(self):
        return 1.0

    def to_config(self):
        return {"kind": "unit_disc"}


@dataclass(frozen=True)
class TruncatedHalfPlane(DomainSpec):
    """Right half-plane {Re z > x_min} truncated to the disc |z| < radius.

    The segment on Re z = x_min is the true boundary; the circular arc is a
    truncation edge.  radius may be math.inf, in which case the domain cannot
    be gridded until `truncate` is applied.
    """

    x_min: float = 0.0
    radius: float = math.inf

    kind = "halfplane"

    def __post_init__(self):
        if self.x_min < 0.0:
            raise InvalidDomain(f"half-plane x_min must be >= 0, got {self.x_min}")
        if not (self.radius > self.x_min):
            raise InvalidDomain(
                f"half-plane radius must exceed x_min, got radius={self.radius}"
            )

    def _slack(self, z):
        z = _as_complex_array(z)
        s = z.real - self.x_min
        if math.isfinite(self.radius):
            s = np.minimum(s, self.radius - np.abs(z))
        return s

    def strict_inside(self, z):
        return self._slack(z) > BOUNDARY_TOL

    def in_closure(self, z):
        return self._slack(z) >= -BOUNDARY_TOL

    def part_distances(self, z):
        z = _as_complex_array(z)
        d_true = np.abs(z.real - self.x_min)
        if math.isfinite(self.radius):
            d_trunc = np.abs(self.radius - np.abs(z))
        else:
            d_trunc = np.full_like(d_true, np.inf)
        return d_true, d_trunc

    @property
    def is_bounded(self):
        return math.isfinite(self.radius)

    def bounding_box(self):
        if not self.is_bounded:
            raise InvalidDomain("half-plane with infinite radius has no bounding box")
        return (self.x_min, self.radius, -self.radius, self.radius)

    def min_abs(self):
        return self.x_min

    def max_abs(self):
        return self.radius

    def to_config(self):
        return {"kind": "halfplane", "x_min": self.x_min, "radius": self.radius}


@dataclass(frozen=True)
class Strip(DomainSpec):
    """Vertical strip {a < Re z < b} truncated to |Im z| < y_cut.

    The vertical lines Re z = a, b are the true boundary; the horizontal cut
    lines |Im z| = y_cut are truncation edges.
    """

    a: float
    b: float
    y_cut: float

    kind = "strip"

    def __post_init__(self):
        if not (0.0 < self.a < self.b):
            raise InvalidDomain(f"strip needs 0 < a < b, got a={self.a}, b={self.b}")
        if not self.y_cut > 0.0:
            raise InvalidDomain(f"strip y_cut must be > 0, got {self.y_cut}")

    def _slack(self, z):
        z = _as_complex_array(z)
        x, y = z.real, z.imag
        return np.minimum.reduce([x - self.a, self.b - x, self.y_cut - np.abs(y)])

    def strict_inside(self, z):
        return self._slack(z) > BOUNDARY_TOL

    def in_closure(self, z):
        return self._slack(z) >= -BOUNDARY_TOL

    def part_distances(self, z):
        z = _as_complex_array(z)
        x, y = z.real, z.imag
        d_true = np.minimum(np.abs(x - self.a), np.abs(self.b - x))
        d_trunc = np.abs(self.y_cut - np.abs(y))
        return d_true, d_trunc

    @property
    def is_bounded(self):
        return True

    def bounding_box(self):
        return (self.a, self.b, -self.y_cut, self.y_cut)

    def min_abs(self):
        return self.a

    def max_abs(self):
        return math.hypot(self.b, self.y_cut)

    def to_config(self):
        return {"kind": "strip", "a": self.a, "b": self.b, "y_cut": self.y_cut}


@dataclass(frozen=True)
class DiscComplement(DomainSpec):
    """Complement of the closed disc D(center, radius): the ambient domain of
    the log-map transfer, where the removed disc hosts the logarithm's
    singularity.  Unbounded; grid it via `truncate`."""

    center: complex
    radius: float

    kind = "disc_complement"

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidDomain(f"disc radius must be > 0, got {self.radius}")

    def _slack(self, z):
        return np.abs(_as_complex_array(z) - self.center) - self.radius

    def strict_inside(self, z):
        return self._slack(z) > BOUNDARY_TOL

    def in_closure(self, z):
        return self._slack(z) >= -BOUNDARY_TOL

    def part_distances(self, z):
        d_true = np.abs(self._slack(z))
        return d_true, np.full_like(d_true, np.inf)

    @property
    def is_bounded(self):
        return False

    def bounding_box(self):
        raise InvalidDomain("disc complement is unbounded; truncate it first")

    def min_abs(self):
        d = abs(self.center)
        return 0.0 if d > self.radius else self.radius - d

    def max_abs(self):
        return math.inf

    def to_config(self):
        return {
            "kind": "disc_complement",
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
        }


@dataclass(frozen=True)
class TruncatedDomain(DomainSpec):
    """Intersection of a base domain with the disc |z| < trunc_radius.

    Keeps the base's boundary decomposition: original boundary stays "true",
    the new arc is a truncation edge.
    """

    base: DomainSpec
    trunc_radius: float

    kind = "truncated"

    def __post_init__(self):
        if not self.trunc_radius > 0.0:
            raise InvalidDomain(f"truncation radius must be > 0, got {self.trunc_radius}")

    def _slack(self, z):
        z = _as_complex_array(z)
        return np.minimum(self.base._slack(z), self.trunc_radius - np.abs(z))

    def strict_inside(self, z):
        z = _as_complex_array(z)
        return self.base.strict_inside(z) & (np.abs(z) < self.trunc_radius - BOUNDARY_TOL)

    def in_closure(self, z):
        z = _as_complex_array(z)
        return self.base.in_closure(z) & (np.abs(z) <= self.trunc_radius + BOUNDARY_TOL)

    def part_distances(self, z):
        z = _as_complex_array(z)
        d_true, d_trunc = self.base.part_distances(z)
        d_arc = np.abs(self.trunc_radius - np.abs(z))
        return d_true, np.minimum(d_trunc, d_arc)

    @property
    def is_bounded(self):
        return True

    def bounding_box(self):
        r = self.trunc_radius
        if self.base.is_bounded:
            bx0, bx1, by0, by1 = self.base.bounding_box()
            return (max(bx0, -r), min(bx1, r), max(by0, -r), min(by1, r))
        # intersect the unbounded base's half-plane style constraints with the disc
        if isinstance(self.base, TruncatedHalfPlane):
            return (self.base.x_min, r, -r, r)
        if isinstance(self.base, Strip):
            return (self.base.a, min(self.base.b, r), -min(self.base.y_cut, r), min(self.base.y_cut, r))
        return (-r, r, -r, r)

    def min_abs(self):
        return self.base.min_abs()

    def max_abs(self):
        return min(self.base.max_abs(), self.trunc_radius)

    def to_config(self):
        return {"kind": "truncated", "base": self.base.to_config(), "radius": self.trunc_radius}


def domain_from_config(cfg: dict) -> DomainSpec:
    """Rebuild a DomainSpec from its `to_config` dictionary."""
    kind = cfg.get("kind")
    if kind == "rect":
        return Rectangle(cfg["x0"], cfg["x1"], cfg["y0"], cfg["y1"])
    if kind == "unit_disc":
        return UnitDisc()
    if kind == "halfplane":
        return TruncatedHalfPlane(cfg.get("x_min", 0.0), cfg.get("radius", math.inf))
    if kind == "strip":
        return Strip(cfg["a"], cfg["b"], cfg["y_cut"])
    if kind == "disc_complement":
        c = cfg["center"]
        return DiscComplement(complex(c[0], c[1]), cfg["radius"])
    if kind == "truncated":
        return TruncatedDomain(domain_from_config(cfg["base"]), cfg["radius"])
    raise InvalidDomain(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


class Grid:
    """Uniform axis-aligned lattice over a domain's bounding box.

    points[i, j] = (x0 + i*h) + 1j*(y0 + j*h); classes holds a PointClass per
    node.  All arrays are read-only after construction; operations on grids
    are pure and thread-safe.
    """

    def __init__(self, spec: DomainSpec, spacing: float, points: np.ndarray, classes: np.ndarray):
        self.spec = spec
        self.spacing = float(spacing)
        self.points = points
        self.classes = classes
        self.nx, self.ny = points.shape
        self.x0 = float(points[0, 0].real)
        self.y0 = float(points[0, 0].imag)
        for arr in (self.points, self.classes):
            arr.setflags(write=False)

    # -- masks -----------------------------------------------------------------

    @property
    def interior_mask(self) -> np.ndarray:
        return self.classes == PointClass.INTERIOR

    @property
    def boundary_mask(self) -> np.ndarray:
        return self.classes == PointClass.BOUNDARY

    @property
    def truncation_mask(self) -> np.ndarray:
        return self.classes == PointClass.TRUNCATION

    @property
    def closure_mask(self) -> np.ndarray:
        return self.classes != PointClass.OUTSIDE

    # -- point accessors ---------------------------------------------------------

    def interior_points(self) -> np.ndarray:
        return self.points[self.interior_mask]

    def closure_points(self) -> np.ndarray:
        return self.points[self.closure_mask]

    def truncation_points(self) -> np.ndarray:
        return self.points[self.truncation_mask]

    def true_boundary_points(self) -> np.ndarray:
        return self.points[self.boundary_mask]

    def sample(self, fn) -> np.ndarray:
        """Evaluate a complex-valued callable on the closure; NaN outside."""
        out = np.full(self.points.shape, np.nan + 1j * np.nan, dtype=np.complex128)
        m = self.closure_mask
        out[m] = fn(self.points[m])
        return out

    def index_of(self, z: complex):
        """Nearest lattice index (ix, iy) of a point; may fall off-lattice."""
        ix = int(round((z.real - self.x0) / self.spacing))
        iy = int(round((z.imag - self.y0) / self.spacing))
        return ix, iy

    def __repr__(self):
        n_int = int(np.count_nonzero(self.interior_mask))
        return (
            f"Grid({self.spec.kind}, h={self.spacing}, {self.nx}x{self.ny} nodes, "
            f"{n_int} interior)"
        )


def build_grid(spec: DomainSpec, spacing: float) -> Grid:
    """Tile the domain's bounding box with a uniform lattice and classify nodes.

    A node is Interior when it lies strictly inside the continuous domain and
    all four axis neighbors (at distance `spacing`) lie in the closed domain;
    in-closure nodes that fail this are Boundary or TruncationEdge, resolved to
    whichever boundary part is nearer.
    """
    if not spacing > 0.0:
        raise SpacingTooCoarse(f"spacing must be > 0, got {spacing}")
    if not spec.is_bounded:
        raise InvalidDomain(
            f"{spec.kind} domain is unbounded; apply truncate() before gridding"
        )
    x0, x1, y0, y1 = spec.bounding_box()
    nx = int(math.floor((x1 - x0) / spacing + 1e-9)) + 1
    ny = int(math.floor((y1 - y0) / spacing + 1e-9)) + 1
    if nx < 4 or ny < 4:
        raise SpacingTooCoarse(
            f"spacing {spacing} leaves only {nx}x{ny} samples across the bounding box"
        )
    xs = x0 + spacing * np.arange(nx)
    ys = y0 + spacing * np.arange(ny)
    Z = xs[:, None] + 1j * ys[None, :]

    inside = spec.strict_inside(Z)
    closure = spec.in_closure(Z)
    neighbors_ok = (
        spec.in_closure(Z + spacing)
        & spec.in_closure(Z - spacing)
        & spec.in_closure(Z + 1j * spacing)
        & spec.in_closure(Z - 1j * spacing)
    )
    interior = inside & neighbors_ok
    rim = closure & ~interior

    classes = np.zeros(Z.shape, dtype=np.int8)
    classes[interior] = PointClass.INTERIOR
    if np.any(rim):
        d_true, d_trunc = spec.part_distances(Z[rim])
        classes[rim] = np.where(d_trunc < d_true, PointClass.TRUNCATION, PointClass.BOUNDARY)

    n_interior = int(np.count_nonzero(interior))
    if n_interior < 4:
        raise SpacingTooCoarse(
            f"spacing {spacing} yields only {n_interior} interior points"
        )
    return Grid(spec, spacing, Z, classes)


def in_domain(spec: DomainSpec, z: complex) -> Membership:
    """Exact continuous membership of a single point (tolerance 1e-12)."""
    if bool(np.asarray(spec.strict_inside(np.complex128(z)))):
        return Membership.INTERIOR
    if bool(np.asarray(spec.in_closure(np.complex128(z)))):
        return Membership.BOUNDARY
    return Membership.OUTSIDE


def boundary_points(grid: Grid) -> np.ndarray:
    """All rim nodes (true boundary and truncation edges), row-major order.

    Use grid.truncation_points() / grid.true_boundary_points() to split by
    part.
    """
    return grid.points[grid.boundary_mask | grid.truncation_mask]


def truncate(spec: DomainSpec, radius: float) -> DomainSpec:
    """Intersect a domain with the disc |z| < radius.

    Returns the base spec unchanged when it already fits inside the disc, a
    same-kind spec when the intersection stays in the family (half-planes),
    and a TruncatedDomain wrapper otherwise.  The wrapper keeps the original
    boundary / arc decomposition.
    """
    if not radius > 0.0:
        raise InvalidDomain(f"truncation radius must be > 0, got {radius}")
    if spec.min_abs() >= radius - BOUNDARY_TOL:
        raise EmptyIntersection(
            f"{spec.kind} domain lies at distance >= {radius} from the origin"
        )
    if spec.is_bounded and spec.max_abs() <= radius:
        return spec
    if isinstance(spec, TruncatedHalfPlane):
        return TruncatedHalfPlane(spec.x_min, min(spec.radius, radius))
    if isinstance(spec, TruncatedDomain):
        return TruncatedDomain(spec.base, min(spec.trunc_radius, radius))
    return TruncatedDomain(spec, radius)

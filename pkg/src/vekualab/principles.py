"""Condition checkers and empirical verifiers for the maximum principles.

The pointwise inequality 2|alpha|^2 >= |d alpha| governs the bounded-domain
maximum principle; on unbounded domains a damper family h_eps(z) = 1/(1+eps*z)
adds the term |alpha| |d h_eps| / |h_eps|, and for domains whose complement
contains a disc the damper is built from a logarithm g_eps = 1/(1+eps*log((z-a)/r)).
Across a vertical strip the three-lines variant adds the constant
|alpha| |log(M(a)/M(b))| / (b-a).

"For all eps > 0" cannot be enumerated, so every checker reports margins
minimized over a logarithmic eps grid and, in addition, over the analytic
envelope sup_eps of the damper ratio (which is monotone increasing in eps, so
the envelope is its eps -> infinity limit).  Reports state which mode produced
each verdict; the enumerated grid supplies concrete witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BranchCutCrossesDomain,
    DiscIntersectsDomain,
    DomainNotInRightHalfPlane,
    ImageOutsideDomain,
    NoDampersForUnboundedDomain,
    NonpositiveBoundaryMax,
    SingularWeight,
    StripNotCovered,
    ZeroModulusLine,
)
from .geometry import Grid, Membership, build_grid, in_domain
from .solver import SolutionField
from .weights import WeightField, wirtinger

EQUALITY_RTOL = 1e-10
DEFAULT_EPSILONS = np.logspace(-3.0, 3.0, 25)


# ---------------------------------------------------------------------------
# Damper families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DamperFamily:
    """Family of holomorphic dampers indexed by eps > 0.

    kind "halfplane": h_eps(z) = 1/(1 + eps z), contracting on Re z >= 0.
    kind "logmap":    g_eps(z) = 1/(1 + eps log((z-a)/r)) with the branch cut
    of the logarithm rotated away from the domain.
    """

    kind: str
    epsilons: np.ndarray
    center: complex = 0j
    radius: float = 0.0
    cut_angle: Optional[float] = None

    @classmethod
    def halfplane(cls, epsilons=None) -> "DamperFamily":
        eps = np.asarray(DEFAULT_EPSILONS if epsilons is None else epsilons, dtype=float)
        if np.any(eps <= 0.0):
            raise ValueError("damper eps values must be > 0")
        return cls(kind="halfplane", epsilons=eps)

    @classmethod
    def logmap(cls, center: complex, radius: float, epsilons=None, cut_angle=None) -> "DamperFamily":
        eps = np.asarray(DEFAULT_EPSILONS if epsilons is None else epsilons, dtype=float)
        if np.any(eps <= 0.0):
            raise ValueError("damper eps values must be > 0")
        if radius <= 0.0:
            raise ValueError(f"log-map radius must be > 0, got {radius}")
        return cls(
            kind="logmap",
            epsilons=eps,
            center=complex(center),
            radius=float(radius),
            cut_angle=cut_angle,
        )

    # -- log branch -----------------------------------------------------------

    def log_map(self, z, cut_angle: Optional[float] = None):
        """log((z - center)/radius) on the branch whose cut ray leaves the
        disc center along cut_angle; arguments land in (cut - 2pi, cut]."""
        phi = self.cut_angle if cut_angle is None else cut_angle
        if phi is None:
            raise ValueError("log-map damper needs a resolved cut angle")
        z = np.asarray(z, dtype=np.complex128)
        w = z - self.center
        theta = (phi - math.pi) + np.angle(w * np.exp(-1j * (phi - math.pi)))
        return np.log(np.abs(w) / self.radius) + 1j * theta

    # -- evaluations ------------------------------------------------------------

    def value(self, z, eps: float, cut_angle: Optional[float] = None):
        z = np.asarray(z, dtype=np.complex128)
        if self.kind == "halfplane":
            return 1.0 / (1.0 + eps * z)
        g = self.log_map(z, cut_angle)
        return 1.0 / (1.0 + eps * g)

    def ratio(self, z, eps: float, cut_angle: Optional[float] = None):
        """|d damper| / |damper|, in closed form."""
        z = np.asarray(z, dtype=np.complex128)
        if self.kind == "halfplane":
            return eps / np.abs(1.0 + eps * z)
        g = self.log_map(z, cut_angle)
        return eps / (np.abs(1.0 + eps * g) * np.abs(z - self.center))

    def envelope_ratio(self, z, cut_angle: Optional[float] = None):
        """sup over eps > 0 of ratio(z, eps).

        The ratio increases monotonically in eps whenever Re(damper argument)
        is positive (Re z > 0, resp. |z - a| > r), so the envelope is the
        eps -> infinity limit: 1/|z| for the half-plane family and
        1/(|log((z-a)/r)| |z-a|) for the log-map family.
        """
        z = np.asarray(z, dtype=np.complex128)
        if self.kind == "halfplane":
            return 1.0 / np.abs(z)
        g = self.log_map(z, cut_angle)
        return 1.0 / (np.abs(g) * np.abs(z - self.center))


# ---------------------------------------------------------------------------
# Condition reports
# ---------------------------------------------------------------------------


@dataclass
class Witness:
    z: complex
    eps: Optional[float]
    lhs: float
    rhs: float

    def to_json_dict(self):
        return {
            "z": [self.z.real, self.z.imag],
            "eps": self.eps,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


@dataclass
class Verdict:
    status: str  # "holds" | "holds_with_equality" | "fails"
    witness: Optional[Witness] = None

    @property
    def holds(self) -> bool:
        return self.status in ("holds", "holds_with_equality")

    def to_json_dict(self):
        return {
            "status": self.status,
            "witness": self.witness.to_json_dict() if self.witness else None,
        }


@dataclass
class ConditionReport:
    """Pointwise margins (LHS - RHS) of a weight inequality over a grid.

    margin is grid-shaped with NaN off the evaluation set; for damper
    conditions it is the minimum over the eps family.  The envelope block
    carries the same margin evaluated at the analytic sup over all eps > 0.
    """

    condition: str
    margin: np.ndarray
    verdict: Verdict
    min_margin: float
    argmin_point: complex
    argmin_eps: Optional[float]
    equality_tol: float
    eps_grid: Optional[np.ndarray] = None
    envelope_available: bool = False
    envelope_min_margin: Optional[float] = None
    envelope_verdict: Optional[Verdict] = None
    singular_points: list = field(default_factory=list)
    mode: str = "grid"
    extra: dict = field(default_factory=dict)

    def to_json_dict(self, include_margin: bool = False) -> dict:
        d = {
            "condition": self.condition,
            "verdict": self.verdict.to_json_dict(),
            "min_margin": self.min_margin,
            "argmin_point": [self.argmin_point.real, self.argmin_point.imag],
            "argmin_eps": self.argmin_eps,
            "equality_tol": self.equality_tol,
            "eps_grid": None if self.eps_grid is None else list(map(float, self.eps_grid)),
            "mode": self.mode,
            "envelope": {
                "available": self.envelope_available,
                "min_margin": self.envelope_min_margin,
                "verdict": self.envelope_verdict.to_json_dict()
                if self.envelope_verdict
                else None,
            },
            "singular_points": [[p.real, p.imag] for p in self.singular_points],
            "n_points": int(np.count_nonzero(~np.isnan(self.margin))),
        }
        d.update(self.extra)
        if include_margin:
            d["margin"] = [None if math.isnan(v) else v for v in self.margin.ravel()]
        return d


def _classify(min_margin: float, scale: float, witness: Witness) -> Verdict:
    tol = EQUALITY_RTOL * max(scale, 1e-300)
    if min_margin > tol:
        return Verdict("holds")
    if abs(min_margin) <= tol:
        return Verdict("holds_with_equality")
    return Verdict("fails", witness=witness)


# ---------------------------------------------------------------------------
# Carl-type bounded-domain condition
# ---------------------------------------------------------------------------


def carl_matrix(alpha_val: complex, dalpha_val: complex) -> np.ndarray:
    """2x2 symmetric matrix whose negative semi-definiteness is equivalent to
    2|alpha|^2 >= |d alpha|: [[a + Re b, Im b], [Im b, a - Re b]] with
    a = -2|alpha|^2 and b = -d alpha."""
    a = -2.0 * abs(alpha_val) ** 2
    b = -complex(dalpha_val)
    return np.array([[a + b.real, b.imag], [b.imag, a - b.real]], dtype=float)


def is_negative_semidefinite(m: np.ndarray, tol: Optional[float] = None) -> bool:
    """Diagonal entries <= tol and det >= -tol, tol = 1e-12 * matrix norm."""
    m = np.asarray(m, dtype=float)
    if tol is None:
        tol = 1e-12 * float(np.max(np.abs(m)))
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return bool(m[0, 0] <= tol and m[1, 1] <= tol and det >= -tol)


def _eval_weight(alpha: WeightField, pts: np.ndarray, on_singular: str):
    bad = alpha.singular(pts)
    singular_points = [complex(p) for p in pts[bad][:32]]
    if np.any(bad):
        if on_singular == "raise":
            raise SingularWeight(
                f"weight {alpha.name!r} undefined on {int(bad.sum())} evaluation "
                f"point(s), e.g. {singular_points[:4]}",
                points=singular_points,
            )
        pts = pts[~bad]
    a = np.asarray(alpha.eval_fn(pts), dtype=np.complex128)
    d = np.asarray(alpha.deriv_fn(pts), dtype=np.complex128)
    return pts, a, d, singular_points, bad


def check_carl(alpha: WeightField, grid: Grid, on_singular: str = "raise") -> ConditionReport:
    """margin(z) = 2|alpha(z)|^2 - |d alpha(z)| at every interior point.

    Cross-checks the matrix formulation at 50 deterministic sample points:
    margin >= 0 must coincide with negative semi-definiteness of carl_matrix.
    """
    mask = grid.interior_mask
    pts_all = grid.points[mask]
    pts, a, d, singular_points, bad = _eval_weight(alpha, pts_all, on_singular)
    lhs = 2.0 * np.abs(a) ** 2
    rhs = np.abs(d)
    margins = lhs - rhs
    scale = float(np.max(lhs + rhs)) if margins.size else 0.0

    imin = int(np.argmin(margins))
    witness = Witness(complex(pts[imin]), None, float(lhs[imin]), float(rhs[imin]))
    verdict = _classify(float(margins[imin]), scale, witness)

    # the matrix route must agree wherever the margin is not tolerance-ambiguous
    rng = np.random.default_rng(20240012)
    sel = rng.choice(pts.size, size=min(50, pts.size), replace=False)
    band = 1e-9 * max(scale, 1e-300)
    for i in sel:
        nsd = is_negative_semidefinite(carl_matrix(complex(a[i]), complex(d[i])))
        if abs(margins[i]) <= band:
            continue
        if (margins[i] >= 0.0) != nsd:
            raise RuntimeError(
                f"matrix/inequality mismatch at {pts[i]}: margin={margins[i]}, nsd={nsd}"
            )

    margin_grid = np.full(grid.points.shape, np.nan)
    alive = np.zeros(pts_all.shape, dtype=bool)
    alive[~bad] = True
    full = np.zeros(mask.shape, dtype=bool)
    full[mask] = alive
    margin_grid[full] = margins
    return ConditionReport(
        condition="carl",
        margin=margin_grid,
        verdict=verdict,
        min_margin=float(margins[imin]),
        argmin_point=complex(pts[imin]),
        argmin_eps=None,
        equality_tol=EQUALITY_RTOL * max(scale, 1e-300),
        singular_points=singular_points,
        mode="grid",
    )


# ---------------------------------------------------------------------------
# Damper conditions (half-plane, log-map, three-lines)
# ---------------------------------------------------------------------------


def _damper_condition(
    condition: str,
    alpha: WeightField,
    grid: Grid,
    dampers: DamperFamily,
    middle_constant: float = 0.0,
    cut_angle: Optional[float] = None,
    extra: Optional[dict] = None,
) -> ConditionReport:
    """Shared core: margin(z, eps) = 2|a|^2 - |da| - |a|*mid - |a|*ratio."""
    mask = grid.closure_mask
    pts_all = grid.points[mask]
    # interior singularities are fatal; rim singularities are recorded and skipped
    bad = alpha.singular(pts_all)
    if np.any(bad):
        interior_pts = grid.points[grid.interior_mask]
        if np.any(alpha.singular(interior_pts)):
            offenders = [complex(p) for p in interior_pts[alpha.singular(interior_pts)][:8]]
            raise SingularWeight(
                f"weight {alpha.name!r} undefined on interior points, e.g. {offenders}",
                points=offenders,
            )
    singular_points = [complex(p) for p in pts_all[bad][:32]]
    pts = pts_all[~bad]

    a = np.asarray(alpha.eval_fn(pts), dtype=np.complex128)
    d = np.asarray(alpha.deriv_fn(pts), dtype=np.complex128)
    abs_a = np.abs(a)
    base = 2.0 * abs_a**2 - np.abs(d) - abs_a * middle_constant

    def damped(ratio):
        # guard 0 * inf where alpha vanishes at points with unbounded ratio
        with np.errstate(invalid="ignore"):
            term = np.where(abs_a > 0.0, abs_a * ratio, 0.0)
        return term

    min_margin = np.full(pts.shape, np.inf)
    argmin_eps = np.zeros(pts.shape)
    for eps in dampers.epsilons:
        m = base - damped(dampers.ratio(pts, float(eps), cut_angle))
        better = m < min_margin
        min_margin = np.where(better, m, min_margin)
        argmin_eps = np.where(better, eps, argmin_eps)

    scale = (
        float(
            np.max(
                2.0 * abs_a**2
                + np.abs(d)
                + abs_a * middle_constant
                + damped(dampers.ratio(pts, float(dampers.epsilons[-1]), cut_angle))
            )
        )
        if pts.size
        else 0.0
    )
    imin = int(np.argmin(min_margin))
    z_star = complex(pts[imin])
    eps_star = float(argmin_eps[imin])
    lhs_star = float(2.0 * abs_a[imin] ** 2)
    rhs_star = float(lhs_star - min_margin[imin])
    witness = Witness(z_star, eps_star, lhs_star, rhs_star)
    verdict = _classify(float(min_margin[imin]), scale, witness)

    with np.errstate(divide="ignore"):
        env = base - damped(dampers.envelope_ratio(pts, cut_angle))
    env_imin = int(np.argmin(env))
    env_witness = Witness(
        complex(pts[env_imin]),
        None,
        float(2.0 * abs_a[env_imin] ** 2),
        float(2.0 * abs_a[env_imin] ** 2 - env[env_imin]),
    )
    env_verdict = _classify(float(env[env_imin]), scale, env_witness)

    margin_grid = np.full(grid.points.shape, np.nan)
    full = np.zeros(mask.shape, dtype=bool)
    alive = np.zeros(pts_all.shape, dtype=bool)
    alive[~bad] = True
    full[mask] = alive
    margin_grid[full] = min_margin
    return ConditionReport(
        condition=condition,
        margin=margin_grid,
        verdict=verdict,
        min_margin=float(min_margin[imin]),
        argmin_point=z_star,
        argmin_eps=eps_star,
        equality_tol=EQUALITY_RTOL * max(scale, 1e-300),
        eps_grid=np.asarray(dampers.epsilons, dtype=float),
        envelope_available=True,
        envelope_min_margin=float(env[env_imin]),
        envelope_verdict=env_verdict,
        singular_points=singular_points,
        mode="grid+envelope",
        extra=extra or {},
    )


def check_halfplane(alpha: WeightField, grid: Grid, dampers: DamperFamily) -> ConditionReport:
    """Margin of 2|a|^2 >= |da| + |a| eps/|1+eps z| over the grid and eps family.

    Requires the domain to sit in the right half-plane.
    """
    if dampers.kind != "halfplane":
        raise ValueError(f"expected half-plane dampers, got kind={dampers.kind!r}")
    pts = grid.points[grid.closure_mask]
    if np.any(pts.real < -1e-12) or np.any(grid.points[grid.interior_mask].real <= 0.0):
        raise DomainNotInRightHalfPlane(
            "half-plane condition requires every interior point to have Re z > 0"
        )
    return _damper_condition("halfplane", alpha, grid, dampers)


def _resolve_cut_angle(grid: Grid, center: complex) -> float:
    centroid = complex(np.mean(grid.points[grid.closure_mask]))
    direction = center - centroid
    if direction == 0:
        return 0.0
    return math.atan2(direction.imag, direction.real)


def check_logmap(
    alpha: WeightField,
    grid: Grid,
    center: complex,
    radius: float,
    dampers: DamperFamily,
) -> ConditionReport:
    """Margin of the log-map condition 2|a|^2 >= |da| + |a| |d g_eps|/|g_eps|.

    The disc D(center, radius) must avoid the closed domain; the logarithm
    branch cut is rotated to leave the disc center pointing away from the
    domain centroid (angle reported in the result).
    """
    if dampers.kind != "logmap":
        raise ValueError(f"expected log-map dampers, got kind={dampers.kind!r}")
    if abs(dampers.center - complex(center)) > 1e-12 or abs(dampers.radius - radius) > 1e-12:
        raise ValueError("damper family center/radius do not match the requested disc")
    if in_domain(grid.spec, complex(center)) != Membership.OUTSIDE:
        raise DiscIntersectsDomain(f"disc center {center} lies in the closed domain")
    pts = grid.points[grid.closure_mask]
    dist = np.abs(pts - complex(center))
    if np.any(dist <= radius + 1e-12):
        raise DiscIntersectsDomain(
            f"disc D({center}, {radius}) meets the closed domain "
            f"(closest grid point at distance {float(dist.min()):.3g})"
        )
    cut_angle = dampers.cut_angle
    if cut_angle is None:
        cut_angle = _resolve_cut_angle(grid, complex(center))
    # the cut ray {center + t e^{i cut}, t >= radius} must miss the domain
    rel = np.angle((pts - complex(center)) * np.exp(-1j * (cut_angle + math.pi)))
    if np.any(np.abs(rel) > math.pi - 1e-9):
        raise BranchCutCrossesDomain(
            f"branch cut at angle {cut_angle:.6f} passes through the domain"
        )
    return _damper_condition(
        "logmap",
        alpha,
        grid,
        dampers,
        cut_angle=cut_angle,
        extra={"cut_angle": cut_angle, "center": [center.real, center.imag], "radius": radius},
    )


def check_threelines_condition(
    alpha: WeightField,
    grid: Grid,
    Ma: float,
    Mb: float,
    a: float,
    b: float,
    dampers: DamperFamily,
) -> ConditionReport:
    """Half-plane condition with the extra constant |log(Ma/Mb)|/(b-a).

    Ma, Mb are the line maxima of the solution whose convexity is being
    certified; equal maxima reduce this to check_halfplane exactly.
    """
    if dampers.kind != "halfplane":
        raise ValueError(f"expected half-plane dampers, got kind={dampers.kind!r}")
    if not (Ma > 0.0 and Mb > 0.0):
        raise NonpositiveBoundaryMax(f"need Ma, Mb > 0, got Ma={Ma}, Mb={Mb}")
    if not (0.0 < a < b):
        raise ValueError(f"need 0 < a < b, got a={a}, b={b}")
    pts = grid.points[grid.closure_mask]
    if np.any(pts.real < -1e-12) or np.any(grid.points[grid.interior_mask].real <= 0.0):
        raise DomainNotInRightHalfPlane(
            "three-lines condition requires the strip to sit in Re z > 0"
        )
    middle = abs(math.log(Ma / Mb)) / (b - a)
    return _damper_condition(
        "threelines",
        alpha,
        grid,
        dampers,
        middle_constant=middle,
        extra={"Ma": Ma, "Mb": Mb, "a": a, "b": b, "middle_constant": middle},
    )


# ---------------------------------------------------------------------------
# Log-map pullback of a weight
# ---------------------------------------------------------------------------


def pullback_weight(alpha: WeightField, center: complex, radius: float) -> WeightField:
    """Weight of the composed solution v = w o h, h(zeta) = r e^zeta + a.

    beta(zeta) = alpha(h(zeta)) * conj(r e^zeta) and
    d beta(zeta) = (d alpha)(h(zeta)) * |r e^zeta|^2.
    """
    center = complex(center)
    radius = float(radius)

    def h(zeta):
        return radius * np.exp(np.asarray(zeta, dtype=np.complex128)) + center

    def ev(zeta):
        return np.asarray(alpha.eval_fn(h(zeta)), dtype=np.complex128) * np.conj(
            radius * np.exp(np.asarray(zeta, dtype=np.complex128))
        )

    def dv(zeta):
        e = radius * np.exp(np.asarray(zeta, dtype=np.complex128))
        return np.asarray(alpha.deriv_fn(h(zeta)), dtype=np.complex128) * np.abs(e) ** 2

    def singular(zeta):
        return alpha.singular(h(zeta))

    return WeightField(
        name=f"pullback[{alpha.name}; center={center:g}, r={radius:g}]",
        eval_fn=ev,
        deriv_fn=dv,
        singular_fn=singular if alpha.singular_fn is not None else None,
        singular_desc=f"preimages of: {alpha.singular_desc}",
        singular_error=ImageOutsideDomain,
        params={"base": alpha.name, "center": center, "radius": radius},
    )


# ---------------------------------------------------------------------------
# Maximum-principle verifier
# ---------------------------------------------------------------------------


@dataclass
class MaxPrincipleReport:
    mode: str
    interior_sup: float
    boundary_sup: float
    arc_sup: Optional[float]
    tol_grid: float
    gradient_bound: float
    verdict: str  # "pass" | "fail"
    arc_dominant: bool = False
    exhaustion: Optional[list] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self):
        return {
            "mode": self.mode,
            "interior_sup": self.interior_sup,
            "boundary_sup": self.boundary_sup,
            "arc_sup": self.arc_sup,
            "tol_grid": self.tol_grid,
            "gradient_bound": self.gradient_bound,
            "verdict": self.verdict,
            "arc_dominant": self.arc_dominant,
            "exhaustion": self.exhaustion,
        }


def _gradient_bound(w: SolutionField) -> float:
    dz = wirtinger(w.values, w.grid, "dz")
    dzb = wirtinger(w.values, w.grid, "dzbar")
    interior = w.grid.interior_mask
    return float(np.max(np.abs(dz[interior]) + np.abs(dzb[interior])))


def max_principle_report(
    w: SolutionField,
    dampers: Optional[DamperFamily] = None,
    mode: str = "bounded",
    exhaustion_radii=None,
    C: float = 2.0,
) -> MaxPrincipleReport:
    """Compare interior and boundary suprema of |w| with a grid tolerance.

    Bounded mode: pass iff sup_interior |w| <= sup_rim |w| + tol_grid, with
    tol_grid = C * spacing * observed gradient bound.  True-boundary and
    truncation-arc suprema are reported separately; arc_dominant flags runs
    where only the artificial arc carries the maximum.

    Unbounded mode: runs the exhaustion argument.  For each damper eps it
    finds a radius eta beyond which |w * h_eps| already sits below the true
    boundary supremum, then checks the damped inequality on the truncated
    grid; the eps -> 0 trend of the damped suprema is reported.
    """
    grid = w.grid
    gb = _gradient_bound(w)
    tol_grid = C * grid.spacing * gb
    interior_sup = w.sup_interior()
    boundary_sup = w.sup_boundary()
    arc_sup = w.sup_truncation()

    if mode == "bounded":
        rim = boundary_sup if arc_sup is None else max(boundary_sup, arc_sup)
        ok = interior_sup <= rim + tol_grid
        arc_dominant = arc_sup is not None and arc_sup > boundary_sup + tol_grid
        return MaxPrincipleReport(
            mode="bounded",
            interior_sup=interior_sup,
            boundary_sup=boundary_sup,
            arc_sup=arc_sup,
            tol_grid=tol_grid,
            gradient_bound=gb,
            verdict="pass" if ok else "fail",
            arc_dominant=arc_dominant,
        )

    if mode != "unbounded":
        raise ValueError(f"mode must be 'bounded' or 'unbounded', got {mode!r}")
    if dampers is None:
        raise NoDampersForUnboundedDomain(
            "unbounded-mode verification needs a damper family"
        )
    if dampers.kind != "halfplane":
        raise ValueError("unbounded mode uses half-plane dampers")

    pts = grid.points
    absz = np.abs(pts)
    r_max = float(np.max(absz[grid.closure_mask]))
    if exhaustion_radii is None:
        exhaustion_radii = [r_max * f for f in (0.25, 0.5, 0.75, 1.0)]
    M = boundary_sup
    closure = grid.closure_mask
    interior = grid.interior_mask

    rounds = []
    all_ok = M > 0.0
    for eps in np.sort(np.asarray(dampers.epsilons, dtype=float))[::-1]:
        damped = np.abs(w.values * dampers.value(pts, float(eps)))
        eta_found = None
        for eta in exhaustion_radii:
            outer = closure & (absz >= eta)
            outer_sup = float(np.max(damped[outer])) if np.any(outer) else 0.0
            if outer_sup <= M + tol_grid:
                eta_found = float(eta)
                break
        if eta_found is None:
            rounds.append({"eps": float(eps), "eta": None, "damped_interior_sup": None, "ok": False})
            all_ok = False
            continue
        inner_int = interior & (absz <= eta_found)
        damped_int = float(np.max(damped[inner_int])) if np.any(inner_int) else 0.0
        ok = damped_int <= M + tol_grid
        all_ok = all_ok and ok
        rounds.append(
            {
                "eps": float(eps),
                "eta": eta_found,
                "damped_interior_sup": damped_int,
                "ok": ok,
            }
        )
    return MaxPrincipleReport(
        mode="unbounded",
        interior_sup=interior_sup,
        boundary_sup=boundary_sup,
        arc_sup=arc_sup,
        tol_grid=tol_grid,
        gradient_bound=gb,
        verdict="pass" if all_ok else "fail",
        arc_dominant=arc_sup is not None and arc_sup > boundary_sup + tol_grid,
        exhaustion=rounds,
    )


# ---------------------------------------------------------------------------
# Three-lines profile and convexity check
# ---------------------------------------------------------------------------


@dataclass
class ThreeLinesProfile:
    """Sampled line maxima M(x) = sup over the truncated strip columns."""

    a: float
    b: float
    xs: np.ndarray
    M: np.ndarray
    y_cut: float
    zero_xs: list = field(default_factory=list)
    convexity_margin: Optional[float] = None

    def to_json_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "y_cut": self.y_cut,
            "xs": list(map(float, self.xs)),
            "M": list(map(float, self.M)),
            "zero_xs": list(map(float, self.zero_xs)),
            "convexity_margin": self.convexity_margin,
        }

    def to_csv(self) -> str:
        lines = ["x,M"] + [f"{x!r},{m!r}" for x, m in zip(self.xs, self.M)]
        return "\n".join(lines) + "\n"


def three_lines_profile(
    w: SolutionField, a: float, b: float, y_cut: float, n_x: int
) -> ThreeLinesProfile:
    """Sample M(x) = sup_y |w(x+iy)| at n_x abscissae across [a, b].

    Abscissae snap to the nearest grid column; the sup runs over the column's
    in-domain nodes with |Im z| <= y_cut, so M is a truncated supremum and
    y_cut is recorded with the profile.
    """
    if not (0.0 < a < b):
        raise ValueError(f"need 0 < a < b, got a={a}, b={b}")
    if n_x < 2:
        raise ValueError(f"need at least 2 abscissae, got {n_x}")
    grid = w.grid
    h = grid.spacing
    xs_grid = grid.x0 + h * np.arange(grid.nx)
    if xs_grid[0] > a + 0.5 * h + 1e-12 or xs_grid[-1] < b - 0.5 * h - 1e-12:
        raise StripNotCovered(
            f"grid x-range [{xs_grid[0]:.6g}, {xs_grid[-1]:.6g}] does not cover "
            f"[{a}, {b}]"
        )
    y_max = float(np.max(np.abs(grid.points[grid.closure_mask].imag)))
    if y_max < y_cut - h - 1e-12:
        raise StripNotCovered(
            f"grid reaches |Im z| = {y_max:.6g} < requested y_cut = {y_cut}"
        )

    targets = np.linspace(a, b, n_x)
    cols = np.rint((targets - grid.x0) / h).astype(int)
    cols = np.clip(cols, 0, grid.nx - 1)
    xs = []
    M = []
    zero_xs = []
    seen = set()
    closure = grid.closure_mask
    for c in cols:
        if c in seen:
            continue
        seen.add(c)
        col_mask = closure[c, :] & (np.abs(grid.points[c, :].imag) <= y_cut + 1e-12)
        if not np.any(col_mask):
            raise StripNotCovered(f"no in-domain nodes on the column x = {xs_grid[c]:.6g}")
        m = float(np.max(np.abs(w.values[c, col_mask])))
        xs.append(float(xs_grid[c]))
        M.append(m)
        if m == 0.0:
            zero_xs.append(float(xs_grid[c]))
    xs = np.asarray(xs)
    M = np.asarray(M)

    convexity_margin = None
    if not zero_xs and xs.size >= 3:
        L = np.log(M)
        num = (xs[2:] - xs[1:-1]) * L[:-2] + (xs[1:-1] - xs[:-2]) * L[2:]
        chord = num / (xs[2:] - xs[:-2])
        convexity_margin = float(np.min(chord - L[1:-1]))
    return ThreeLinesProfile(
        a=a, b=b, xs=xs, M=M, y_cut=y_cut, zero_xs=zero_xs, convexity_margin=convexity_margin
    )


@dataclass
class ConvexityReport:
    verdict: str  # "pass" | "fail"
    worst_x: float
    margin: float
    triple_margin: Optional[float]
    tol: float

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self):
        return {
            "verdict": self.verdict,
            "worst_x": self.worst_x,
            "margin": self.margin,
            "triple_margin": self.triple_margin,
            "tol": self.tol,
        }


def log_convexity_check(profile: ThreeLinesProfile, tol: Optional[float] = None) -> ConvexityReport:
    """Check log M against the chord between its endpoint lines.

    For every interior sample x the weighted chord inequality
    (b-a) log M(x) <= (b-x) log M(a) + (x-a) log M(b) must hold; the reported
    margin is the worst (chord - log M)/1 over interior samples, normalized by
    (b-a).  Discrete midpoint convexity over consecutive triples is checked as
    well.
    """
    if profile.zero_xs:
        raise ZeroModulusLine(
            f"M(x) = 0 at x = {profile.zero_xs[:4]}; log-convexity undefined"
        )
    xs = profile.xs
    M = profile.M
    if xs.size < 3:
        raise ValueError("need at least 3 sampled lines to test convexity")
    L = np.log(M)
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.max(np.abs(L))))
    a, b = xs[0], xs[-1]
    chord = ((b - xs[1:-1]) * L[0] + (xs[1:-1] - a) * L[-1]) / (b - a)
    margins = chord - L[1:-1]
    iworst = int(np.argmin(margins))
    worst_x = float(xs[1:-1][iworst])
    margin = float(margins[iworst])

    num = (xs[2:] - xs[1:-1]) * L[:-2] + (xs[1:-1] - xs[:-2]) * L[2:]
    triple = num / (xs[2:] - xs[:-2]) - L[1:-1]
    triple_margin = float(np.min(triple))

    ok = margin >= -tol and triple_margin >= -tol
    return ConvexityReport(
        verdict="pass" if ok else "fail",
        worst_x=worst_x,
        margin=margin,
        triple_margin=triple_margin,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# Power-weight scan
# ---------------------------------------------------------------------------


@dataclass
class MuScanEntry:
    mu: float
    report: ConditionReport

    def to_json_dict(self):
        return {"mu": self.mu, "report": self.report.to_json_dict()}


def power_mu_scan(a_coef: complex, mus, grid: Grid, dampers: DamperFamily) -> list:
    """Run the half-plane check on alpha = a * x^mu for each exponent."""
    from .weights import power_alpha

    entries = []
    for mu in mus:
        weight = power_alpha(a_coef, float(mu))
        report = check_halfplane(weight, grid, dampers)
        entries.append(MuScanEntry(mu=float(mu), report=report))
    return entries


# ---------------------------------------------------------------------------
# Damper property audit
# ---------------------------------------------------------------------------


@dataclass
class DamperPropertiesReport:
    holomorphy: dict
    decay: dict
    unit_limit: dict
    boundary_bound: dict

    @property
    def passed(self) -> bool:
        return all(
            d["ok"] for d in (self.holomorphy, self.decay, self.unit_limit, self.boundary_bound)
        )

    def to_json_dict(self):
        return {
            "holomorphy": self.holomorphy,
            "decay": self.decay,
            "unit_limit": self.unit_limit,
            "boundary_bound": self.boundary_bound,
            "passed": self.passed,
        }


def damper_properties_check(dampers: DamperFamily, grid: Grid) -> DamperPropertiesReport:
    """Audit the four defining damper properties on a concrete grid.

    (i) discrete holomorphy: ||dbar_h h_eps|| shrinks ~4x when h halves;
    (ii) decay: sup |h_eps| decreases along circles of radius R, 2R, 4R;
    (iii) |h_eps| -> 1 pointwise as eps -> 0 (deviation shrinks with eps);
    (iv) |h_eps| <= 1 + 1e-12 at every rim sample.
    """
    if dampers.kind != "halfplane":
        raise ValueError("property audit is defined for the half-plane family")
    eps_list = np.sort(np.asarray(dampers.epsilons, dtype=float))
    fine = build_grid(grid.spec, grid.spacing / 2.0)

    # (i) holomorphy under refinement, checked on a probe subset of eps.
    # The damper varies on scale 1/eps; spacings that do not resolve it are
    # pre-asymptotic and only reported, not judged.
    probe = [float(eps_list[0]), float(eps_list[eps_list.size // 2]), float(eps_list[-1])]
    orders = []
    holo_ok = True
    any_resolved = False
    for eps in probe:
        resolved = eps * grid.spacing <= 0.25
        coarse_vals = grid.sample(lambda z: dampers.value(z, eps))
        fine_vals = fine.sample(lambda z: dampers.value(z, eps))
        e_c = float(np.max(np.abs(wirtinger(coarse_vals, grid, "dzbar")[grid.interior_mask])))
        e_f = float(np.max(np.abs(wirtinger(fine_vals, fine, "dzbar")[fine.interior_mask])))
        ratio = e_c / e_f if e_f > 0.0 else math.inf
        orders.append(
            {"eps": eps, "coarse": e_c, "fine": e_f, "ratio": ratio, "resolved": resolved}
        )
        if resolved:
            any_resolved = True
            # tiny eps puts truncation below the rounding floor, where the
            # refinement ratio is meaningless
            if not (ratio > 2.5 or e_c < 1e-10):
                holo_ok = False
    holo_ok = holo_ok and any_resolved

    # (ii) decay along expanding circles (closed-form evaluation; the grid just
    # fixes the starting radius and the admissible angles)
    R = grid.spec.max_abs()
    theta = np.linspace(-0.5 * math.pi + 1e-3, 0.5 * math.pi - 1e-3, 64)
    decay_rows = []
    decay_ok = True
    for eps in probe:
        sups = []
        for mult in (1.0, 2.0, 4.0):
            ring = mult * R * np.exp(1j * theta)
            sups.append(float(np.max(np.abs(dampers.value(ring, eps)))))
        decay_rows.append({"eps": eps, "sups": sups})
        if not (sups[0] > sups[1] > sups[2]):
            decay_ok = False

    # (iii) eps -> 0 limit on the grid closure
    closure_pts = grid.points[grid.closure_mask]
    max_abs_z = float(np.max(np.abs(closure_pts)))
    devs = []
    for eps in eps_list:
        dev = float(np.max(np.abs(1.0 - np.abs(dampers.value(closure_pts, float(eps))))))
        devs.append({"eps": float(eps), "deviation": dev})
    monotone = all(
        devs[i]["deviation"] <= devs[i + 1]["deviation"] + 1e-15 for i in range(len(devs) - 1)
    )
    small_at_min = devs[0]["deviation"] <= eps_list[0] * max_abs_z * 1.5 + 1e-12
    unit_ok = monotone and small_at_min

    # (iv) boundedness on the rim
    rim = grid.points[grid.boundary_mask | grid.truncation_mask]
    worst = 0.0
    for eps in eps_list:
        worst = max(worst, float(np.max(np.abs(dampers.value(rim, float(eps))))))
    bound_ok = worst <= 1.0 + 1e-12

    return DamperPropertiesReport(
        holomorphy={"ok": holo_ok, "rows": orders},
        decay={"ok": decay_ok, "rows": decay_rows},
        unit_limit={"ok": unit_ok, "rows": devs, "monotone": monotone},
        boundary_bound={"ok": bound_ok, "max_abs": worst},
    )

"""Solution fields for dbar(w) = alpha * conj(w): manufacturing, residuals,
and the Hardy-norm diagnostic.

Solutions are built from a holomorphic seed f through the integral equation
w = f + T(alpha * conj(w)) iterated to a fixed point.  The iteration
certifies its own contraction (update ratios are recorded and must stay
below 1), and the residual of the returned field is measured, not assumed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    NoConvergence,
    RadiusOutOfRange,
    SeedNotHolomorphic,
    SingularWeight,
)
from .geometry import Grid, UnitDisc, build_grid, domain_from_config
from .pompeiu import EXACT_CONSTANT_CELL, pompeiu_on_grid
from .weights import WeightField, wirtinger

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200


@dataclass
class Provenance:
    kind: str  # "fixed_point" | "closed_form" | "external"
    name: str = ""
    iterations: int = 0
    final_update: float = 0.0
    updates: list = field(default_factory=list)

    def to_json_dict(self):
        d = {"kind": self.kind}
        if self.kind == "fixed_point":
            d.update(
                iterations=self.iterations,
                final_update=self.final_update,
                updates=list(self.updates),
            )
        elif self.kind == "closed_form":
            d["name"] = self.name
        return d


@dataclass
class SolutionField:
    """Complex grid function with residual metadata.

    weight_meta carries the serialized weight descriptor for fields loaded
    from disk, where the evaluator closures cannot be reconstructed.
    """

    values: np.ndarray
    grid: Grid
    weight: Optional[WeightField] = None
    residual_linf: Optional[float] = None
    provenance: Provenance = field(default_factory=lambda: Provenance("external"))
    weight_meta: Optional[dict] = None

    @classmethod
    def from_callable(cls, grid: Grid, fn, name: str, weight: Optional[WeightField] = None):
        return cls(
            values=grid.sample(fn),
            grid=grid,
            weight=weight,
            provenance=Provenance("closed_form", name=name),
        )

    def sup_interior(self) -> float:
        return float(np.max(np.abs(self.values[self.grid.interior_mask])))

    def sup_boundary(self) -> float:
        m = self.grid.boundary_mask
        return float(np.max(np.abs(self.values[m]))) if np.any(m) else 0.0

    def sup_truncation(self) -> Optional[float]:
        m = self.grid.truncation_mask
        return float(np.max(np.abs(self.values[m]))) if np.any(m) else None


def _weight_on_grid(alpha: WeightField, grid: Grid) -> np.ndarray:
    pts = grid.points[grid.closure_mask]
    bad = alpha.singular(pts)
    if np.any(bad):
        offenders = pts[bad][:8].tolist()
        raise SingularWeight(
            f"weight {alpha.name!r} undefined on {int(bad.sum())} grid point(s), "
            f"e.g. {offenders}",
            points=offenders,
        )
    vals = np.full(grid.points.shape, np.nan + 1j * np.nan, dtype=np.complex128)
    vals[grid.closure_mask] = alpha.eval_fn(pts)
    return vals


def solve_vekua(
    seed_values: np.ndarray,
    alpha: WeightField,
    grid: Grid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    holomorphy_tol: Optional[float] = None,
    singular_rule: str = EXACT_CONSTANT_CELL,
) -> SolutionField:
    """Fixed-point iteration w_{k+1} = seed + T(alpha * conj(w_k)).

    The seed must pass a discrete holomorphy gate: ||dbar_h seed||_inf below
    max(10*tol, h^2*(||seed|| + ||d seed||)), the second term being the
    unavoidable O(h^2) truncation of central differences on smooth data.
    Pass holomorphy_tol to override the gate for seeds with known extra error
    (e.g. seeds extracted from quadrature data).

    Returns a SolutionField whose residual_linf has been measured post hoc.
    Raises NoConvergence (with the update history) when the updates stop
    contracting, which signals ||alpha||*||T|| >= 1 on this domain.
    """
    seed_values = np.asarray(seed_values, dtype=np.complex128)
    if seed_values.shape != grid.points.shape:
        raise ValueError("seed shape does not match grid")
    alpha_vals = _weight_on_grid(alpha, grid)

    dbar_seed = wirtinger(seed_values, grid, "dzbar")
    dz_seed = wirtinger(seed_values, grid, "dz")
    interior = grid.interior_mask
    dbar_norm = float(np.max(np.abs(dbar_seed[interior])))
    if holomorphy_tol is None:
        scale = float(np.nanmax(np.abs(seed_values))) + float(
            np.max(np.abs(dz_seed[interior]))
        )
        holomorphy_tol = max(10.0 * tol, grid.spacing**2 * scale)
    if dbar_norm > holomorphy_tol:
        raise SeedNotHolomorphic(
            f"||dbar seed|| = {dbar_norm:.3e} exceeds the holomorphy gate "
            f"{holomorphy_tol:.3e}"
        )

    closure = grid.closure_mask
    if not np.any(np.abs(alpha_vals[closure]) > 0.0):
        # zero weight: the seed already solves the equation; no transform applied
        sol = SolutionField(
            values=seed_values.copy(),
            grid=grid,
            weight=alpha,
            provenance=Provenance("fixed_point", iterations=1, final_update=0.0, updates=[0.0]),
        )
        residual(sol, alpha)
        return sol

    w = seed_values.copy()
    updates = []
    converged = False
    for k in range(1, max_iter + 1):
        w_next = seed_values + pompeiu_on_grid(
            alpha_vals * np.conj(w), grid, singular_rule
        )
        delta = float(np.nanmax(np.abs(w_next[closure] - w[closure])))
        updates.append(delta)
        w = w_next
        if delta <= tol:
            converged = True
            break
    ratios = [b / a for a, b in zip(updates, updates[1:]) if a > 0.0]
    if ratios:
        logger.info(
            "fixed point: %d iterations, final update %.3e, last contraction ratio %.3f",
            len(updates),
            updates[-1],
            ratios[-1],
        )
    if not converged:
        raise NoConvergence(
            f"no convergence after {max_iter} iterations (last update "
            f"{updates[-1]:.3e}); the contraction ||alpha||*||T|| < 1 likely "
            f"fails on this domain",
            updates=updates,
        )
    sol = SolutionField(
        values=w,
        grid=grid,
        weight=alpha,
        provenance=Provenance(
            "fixed_point",
            iterations=len(updates),
            final_update=updates[-1],
            updates=updates,
        ),
    )
    residual(sol, alpha)
    return sol


def residual(w: SolutionField, alpha: WeightField) -> float:
    """||dbar_h w - alpha * conj(w)||_inf over interior stencil points.

    Stores the value into w.residual_linf.
    """
    alpha_vals = _weight_on_grid(alpha, w.grid)
    dbar_w = wirtinger(w.values, w.grid, "dzbar")
    interior = w.grid.interior_mask
    res = np.abs(dbar_w[interior] - alpha_vals[interior] * np.conj(w.values[interior]))
    value = float(np.max(res))
    w.residual_linf = value
    return value


def residual_field(w: SolutionField, alpha: WeightField) -> np.ndarray:
    """Pointwise |dbar_h w - alpha conj(w)| on interior nodes (NaN elsewhere)."""
    alpha_vals = _weight_on_grid(alpha, w.grid)
    dbar_w = wirtinger(w.values, w.grid, "dzbar")
    out = np.full(w.values.shape, np.nan)
    interior = w.grid.interior_mask
    out[interior] = np.abs(
        dbar_w[interior] - alpha_vals[interior] * np.conj(w.values[interior])
    )
    return out


# ---------------------------------------------------------------------------
# Hardy-norm diagnostic
# ---------------------------------------------------------------------------


def _bilinear(values: np.ndarray, grid: Grid, pts: np.ndarray) -> np.ndarray:
    """Bilinear interpolation with NaN-tolerant corner renormalization."""
    h = grid.spacing
    fx = (pts.real - grid.x0) / h
    fy = (pts.imag - grid.y0) / h
    ix = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    iy = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    tx = fx - ix
    ty = fy - iy
    corners = np.stack(
        [values[ix, iy], values[ix + 1, iy], values[ix, iy + 1], values[ix + 1, iy + 1]]
    )
    wts = np.stack([(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty])
    finite = ~np.isnan(corners)
    wts = np.where(finite, wts, 0.0)
    total = wts.sum(axis=0)
    if np.any(total == 0.0):
        raise RadiusOutOfRange("circle sample falls outside the sampled closure")
    corners = np.where(finite, corners, 0.0)
    return (wts * corners).sum(axis=0) / total


def hp_norm(w: SolutionField, p: float, radii, n_theta: int = 1024) -> float:
    """sup over the given radii of the p-mean of |w| on circles r*e^{it}.

    Circle values come from bilinear interpolation of the grid samples; the
    angular mean uses the trapezoid rule (exact convergence for periodic
    smooth data).  Radii must lie in (0, 1) and the grid domain must be the
    unit disc.
    """
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if not isinstance(w.grid.spec, UnitDisc):
        raise ValueError("hp_norm expects a unit-disc grid")
    radii = [float(r) for r in radii]
    if not radii:
        raise RadiusOutOfRange("no radii supplied")
    for r in radii:
        if not (0.0 < r < 1.0):
            raise RadiusOutOfRange(f"radius {r} outside (0, 1)")
    t = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    ring = np.exp(1j * t)
    best = 0.0
    for r in radii:
        samples = _bilinear(w.values, w.grid, r * ring)
        mean_p = float(np.mean(np.abs(samples) ** p))
        best = max(best, mean_p)
    return best ** (1.0 / p)


# ---------------------------------------------------------------------------
# Serialization: flat text dump with JSON header, bit-exact round trip
# ---------------------------------------------------------------------------


def solution_to_json_dict(sol: SolutionField) -> dict:
    weight = sol.weight_meta
    if sol.weight is not None:
        weight = {"name": sol.weight.name, "params": _jsonable(sol.weight.params)}
    vals = sol.values.ravel()
    return {
        "format": "vekualab-solution-v1",
        "domain": sol.grid.spec.to_config(),
        "spacing": sol.grid.spacing,
        "shape": [sol.grid.nx, sol.grid.ny],
        "weight": weight,
        "residual_linf": sol.residual_linf,
        "provenance": sol.provenance.to_json_dict(),
        "values_re": vals.real.tolist(),
        "values_im": vals.imag.tolist(),
    }


def solution_from_json_dict(d: dict) -> SolutionField:
    if d.get("format") != "vekualab-solution-v1":
        raise ValueError(f"unknown solution format {d.get('format')!r}")
    spec = domain_from_config(d["domain"])
    grid = build_grid(spec, float(d["spacing"]))
    nx, ny = d["shape"]
    if (grid.nx, grid.ny) != (nx, ny):
        raise ValueError("grid rebuilt from header does not match stored shape")
    values = (
        np.asarray(d["values_re"], dtype=np.float64)
        + 1j * np.asarray(d["values_im"], dtype=np.float64)
    ).reshape(nx, ny)
    prov_d = d.get("provenance", {"kind": "external"})
    prov = Provenance(
        kind=prov_d.get("kind", "external"),
        name=prov_d.get("name", ""),
        iterations=prov_d.get("iterations", 0),
        final_update=prov_d.get("final_update", 0.0),
        updates=prov_d.get("updates", []),
    )
    return SolutionField(
        values=values,
        grid=grid,
        weight=None,
        residual_linf=d.get("residual_linf"),
        provenance=prov,
        weight_meta=d.get("weight"),
    )


def save_solution(path, sol: SolutionField) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_json_dict(sol), fh, sort_keys=True)


def load_solution(path) -> SolutionField:
    with open(path) as fh:
        return solution_from_json_dict(json.load(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj

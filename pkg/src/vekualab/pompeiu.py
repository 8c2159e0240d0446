"""Area-Cauchy transform T g(z) = -(1/pi) * integral of g(zeta)/(zeta - z).

T is a right inverse of dbar and is the engine that turns holomorphic seeds
into genuine solutions of dbar(w) = alpha * conj(w).

Quadrature is a dense direct midpoint sum over square cells centered on the
lattice nodes, refined in two ways that the residual targets of the solver
require (plain node cells leave uncovered boundary slivers and an asymmetric
near-field whose finite-difference dbar does not converge):

* cells within three quarters of a spacing of the domain boundary are
  subdivided so the quadrature region resolves cell-intersect-domain; slivers
  owned by just-outside lattice nodes get the density of their best in-domain
  neighbor;
* every cell within a small Chebyshev near-field of the target is integrated
  with the closed-form integral of 1/(zeta - z) over the square (the default
  singular rule), not just the cell containing the target.  With the
  cell-exclusion rule the containing cell is dropped instead and everything
  else stays midpoint.

The per-target summation order is fixed (full cells row-major, then
subcells), so results are deterministic and targets can be evaluated in
parallel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDomain, TargetOutsideDomain
from .geometry import Grid

logger = logging.getLogger(__name__)

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

CELL_EXCLUSION = "cell_exclusion"
EXACT_CONSTANT_CELL = "exact_constant_cell"

BAND_FRACTION = 0.75  # cells with |slack| below this fraction of h are subdivided
SUBDIVISION = 4  # band cells split into SUBDIVISION^2 subcells
NEAR_FIELD_CELLS = 2  # Chebyshev radius (in spacings) of the exact-box region


@dataclass
class TransformResult:
    """Values of T g at the requested targets plus quadrature metadata."""

    values: np.ndarray
    quadrature_spacing: float
    singular_rule: str


def _corner_sum_G(u1, u2, v1, v2):
    """Corner-alternating sum of the antiderivative of u/(u^2+v^2)."""

    def G(u, v):
        r2 = u * u + v * v
        lg = np.where(r2 > 0.0, np.log(np.maximum(r2, 1e-300)), 0.0)
        at = np.where(u != 0.0, np.arctan(np.divide(v, np.where(u != 0.0, u, 1.0))), 0.0)
        return 0.5 * v * lg + u * at

    return G(u2, v2) - G(u1, v2) - G(u2, v1) + G(u1, v1)


def box_inverse_integral(z, cx, cy, h):
    """Exact integral of 1/(zeta - z) over the square cell centered at
    (cx, cy) with side h.  Vectorized over z; zero at the cell center by
    symmetry, finite (improper value) for poles on edges or corners."""
    z = np.asarray(z, dtype=np.complex128)
    s = 0.5 * h
    u1 = cx - s - z.real
    u2 = cx + s - z.real
    v1 = cy - s - z.imag
    v2 = cy + s - z.imag
    re = _corner_sum_G(u1, u2, v1, v2)
    im = -_corner_sum_G(v1, v2, u1, u2)  # swap roles of u and v for v/(u^2+v^2)
    return re + 1j * im


# ---------------------------------------------------------------------------
# Quadrature cell construction
# ---------------------------------------------------------------------------


def _quadrature_cells(g_values: np.ndarray, grid: Grid, subdivision: int = SUBDIVISION):
    """(centers, sizes, densities) covering domain-intersect-lattice-cells.

    Nodes well inside keep one full cell; nodes within BAND_FRACTION*h of the
    boundary (on either side) contribute the subcells of their cell that lie
    inside the domain.  Outside-node subcells inherit the density of the
    neighboring node (8-neighborhood) with the largest boundary slack.
    """
    h = grid.spacing
    spec = grid.spec
    finite = grid.closure_mask & ~np.isnan(g_values)
    if not np.any(finite):
        raise EmptyDomain("no quadrature cells: grid function is empty")
    slack = np.asarray(spec._slack(grid.points), dtype=float)
    band = np.abs(slack) < BAND_FRACTION * h
    full = finite & ~band

    centers = [grid.points[full].ravel()]
    sizes = [np.full(int(np.count_nonzero(full)), h)]
    dens = [g_values[full].ravel()]

    band_owner = band & (slack > -BAND_FRACTION * h)
    # density carried by each band node: its own value, else best neighbor's
    owner_val = np.where(finite, g_values, np.nan + 1j * np.nan)
    need = band_owner & np.isnan(owner_val)
    if np.any(need):
        best_slack = np.full(grid.points.shape, -np.inf)
        best_val = np.full(grid.points.shape, np.nan + 1j * np.nan, dtype=np.complex128)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                src_sl = np.full(grid.points.shape, -np.inf)
                src_va = np.full(grid.points.shape, np.nan + 1j * np.nan, dtype=np.complex128)
                si = slice(max(di, 0), grid.nx + min(di, 0))
                ti = slice(max(-di, 0), grid.nx + min(-di, 0))
                sj = slice(max(dj, 0), grid.ny + min(dj, 0))
                tj = slice(max(-dj, 0), grid.ny + min(-dj, 0))
                src_sl[ti, tj] = np.where(finite[si, sj], slack[si, sj], -np.inf)
                src_va[ti, tj] = g_values[si, sj]
                better = src_sl > best_slack
                best_slack = np.where(better, src_sl, best_slack)
                best_val = np.where(better, src_va, best_val)
        owner_val = np.where(need, best_val, owner_val)
    band_owner = band_owner & ~np.isnan(owner_val)

    if np.any(band_owner):
        sub = int(subdivision)
        offs = ((np.arange(sub) + 0.5) / sub - 0.5) * h
        ox, oy = np.meshgrid(offs, offs, indexing="ij")
        off = (ox + 1j * oy).ravel()
        nodes = grid.points[band_owner].ravel()
        vals = owner_val[band_owner].ravel()
        subc = (nodes[:, None] + off[None, :]).ravel()
        subv = np.repeat(vals, off.size)
        keep = np.asarray(spec._slack(subc), dtype=float) > 0.0
        centers.append(subc[keep])
        sizes.append(np.full(int(np.count_nonzero(keep)), h / sub))
        dens.append(subv[keep])

    return (
        np.ascontiguousarray(np.concatenate(centers)),
        np.ascontiguousarray(np.concatenate(sizes)),
        np.ascontiguousarray(np.concatenate(dens)),
    )


# ---------------------------------------------------------------------------
# Dense summation kernels
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=True)
    def _box_inv_scalar(zx, zy, cx, cy, h):  # pragma: no cover - jitted
        s = 0.5 * h
        re = 0.0
        im = 0.0
        for k in range(4):
            if k == 0:
                u, v, sg = cx + s - zx, cy + s - zy, 1.0
            elif k == 1:
                u, v, sg = cx - s - zx, cy + s - zy, -1.0
            elif k == 2:
                u, v, sg = cx + s - zx, cy - s - zy, -1.0
            else:
                u, v, sg = cx - s - zx, cy - s - zy, 1.0
            r2 = u * u + v * v
            lg = math.log(r2) if r2 > 0.0 else 0.0
            atv = math.atan(v / u) if u != 0.0 else 0.0
            atu = math.atan(u / v) if v != 0.0 else 0.0
            re += sg * (0.5 * v * lg + u * atv)
            im -= sg * (0.5 * u * lg + v * atu)
        return re, im

    @numba.njit(cache=True, fastmath=True)
    def _dense_sum(cxs, cys, ss, gr, gi, zxs, zys, h, near, exact_rule):  # pragma: no cover
        n_t = zxs.shape[0]
        n_c = cxs.shape[0]
        inv_pi = 1.0 / math.pi
        out = np.empty(n_t, dtype=np.complex128)
        for t in range(n_t):
            zx = zxs[t]
            zy = zys[t]
            sr = 0.0
            sim = 0.0
            for c in range(n_c):
                dx = cxs[c] - zx
                dy = cys[c] - zy
                adx = abs(dx)
                ady = abs(dy)
                s_c = ss[c]
                if exact_rule and adx <= near and ady <= near:
                    br, bi = _box_inv_scalar(zx, zy, cxs[c], cys[c], s_c)
                    sr += gr[c] * br - gi[c] * bi
                    sim += gr[c] * bi + gi[c] * br
                else:
                    half = 0.5 * s_c
                    if adx <= half and ady <= half:
                        continue  # cell-exclusion of the containing cell
                    den = dx * dx + dy * dy
                    a2 = s_c * s_c
                    wr = a2 * dx / den
                    wi = -a2 * dy / den
                    sr += gr[c] * wr - gi[c] * wi
                    sim += gr[c] * wi + gi[c] * wr
            out[t] = complex(-inv_pi * sr, -inv_pi * sim)
        return out


def _dense_sum_numpy(centers, sizes, g, targets, h, near, exact_rule):
    out = np.empty(targets.shape[0], dtype=np.complex128)
    a2 = sizes * sizes
    for t in range(targets.shape[0]):
        z = targets[t]
        d = centers - z
        adx = np.abs(d.real)
        ady = np.abs(d.imag)
        if exact_rule:
            near_mask = (adx <= near) & (ady <= near)
        else:
            near_mask = (adx <= 0.5 * sizes) & (ady <= 0.5 * sizes)
        far = ~near_mask
        val = np.sum(a2[far] * g[far] / d[far])
        if exact_rule and np.any(near_mask):
            box = box_inverse_integral(
                np.full(int(near_mask.sum()), z),
                centers[near_mask].real,
                centers[near_mask].imag,
                sizes[near_mask],
            )
            val += np.sum(g[near_mask] * box)
        out[t] = -val / math.pi
    return out


def pompeiu_transform(
    g_values: np.ndarray,
    grid: Grid,
    targets: np.ndarray,
    singular_rule: str = EXACT_CONSTANT_CELL,
    near_field_cells: int = NEAR_FIELD_CELLS,
) -> TransformResult:
    """Evaluate T g at the target points.

    g_values is a grid function sampled on the closure (NaN outside); targets
    must lie in the closed domain.
    """
    if singular_rule not in (EXACT_CONSTANT_CELL, CELL_EXCLUSION):
        raise ValueError(f"unknown singular rule {singular_rule!r}")
    targets = np.asarray(targets, dtype=np.complex128).ravel()
    outside = ~np.asarray(grid.spec.in_closure(targets), dtype=bool)
    if np.any(outside):
        raise TargetOutsideDomain(
            f"{int(outside.sum())} target(s) outside the closed domain, "
            f"e.g. {targets[outside][:4].tolist()}"
        )
    centers, sizes, dens = _quadrature_cells(g_values, grid)
    h = grid.spacing
    near = near_field_cells * h + 1e-12
    exact = singular_rule == EXACT_CONSTANT_CELL
    if HAVE_NUMBA:
        values = _dense_sum(
            np.ascontiguousarray(centers.real),
            np.ascontiguousarray(centers.imag),
            sizes,
            np.ascontiguousarray(dens.real),
            np.ascontiguousarray(dens.imag),
            np.ascontiguousarray(targets.real),
            np.ascontiguousarray(targets.imag),
            h,
            near,
            exact,
        )
    else:  # pragma: no cover - numba is a declared dependency
        values = _dense_sum_numpy(centers, sizes, dens, targets, h, near, exact)
    return TransformResult(values=values, quadrature_spacing=h, singular_rule=singular_rule)


def pompeiu_on_grid(
    g_values: np.ndarray, grid: Grid, singular_rule: str = EXACT_CONSTANT_CELL
) -> np.ndarray:
    """T g evaluated at every closure node, returned grid-shaped (NaN outside)."""
    mask = grid.closure_mask
    res = pompeiu_transform(g_values, grid, grid.points[mask], singular_rule)
    out = np.full(grid.points.shape, np.nan + 1j * np.nan, dtype=np.complex128)
    out[mask] = res.values
    return out

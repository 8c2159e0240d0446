"""Coefficient fields alpha, nu, sigma and the discrete Wirtinger calculus.

A weight field is a pair of vectorized closures (value and z-derivative) plus
a description of where it is undefined.  Fields are closures rather than
sampled arrays so condition checkers can evaluate them on any refinement
without resampling artifacts.

Conventions: d = (d/dx - i d/dy)/2 and dbar = (d/dx + i d/dy)/2.  For weights
depending on x alone the derivative is alpha'(x)/2; for radial weights it is
exp(-i*theta) * alpha'(r) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainSingularity, MissingNeighbor, NuOutOfRange, SigmaNonpositive
from .geometry import Grid, PointClass

# Step used by finite-difference fallbacks for derivative closures.
FD_STEP = 1e-6


def _asarray(z):
    return np.asarray(z, dtype=np.complex128)


@dataclass(frozen=True)
class WeightField:
    """Coefficient alpha of dbar(w) = alpha * conj(w).

    eval/deriv map complex arrays to complex arrays.  singular(z) returns a
    boolean mask of points where the field is undefined; evaluation there
    raises DomainSingularity.
    """

    name: str
    eval_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Callable[[np.ndarray], np.ndarray]
    singular_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    singular_desc: str = ""
    params: dict = field(default_factory=dict)
    singular_error: type = DomainSingularity

    def singular(self, z) -> np.ndarray:
        z = _asarray(z)
        if self.singular_fn is None:
            return np.zeros(z.shape, dtype=bool)
        return self.singular_fn(z)

    def _check(self, z):
        z = _asarray(z)
        bad = self.singular(z)
        if np.any(bad):
            pts = z[bad].ravel()[:8].tolist()
            raise self.singular_error(
                f"weight {self.name!r} undefined ({self.singular_desc}) at e.g. {pts}",
                points=pts,
            )
        return z

    def alpha(self, z):
        """Value alpha(z); scalar in -> scalar out."""
        z = self._check(z)
        out = self.eval_fn(z)
        return complex(out) if np.ndim(out) == 0 else np.asarray(out, dtype=np.complex128)

    def dalpha(self, z):
        """Derivative (d alpha)(z)."""
        z = self._check(z)
        out = self.deriv_fn(z)
        return complex(out) if np.ndim(out) == 0 else np.asarray(out, dtype=np.complex128)


def _fd_wirtinger_of(fn, step=FD_STEP, dbar=False):
    """Finite-difference d or dbar of a closure, as a new closure."""

    def deriv(z):
        z = _asarray(z)
        fx = (fn(z + step) - fn(z - step)) / (2.0 * step)
        fy = (fn(z + 1j * step) - fn(z - 1j * step)) / (2.0 * step)
        return 0.5 * (fx + 1j * fy) if dbar else 0.5 * (fx - 1j * fy)

    return deriv


# ---------------------------------------------------------------------------
# Catalog weights
# ---------------------------------------------------------------------------


def tokamak_alpha(lam: float) -> WeightField:
    """alpha(z) = -1/(lam * Re z), the conductivity-1/x weight.

    lam = 4 is the value arising from sigma = 1/x; smaller lam makes the
    inequality 2|alpha|^2 >= |d alpha| strict.  Undefined on Re z = 0.
    """
    if not lam > 0.0:
        raise ValueError(f"lambda must be > 0, got {lam}")

    def ev(z):
        return -1.0 / (lam * z.real) + 0j

    def dv(z):
        return 1.0 / (2.0 * lam * z.real**2) + 0j

    return WeightField(
        name=f"tokamak(lambda={lam:g})",
        eval_fn=ev,
        deriv_fn=dv,
        singular_fn=lambda z: np.abs(z.real) < 1e-300,
        singular_desc="Re z = 0",
        params={"lambda": lam},
    )


def power_alpha(a: complex, mu: float) -> WeightField:
    """alpha(z) = a * (Re z)^mu with derivative a*mu*(Re z)^(mu-1)/2.

    Singular on Re z <= 0 unless mu is a nonnegative integer.
    """
    a = complex(a)
    mu = float(mu)
    entire = mu >= 0.0 and float(mu).is_integer()

    def ev(z):
        x = z.real
        if mu == 0.0:
            return np.full(np.shape(x), a, dtype=np.complex128) if np.ndim(x) else a
        return a * np.power(x.astype(np.complex128) if np.ndim(x) else complex(x), mu)

    def dv(z):
        x = z.real
        if mu == 0.0:
            return np.zeros(np.shape(x), dtype=np.complex128) if np.ndim(x) else 0j
        xm = np.power(x.astype(np.complex128) if np.ndim(x) else complex(x), mu - 1.0)
        return 0.5 * a * mu * xm

    singular_fn = None if entire else (lambda z: z.real <= 1e-300)
    return WeightField(
        name=f"power(a={a:g}, mu={mu:g})",
        eval_fn=ev,
        deriv_fn=dv,
        singular_fn=singular_fn,
        singular_desc="Re z <= 0" if not entire else "",
        params={"a": a, "mu": mu},
    )


def constant_alpha(c: complex) -> WeightField:
    """alpha identically c (the classical case when c = 0)."""
    return power_alpha(c, 0.0)


def radial_alpha(profile, profile_deriv, name: str = "radial") -> WeightField:
    """alpha(z) = profile(|z|) with the polar-form derivative
    exp(-i*theta) * profile'(r) / 2.  Undefined at z = 0."""

    def ev(z):
        return np.asarray(profile(np.abs(z)), dtype=np.complex128)

    def dv(z):
        r = np.abs(z)
        phase = np.conj(z) / r
        return 0.5 * phase * np.asarray(profile_deriv(r), dtype=np.complex128)

    return WeightField(
        name=name,
        eval_fn=ev,
        deriv_fn=dv,
        singular_fn=lambda z: np.abs(z) < 1e-300,
        singular_desc="z = 0",
        params={"profile": name},
    )


# ---------------------------------------------------------------------------
# nu / sigma fields and their conversions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NuField:
    """Real-valued Beltrami coefficient with sup bound kappa < 1.

    Complex nu is rejected: the sigma link assumes real nu.
    """

    name: str
    eval_fn: Callable[[np.ndarray], np.ndarray]
    kappa: float
    dbar_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if not (0.0 <= self.kappa < 1.0):
            raise NuOutOfRange(f"kappa must lie in [0, 1), got {self.kappa}")

    def nu(self, z):
        z = _asarray(z)
        v = np.asarray(self.eval_fn(z))
        if np.iscomplexobj(v) and np.any(np.abs(v.imag) > 0.0):
            raise NuOutOfRange("nu must be real-valued")
        v = v.real.astype(np.float64)
        if np.any(np.abs(v) > self.kappa + 1e-12):
            raise NuOutOfRange(
                f"|nu| exceeds the declared bound kappa={self.kappa}"
            )
        return v

    def dbar(self, z):
        if self.dbar_fn is not None:
            return _asarray(self.dbar_fn(_asarray(z)))
        return _fd_wirtinger_of(lambda w: self.eval_fn(w).astype(np.complex128), dbar=True)(z)


@dataclass(frozen=True)
class SigmaField:
    """Real positive conductivity with a dbar closure (closed-form or FD)."""

    name: str
    eval_fn: Callable[[np.ndarray], np.ndarray]
    dbar_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    singular_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def sigma(self, z):
        z = _asarray(z)
        if self.singular_fn is not None and np.any(self.singular_fn(z)):
            raise DomainSingularity(f"sigma {self.name!r} undefined at some points")
        v = np.asarray(self.eval_fn(z))
        v = v.real.astype(np.float64)
        if np.any(v <= 0.0):
            raise SigmaNonpositive(f"sigma {self.name!r} is not positive everywhere")
        return v

    def dbar(self, z):
        if self.dbar_fn is not None:
            return _asarray(self.dbar_fn(_asarray(z)))
        return _fd_wirtinger_of(lambda w: self.eval_fn(w).astype(np.complex128), dbar=True)(z)


def sigma_from_nu(nu: NuField) -> SigmaField:
    """sigma = (1 - nu)/(1 + nu); real and positive for |nu| < 1."""

    def ev(z):
        v = nu.nu(z)
        return (1.0 - v) / (1.0 + v)

    def db(z):
        v = nu.nu(z)
        return -2.0 * nu.dbar(z) / (1.0 + v) ** 2

    return SigmaField(name=f"sigma[{nu.name}]", eval_fn=ev, dbar_fn=db)


def nu_from_sigma(sigma: SigmaField, kappa: float = 0.999) -> NuField:
    """Inverse link nu = (1 - sigma)/(1 + sigma)."""

    def ev(z):
        s = sigma.sigma(z)
        return (1.0 - s) / (1.0 + s)

    return NuField(name=f"nu[{sigma.name}]", eval_fn=ev, kappa=kappa)


def alpha_from_sigma(sigma: SigmaField) -> WeightField:
    """alpha = dbar(sigma) / (2 sigma); derivative by finite differences."""

    def ev(z):
        return sigma.dbar(z) / (2.0 * sigma.sigma(z))

    return WeightField(
        name=f"alpha[{sigma.name}]",
        eval_fn=ev,
        deriv_fn=_fd_wirtinger_of(ev, dbar=False),
        singular_fn=sigma.singular_fn,
        singular_desc=f"singularities of sigma {sigma.name!r}",
        params={"sigma": sigma.name},
    )


def _nu_values(nu: NuField, grid: Grid) -> np.ndarray:
    vals = np.full(grid.points.shape, np.nan)
    m = grid.closure_mask
    vals[m] = nu.nu(grid.points[m])
    if np.any(np.abs(vals[m]) >= 1.0):
        raise NuOutOfRange("|nu| >= 1 on the grid")
    return vals


def f_to_w_values(f_values: np.ndarray, nu: NuField, grid: Grid) -> np.ndarray:
    """w = (f - nu conj(f)) / sqrt(1 - nu^2), pointwise on the closure."""
    v = _nu_values(nu, grid)
    with np.errstate(invalid="ignore"):
        return (f_values - v * np.conj(f_values)) / np.sqrt(1.0 - v**2)


def w_to_f_values(w_values: np.ndarray, nu: NuField, grid: Grid) -> np.ndarray:
    """Inverse transform f = (w + nu conj(w)) / sqrt(1 - nu^2)."""
    v = _nu_values(nu, grid)
    with np.errstate(invalid="ignore"):
        return (w_values + v * np.conj(w_values)) / np.sqrt(1.0 - v**2)


# ---------------------------------------------------------------------------
# Discrete Wirtinger derivatives
# ---------------------------------------------------------------------------


def wirtinger(values: np.ndarray, grid: Grid, which: str) -> np.ndarray:
    """Central-difference d or dbar of a grid function.

    Second-order accurate; exact on (anti)linear functions.  Defined on
    interior nodes only (NaN elsewhere).  Raises MissingNeighbor if an
    interior node's stencil hits an undefined (NaN) value.
    """
    if which not in ("dz", "dzbar"):
        raise ValueError(f"which must be 'dz' or 'dzbar', got {which!r}")
    if values.shape != grid.points.shape:
        raise ValueError("field shape does not match grid")
    h = grid.spacing
    fx = np.full(values.shape, np.nan + 1j * np.nan, dtype=np.complex128)
    fy = np.full(values.shape, np.nan + 1j * np.nan, dtype=np.complex128)
    fx[1:-1, :] = (values[2:, :] - values[:-2, :]) / (2.0 * h)
    fy[:, 1:-1] = (values[:, 2:] - values[:, :-2]) / (2.0 * h)

    if which == "dz":
        d = 0.5 * (fx - 1j * fy)
    else:
        d = 0.5 * (fx + 1j * fy)

    interior = grid.interior_mask
    if np.any(np.isnan(d[interior])):
        bad = grid.points[interior & np.isnan(d)].ravel()[:8].tolist()
        raise MissingNeighbor(
            f"stencil values missing at interior nodes, e.g. {bad}"
        )
    out = np.full(values.shape, np.nan + 1j * np.nan, dtype=np.complex128)
    out[interior] = d[interior]
    return out

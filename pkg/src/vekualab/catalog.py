"""Named closed-form ingredients: holomorphic seeds, sigma and radial profiles.

Entries are vectorized closures addressable by name (+ parameters) from
configs: seeds feed the solver, sigma profiles feed alpha_from_sigma, radial
profiles feed radial_alpha.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigInvalid
from .weights import (
    SigmaField,
    WeightField,
    alpha_from_sigma,
    constant_alpha,
    power_alpha,
    radial_alpha,
    tokamak_alpha,
)


def holomorphic_seed(name: str, **params):
    """Return a vectorized closure for a catalog holomorphic function.

    Known names: one, z, z2, z3, exp, exp_neg, damper (1/(1 + eps*z), needs
    eps > 0).
    """
    if name == "one":
        return lambda z: np.ones_like(np.asarray(z, dtype=np.complex128))
    if name == "z":
        return lambda z: np.asarray(z, dtype=np.complex128)
    if name == "z2":
        return lambda z: np.asarray(z, dtype=np.complex128) ** 2
    if name == "z3":
        return lambda z: np.asarray(z, dtype=np.complex128) ** 3
    if name == "exp":
        return lambda z: np.exp(np.asarray(z, dtype=np.complex128))
    if name == "exp_neg":
        return lambda z: np.exp(-np.asarray(z, dtype=np.complex128))
    if name == "damper":
        eps = float(params.get("eps", 1.0))
        if eps <= 0.0:
            raise ConfigInvalid(f"damper seed needs eps > 0, got {eps}")
        return lambda z: 1.0 / (1.0 + eps * np.asarray(z, dtype=np.complex128))
    raise ConfigInvalid(f"unknown holomorphic seed {name!r}")


SEED_NAMES = ("one", "z", "z2", "z3", "exp", "exp_neg", "damper")


def sigma_profile(name: str, **params) -> SigmaField:
    """Catalog conductivities with closed-form dbar.

    inverse_x: sigma = 1/x (dbar = -1/(2x^2)); exp2x: sigma = e^{2x}
    (dbar = e^{2x}); const: sigma = c.
    """
    if name == "inverse_x":
        return SigmaField(
            name="inverse_x",
            eval_fn=lambda z: 1.0 / z.real,
            dbar_fn=lambda z: -1.0 / (2.0 * z.real**2) + 0j,
            singular_fn=lambda z: z.real <= 1e-300,
        )
    if name == "exp2x":
        return SigmaField(
            name="exp2x",
            eval_fn=lambda z: np.exp(2.0 * z.real),
            dbar_fn=lambda z: np.exp(2.0 * z.real) + 0j,
        )
    if name == "const":
        c = float(params.get("c", 1.0))
        if c <= 0.0:
            raise ConfigInvalid(f"constant sigma must be > 0, got {c}")
        return SigmaField(
            name=f"const({c:g})",
            eval_fn=lambda z: np.full(np.shape(z), c, dtype=np.float64),
            dbar_fn=lambda z: np.zeros(np.shape(z), dtype=np.complex128),
        )
    raise ConfigInvalid(f"unknown sigma profile {name!r}")


def radial_profile(name: str) -> WeightField:
    """Catalog radial weights alpha = alpha(|z|)."""
    if name == "r2":
        return radial_alpha(lambda r: r**2, lambda r: 2.0 * r, name="radial(r^2)")
    if name == "one":
        return radial_alpha(
            lambda r: np.ones_like(r), lambda r: np.zeros_like(r), name="radial(1)"
        )
    if name == "inv_r":
        return radial_alpha(lambda r: 1.0 / r, lambda r: -1.0 / r**2, name="radial(1/r)")
    raise ConfigInvalid(f"unknown radial profile {name!r}")


def weight_from_config(cfg) -> WeightField:
    """Build a weight from a config entry.

    Accepts {"name": ..., params...} dicts; names: zero, const{c}, tokamak
    {lambda}, power{a, mu}, radial{name}, from_sigma{name, ...}.
    """
    if isinstance(cfg, str):
        cfg = {"name": cfg}
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ConfigInvalid(f"weight config must carry a name, got {cfg!r}")
    name = cfg["name"]
    if name == "zero":
        return constant_alpha(0.0)
    if name == "const":
        return constant_alpha(_as_complex_param(cfg, "c"))
    if name == "tokamak":
        if "lambda" not in cfg:
            raise ConfigInvalid("tokamak weight needs a 'lambda' parameter")
        lam = float(cfg["lambda"])
        if lam <= 0.0:
            raise ConfigInvalid(f"tokamak lambda must be > 0, got {lam}")
        return tokamak_alpha(lam)
    if name == "power":
        if "a" not in cfg or "mu" not in cfg:
            raise ConfigInvalid("power weight needs 'a' and 'mu'")
        return power_alpha(_as_complex_param(cfg, "a"), float(cfg["mu"]))
    if name == "radial":
        return radial_profile(cfg.get("profile", cfg.get("sub", "")))
    if name == "from_sigma":
        sub = cfg.get("sigma", cfg.get("sub", ""))
        params = {k: v for k, v in cfg.items() if k not in ("name", "sigma", "sub")}
        return alpha_from_sigma(sigma_profile(sub, **params))
    raise ConfigInvalid(f"unknown weight {name!r}")


def _as_complex_param(cfg, key):
    v = cfg.get(key, 0.0)
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)

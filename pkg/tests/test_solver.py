import math

import numpy as np
import pytest

from vekualab import (
    NoConvergence,
    RadiusOutOfRange,
    Rectangle,
    SeedNotHolomorphic,
    SingularWeight,
    SolutionField,
    UnitDisc,
    WeightField,
    build_grid,
    constant_alpha,
    hp_norm,
    load_solution,
    pompeiu_on_grid,
    residual,
    save_solution,
    solve_vekua,
    tokamak_alpha,
)


def inv_z_weight():
    return WeightField(
        name="inv_z",
        eval_fn=lambda z: 1.0 / z,
        deriv_fn=lambda z: -1.0 / z**2,
        singular_fn=lambda z: np.abs(z) < 1e-300,
        singular_desc="z = 0",
    )


@pytest.fixture(scope="module")
def disc16():
    return build_grid(UnitDisc(), 1 / 16)


def test_zero_weight_identity(disc16):
    seed = disc16.sample(np.exp)
    sol = solve_vekua(seed, constant_alpha(0.0), disc16)
    assert sol.provenance.iterations == 1
    m = disc16.closure_mask
    assert np.array_equal(sol.values[m], seed[m])


def test_small_alpha_converges(disc16):
    seed = disc16.sample(lambda z: np.ones_like(z))
    sol = solve_vekua(seed, constant_alpha(0.1), disc16)
    assert sol.provenance.kind == "fixed_point"
    assert sol.provenance.iterations < 20
    ups = sol.provenance.updates
    ratios = [b / a for a, b in zip(ups, ups[1:]) if a > 0]
    assert all(r < 1.0 for r in ratios[1:])
    assert sol.residual_linf < 2e-2


def test_fixed_point_consistency(disc16):
    tol = 1e-8
    seed = disc16.sample(lambda z: np.ones_like(z))
    alpha = constant_alpha(0.1)
    sol = solve_vekua(seed, alpha, disc16, tol=tol)
    avals = disc16.sample(alpha.eval_fn)
    recon = seed + pompeiu_on_grid(avals * np.conj(sol.values), disc16)
    m = disc16.closure_mask
    assert np.max(np.abs(sol.values[m] - recon[m])) <= 2 * tol


def test_no_convergence_carries_history(disc16):
    seed = disc16.sample(lambda z: np.ones_like(z))
    with pytest.raises(NoConvergence) as err:
        solve_vekua(seed, constant_alpha(3.0), disc16, max_iter=20)
    assert len(err.value.updates) == 20
    assert err.value.updates[-1] > err.value.updates[0]


def test_seed_holomorphy_gate(disc16):
    with pytest.raises(SeedNotHolomorphic):
        solve_vekua(disc16.sample(np.conj), constant_alpha(0.1), disc16)


def test_singular_weight_rejected():
    grid = build_grid(Rectangle(-1.0, 1.0, -0.5, 0.5), 0.1)
    seed = grid.sample(lambda z: np.ones_like(z))
    with pytest.raises(SingularWeight):
        solve_vekua(seed, tokamak_alpha(1.0), grid)


def test_residual_exact_antiholomorphic_pair():
    # w = conj(z) with alpha = 1/z: dbar w = 1 = alpha * conj(w) exactly, so
    # only rounding remains
    grid = build_grid(Rectangle(1.0, 2.0, -0.5, 0.5), 0.01)
    w = SolutionField(values=grid.sample(np.conj), grid=grid)
    assert residual(w, inv_z_weight()) <= 1e-10
    assert w.residual_linf is not None


def test_residual_exponential_family_order():
    c = 0.3
    alpha = constant_alpha(c)
    res = []
    for h in (0.04, 0.02, 0.01):
        grid = build_grid(Rectangle(1.0, 2.0, -0.5, 0.5), h)
        w = SolutionField(
            values=grid.sample(lambda z: np.exp(2.0 * c * z.real).astype(np.complex128)),
            grid=grid,
        )
        res.append(residual(w, alpha))
    slopes = [math.log(res[i] / res[i + 1]) / math.log(2.0) for i in range(2)]
    assert all(1.7 <= s <= 2.3 for s in slopes)


def test_residual_nonsolution_control(disc16):
    # w = z with alpha = 1: dbar w = 0, so the residual is max |z| over interior
    w = SolutionField(values=disc16.sample(lambda z: z), grid=disc16)
    value = residual(w, constant_alpha(1.0))
    expected = float(np.max(np.abs(disc16.interior_points())))
    assert value == pytest.approx(expected, rel=1e-12)


def test_solver_reproduces_constant_alpha_closed_form():
    # w = e^{2cx} solves dbar w = c conj(w); extract its holomorphic part
    # f = w - T(alpha conj w) from the closed form, then re-solve from f
    c = 0.25
    alpha = constant_alpha(c)
    grid = build_grid(Rectangle(0.0, 1.0, -0.5, 0.5), 1 / 32)
    w_exact = grid.sample(lambda z: np.exp(2.0 * c * z.real).astype(np.complex128))
    avals = grid.sample(alpha.eval_fn)
    seed = w_exact - pompeiu_on_grid(avals * np.conj(w_exact), grid)
    sol = solve_vekua(seed, alpha, grid, holomorphy_tol=1.0)
    m = grid.closure_mask
    err = np.max(np.abs(sol.values[m] - w_exact[m]))
    assert err < 5e-3
    assert sol.residual_linf < 5e-3


# --- hp norm -------------------------------------------------------------------


@pytest.fixture(scope="module")
def disc64():
    return build_grid(UnitDisc(), 1 / 64)


def test_hp_norm_constant(disc64):
    f = SolutionField(values=disc64.sample(lambda z: np.ones_like(z)), grid=disc64)
    assert hp_norm(f, 1.0, [0.5]) == pytest.approx(1.0)
    assert hp_norm(f, 3.5, [0.3, 0.7]) == pytest.approx(1.0)


def test_hp_norm_identity_function(disc64):
    f = SolutionField(values=disc64.sample(lambda z: z), grid=disc64)
    v = hp_norm(f, 2.0, [0.5, 0.9, 0.99])
    assert v == pytest.approx(0.99, abs=3e-3)


def test_hp_norm_z_squared(disc64):
    f = SolutionField(values=disc64.sample(lambda z: z**2), grid=disc64)
    assert hp_norm(f, 2.0, [0.9]) == pytest.approx(0.81, abs=1e-4)


def test_hp_norm_radius_validation(disc64):
    f = SolutionField(values=disc64.sample(lambda z: z), grid=disc64)
    with pytest.raises(RadiusOutOfRange):
        hp_norm(f, 2.0, [1.5])
    with pytest.raises(RadiusOutOfRange):
        hp_norm(f, 2.0, [])


# --- serialization ----------------------------------------------------------------


def test_solution_round_trip_bit_exact(tmp_path, disc16):
    seed = disc16.sample(lambda z: np.ones_like(z))
    sol = solve_vekua(seed, constant_alpha(0.1), disc16)
    p1 = tmp_path / "sol.json"
    p2 = tmp_path / "sol2.json"
    save_solution(p1, sol)
    loaded = load_solution(p1)
    assert loaded.values.tobytes() == sol.values.tobytes()
    assert loaded.residual_linf == sol.residual_linf
    assert loaded.provenance.iterations == sol.provenance.iterations
    save_solution(p2, loaded)
    assert p1.read_bytes() == p2.read_bytes()

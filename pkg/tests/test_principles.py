import math

import numpy as np
import pytest

from vekualab import (
    BranchCutCrossesDomain,
    DamperFamily,
    DiscIntersectsDomain,
    ImageOutsideDomain,
    NoDampersForUnboundedDomain,
    NonpositiveBoundaryMax,
    Rectangle,
    SingularWeight,
    SolutionField,
    Strip,
    TruncatedHalfPlane,
    UnitDisc,
    build_grid,
    carl_matrix,
    check_carl,
    check_halfplane,
    check_logmap,
    check_threelines_condition,
    constant_alpha,
    damper_properties_check,
    is_negative_semidefinite,
    max_principle_report,
    power_alpha,
    power_mu_scan,
    pullback_weight,
    residual,
    tokamak_alpha,
)


# --- matrix formulation -------------------------------------------------------


def test_carl_matrix_examples():
    assert np.allclose(carl_matrix(1.0, 0.0), [[-2.0, 0.0], [0.0, -2.0]])
    assert np.allclose(carl_matrix(0.0, 1.0), [[-1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(carl_matrix(-0.25, 0.125), [[-0.25, 0.0], [0.0, 0.0]])


def test_is_negative_semidefinite_examples():
    assert is_negative_semidefinite(np.diag([-2.0, -2.0]))
    assert not is_negative_semidefinite(np.array([[-1.0, 0.0], [0.0, 1.0]]))
    assert is_negative_semidefinite(np.array([[-0.25, 0.0], [0.0, 0.0]]))


def test_carl_matrix_determinant_identity():
    rng = np.random.default_rng(8)
    for _ in range(200):
        a = complex(rng.normal(), rng.normal())
        d = complex(rng.normal(), rng.normal())
        m = carl_matrix(a, d)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        direct = 4.0 * abs(a) ** 4 - abs(d) ** 2
        assert abs(det - direct) <= 1e-12 * max(1.0, abs(direct))


# --- bounded-domain condition ---------------------------------------------------


def test_check_carl_tokamak_equality():
    grid = build_grid(Rectangle(0.5, 2.0, -1.0, 1.0), 0.05)
    report = check_carl(tokamak_alpha(4.0), grid)
    assert report.verdict.status == "holds_with_equality"
    m = ~np.isnan(report.margin)
    assert np.max(np.abs(report.margin[m])) <= 1e-10


def test_check_carl_tokamak_strict():
    grid = build_grid(Rectangle(0.5, 2.0, -1.0, 1.0), 0.05)
    report = check_carl(tokamak_alpha(2.0), grid)
    assert report.verdict.status == "holds"
    m = ~np.isnan(report.margin)
    expected = 1.0 / (4.0 * grid.points.real[m] ** 2)
    assert np.max(np.abs(report.margin[m] - expected)) <= 1e-12


def test_check_carl_zero_weight_equality():
    grid = build_grid(UnitDisc(), 0.2)
    report = check_carl(constant_alpha(0.0), grid)
    assert report.verdict.status == "holds_with_equality"


def test_check_carl_singular_weight():
    grid = build_grid(Rectangle(-1.0, 1.0, -1.0, 1.0), 0.25)
    with pytest.raises(SingularWeight):
        check_carl(tokamak_alpha(4.0), grid)


def test_check_carl_failing_weight_witness():
    # alpha = x has 2 x^2 < 1/2 for small x
    grid = build_grid(Rectangle(0.01, 0.4, -0.2, 0.2), 0.01)
    report = check_carl(power_alpha(1.0, 1.0), grid)
    assert report.verdict.status == "fails"
    w = report.verdict.witness
    assert w is not None and w.lhs < w.rhs


# --- half-plane condition -------------------------------------------------------


@pytest.fixture(scope="module")
def halfplane_grid():
    return build_grid(TruncatedHalfPlane(0.05, 3.0), 0.05)


def test_check_halfplane_tokamak_holds(halfplane_grid):
    dampers = DamperFamily.halfplane()
    report = check_halfplane(tokamak_alpha(1.0), halfplane_grid, dampers)
    assert report.verdict.status == "holds"
    # the bound |1 + eps z| >= eps x gives margin >= 1/(2 x^2) pointwise
    pts = halfplane_grid.points
    m = ~np.isnan(report.margin)
    lower = 1.0 / (2.0 * pts.real[m] ** 2)
    assert np.all(report.margin[m] >= lower - 1e-9)
    assert report.envelope_available
    assert report.envelope_min_margin >= float(np.min(lower)) - 1e-9
    assert report.envelope_verdict.status == "holds"


def test_check_halfplane_zero_weight(halfplane_grid):
    report = check_halfplane(constant_alpha(0.0), halfplane_grid, DamperFamily.halfplane())
    assert report.verdict.holds


def test_check_halfplane_linear_power_fails(halfplane_grid):
    report = check_halfplane(power_alpha(1.0, 1.0), halfplane_grid, DamperFamily.halfplane())
    assert report.verdict.status == "fails"
    w = report.verdict.witness
    assert w is not None and w.eps is not None
    # re-derive the failure from the witness data
    z = w.z
    eps = w.eps
    lhs = 2.0 * abs(z.real) ** 4 * 0 + 2.0 * (z.real) ** 2  # 2 |alpha|^2 with alpha = x
    rhs = 0.5 + z.real * eps / abs(1.0 + eps * z)
    assert lhs < rhs


def test_check_halfplane_domain_precondition():
    grid = build_grid(Rectangle(-1.0, 1.0, -1.0, 1.0), 0.2)
    from vekualab import DomainNotInRightHalfPlane

    with pytest.raises(DomainNotInRightHalfPlane):
        check_halfplane(constant_alpha(0.0), grid, DamperFamily.halfplane())


def test_check_halfplane_rejects_logmap_dampers(halfplane_grid):
    lm = DamperFamily.logmap(-1.0 + 0j, 0.5)
    with pytest.raises(ValueError):
        check_halfplane(constant_alpha(0.0), halfplane_grid, lm)


# --- log-map condition -----------------------------------------------------------


def test_check_logmap_zero_weight():
    grid = build_grid(Rectangle(1.0, 2.0, -1.0, 1.0), 0.1)
    dampers = DamperFamily.logmap(-1.0 + 0j, 0.5)
    report = check_logmap(constant_alpha(0.0), grid, -1.0 + 0j, 0.5, dampers)
    assert report.verdict.holds


def test_check_logmap_matches_brute_force():
    grid = build_grid(Rectangle(1.0, 2.0, -1.0, 1.0), 0.1)
    center, radius = -1.0 + 0j, 0.5
    eps_grid = np.logspace(-2, 2, 9)
    dampers = DamperFamily.logmap(center, radius, eps_grid)
    weight = tokamak_alpha(1.0)
    report = check_logmap(weight, grid, center, radius, dampers)

    # independent re-evaluation of the margin formula at every (z, eps)
    cut = report.extra["cut_angle"]
    mask = ~np.isnan(report.margin)
    pts = grid.points[mask]
    w = pts - center
    theta = (cut - math.pi) + np.angle(w * np.exp(-1j * (cut - math.pi)))
    g = np.log(np.abs(w) / radius) + 1j * theta
    a = -1.0 / pts.real
    da = 1.0 / (2.0 * pts.real**2)
    brute = np.full(pts.shape, np.inf)
    for eps in eps_grid:
        ratio = eps / (np.abs(1.0 + eps * g) * np.abs(w))
        m = 2.0 * np.abs(a) ** 2 - np.abs(da) - np.abs(a) * ratio
        brute = np.minimum(brute, m)
    assert np.max(np.abs(report.margin[mask] - brute)) <= 1e-12


def test_check_logmap_disc_inside_domain_rejected():
    grid = build_grid(Rectangle(1.0, 2.0, -1.0, 1.0), 0.1)
    dampers = DamperFamily.logmap(1.5 + 0j, 0.2)
    with pytest.raises(DiscIntersectsDomain):
        check_logmap(constant_alpha(0.0), grid, 1.5 + 0j, 0.2, dampers)


def test_check_logmap_disc_touching_rejected():
    grid = build_grid(Rectangle(1.0, 2.0, -1.0, 1.0), 0.1)
    dampers = DamperFamily.logmap(0.5 + 0j, 0.6)
    with pytest.raises(DiscIntersectsDomain):
        check_logmap(constant_alpha(0.0), grid, 0.5 + 0j, 0.6, dampers)


def test_check_logmap_branch_cut_override_rejected():
    # force the cut to point straight through the domain
    grid = build_grid(Rectangle(1.0, 2.0, -1.0, 1.0), 0.1)
    dampers = DamperFamily.logmap(-1.0 + 0j, 0.5, cut_angle=0.0)
    with pytest.raises(BranchCutCrossesDomain):
        check_logmap(constant_alpha(0.0), grid, -1.0 + 0j, 0.5, dampers)


# --- pullback ---------------------------------------------------------------------


def test_pullback_zero_weight():
    beta = pullback_weight(constant_alpha(0.0), -1.0 + 0j, 0.5)
    zs = np.array([0.1 + 0.2j, 1.0 - 0.5j])
    assert np.allclose(beta.alpha(zs), 0.0)


def test_pullback_constant_weight_closed_form():
    beta = pullback_weight(constant_alpha(1.0), 0.0 + 0j, 1.0)
    zs = np.array([0.3 + 0.4j, -0.2 + 1.0j, 1.5 - 0.3j])
    assert np.allclose(beta.alpha(zs), np.conj(np.exp(zs)))
    assert np.allclose(np.abs(beta.alpha(zs)), np.exp(zs.real))
    assert np.allclose(beta.dalpha(zs), 0.0)


def test_pullback_chain_rule_residual():
    # v = w o h solves dbar v = beta conj(v) when w solves dbar w = alpha conj(w)
    c = 0.25
    alpha = constant_alpha(c)
    center, radius = -1.0 + 0j, 0.5
    beta = pullback_weight(alpha, center, radius)

    def h_map(zeta):
        return radius * np.exp(zeta) + center

    res = []
    for h in (0.02, 0.01):
        zgrid = build_grid(Rectangle(0.0, 1.0, -0.5, 0.5), h)
        v = SolutionField(
            values=zgrid.sample(lambda zeta: np.exp(2.0 * c * h_map(zeta).real).astype(np.complex128)),
            grid=zgrid,
        )
        res.append(residual(v, beta))
    assert res[0] < 1e-3
    assert 1.5 <= math.log2(res[0] / res[1]) <= 2.5


def test_pullback_singular_image_raises():
    # h(zeta) = e^zeta - 1 sends 0 to the singular line Re z = 0 exactly
    beta = pullback_weight(tokamak_alpha(1.0), -1.0 + 0j, 1.0)
    with pytest.raises(ImageOutsideDomain):
        beta.alpha(np.array([0.0 + 0.0j]))


# --- maximum principle ---------------------------------------------------------------


def test_max_principle_constant_field():
    grid = build_grid(Rectangle(0.0, 1.0, 0.0, 1.0), 0.1)
    w = SolutionField(values=grid.sample(lambda z: np.full(np.shape(z), 2.0 - 1.0j)), grid=grid)
    report = max_principle_report(w)
    assert report.passed
    assert report.interior_sup == pytest.approx(abs(2.0 - 1.0j))
    assert report.boundary_sup == pytest.approx(abs(2.0 - 1.0j))


def test_max_principle_decaying_exponential_halfdisc():
    grid = build_grid(TruncatedHalfPlane(0.0, 10.0), 0.1)
    w = SolutionField(values=grid.sample(lambda z: np.exp(-z)), grid=grid)
    report = max_principle_report(w)
    assert report.passed
    assert report.boundary_sup == pytest.approx(1.0, abs=1e-12)
    assert report.interior_sup < 1.0
    assert not report.arc_dominant


def test_max_principle_growing_exponential_flags_arc():
    grid = build_grid(TruncatedHalfPlane(0.0, 10.0), 0.1)
    w = SolutionField(values=grid.sample(np.exp), grid=grid)
    report = max_principle_report(w)
    assert report.passed  # only because the arc carries the maximum
    assert report.arc_dominant
    assert report.arc_sup > report.boundary_sup


def test_max_principle_unbounded_exhaustion():
    grid = build_grid(TruncatedHalfPlane(0.0, 10.0), 0.1)
    w = SolutionField(values=grid.sample(lambda z: np.exp(-z)), grid=grid)
    dampers = DamperFamily.halfplane(np.logspace(-3, 1, 9))
    report = max_principle_report(w, dampers=dampers, mode="unbounded")
    assert report.passed
    assert all(r["ok"] for r in report.exhaustion)


def test_max_principle_unbounded_needs_dampers():
    grid = build_grid(TruncatedHalfPlane(0.0, 5.0), 0.2)
    w = SolutionField(values=grid.sample(lambda z: np.exp(-z)), grid=grid)
    with pytest.raises(NoDampersForUnboundedDomain):
        max_principle_report(w, mode="unbounded")


def test_max_principle_holomorphic_calibration():
    # classical maximum modulus: every holomorphic field passes on bounded grids
    seeds = [
        lambda z: np.ones_like(z),
        lambda z: z,
        lambda z: z**2,
        np.exp,
        lambda z: np.exp(-z),
        lambda z: 1.0 / (2.0 + z),
        lambda z: np.sin(z),
        lambda z: z**3 - 2.0 * z,
        lambda z: np.exp(1j * z),
        lambda z: (z - 0.3) * np.exp(z),
    ]
    grids = [
        build_grid(UnitDisc(), 0.1),
        build_grid(Rectangle(0.0, 1.0, -0.5, 0.5), 0.05),
    ]
    for grid in grids:
        for fn in seeds:
            w = SolutionField(values=grid.sample(fn), grid=grid)
            assert max_principle_report(w).passed


# --- power scan -----------------------------------------------------------------


def test_power_mu_scan_only_minus_one_holds():
    grid = build_grid(Rectangle(0.01, 100.0, -1.0, 1.0), 0.1)
    dampers = DamperFamily.halfplane()
    entries = power_mu_scan(-1.0, [-2.0, -1.5, -1.0, -0.5, 0.0, 1.0], grid, dampers)
    verdicts = {e.mu: e.report.verdict for e in entries}
    for mu, verdict in verdicts.items():
        if mu == -1.0:
            assert verdict.status == "holds"
        else:
            assert verdict.status == "fails"
            assert verdict.witness is not None
            assert verdict.witness.eps is not None


def test_power_mu_scan_empty_and_zero():
    grid = build_grid(Rectangle(0.5, 2.0, -0.5, 0.5), 0.1)
    dampers = DamperFamily.halfplane()
    assert power_mu_scan(-1.0, [], grid, dampers) == []
    entries = power_mu_scan(0.0, [-2.0, 0.0, 1.0], grid, dampers)
    assert all(e.report.verdict.holds for e in entries)


# --- dampers ------------------------------------------------------------------------


def test_damper_values():
    d = DamperFamily.halfplane([1.0])
    assert d.value(0.0 + 0j, 1.0) == pytest.approx(1.0)
    assert abs(d.value(1j, 1.0)) == pytest.approx(1.0 / math.sqrt(2.0))
    assert abs(d.value(100.0 + 0j, 0.1)) == pytest.approx(1.0 / 11.0)
    assert d.ratio(2.0 + 0j, 0.5) == pytest.approx(0.5 / abs(1.0 + 0.5 * 2.0))


def test_damper_properties_report():
    grid = build_grid(TruncatedHalfPlane(0.0, 4.0), 0.1)
    dampers = DamperFamily.halfplane()
    report = damper_properties_check(dampers, grid)
    assert report.passed
    assert report.boundary_bound["max_abs"] <= 1.0 + 1e-12
    devs = [row["deviation"] for row in report.unit_limit["rows"]]
    assert devs == sorted(devs)


# --- three-lines condition ------------------------------------------------------------


def test_threelines_condition_zero_weight():
    grid = build_grid(Strip(1.0, 2.0, 2.0), 0.1)
    report = check_threelines_condition(
        constant_alpha(0.0), grid, 1.0, 1.0, 1.0, 2.0, DamperFamily.halfplane()
    )
    assert report.verdict.holds


def test_threelines_equal_maxima_reduces_to_halfplane():
    grid = build_grid(Strip(1.0, 2.0, 2.0), 0.1)
    dampers = DamperFamily.halfplane()
    weight = tokamak_alpha(1.0)
    three = check_threelines_condition(weight, grid, 2.5, 2.5, 1.0, 2.0, dampers)
    half = check_halfplane(weight, grid, dampers)
    mask = ~np.isnan(three.margin)
    assert np.array_equal(mask, ~np.isnan(half.margin))
    assert np.max(np.abs(three.margin[mask] - half.margin[mask])) <= 1e-12


def test_threelines_condition_brute_force_oracle():
    grid = build_grid(Strip(1.0, 2.0, 2.0), 0.1)
    eps_grid = np.logspace(-2, 2, 7)
    dampers = DamperFamily.halfplane(eps_grid)
    Ma, Mb = 1.0, 2.0 ** (-2.0)
    report = check_threelines_condition(tokamak_alpha(1.0), grid, Ma, Mb, 1.0, 2.0, dampers)
    mask = ~np.isnan(report.margin)
    pts = grid.points[mask]
    a = -1.0 / pts.real
    da = 1.0 / (2.0 * pts.real**2)
    mid = abs(math.log(Ma / Mb)) / 1.0
    brute = np.full(pts.shape, np.inf)
    for eps in eps_grid:
        m = 2.0 * np.abs(a) ** 2 - np.abs(da) - np.abs(a) * mid - np.abs(a) * eps / np.abs(1.0 + eps * pts)
        brute = np.minimum(brute, m)
    assert np.max(np.abs(report.margin[mask] - brute)) <= 1e-12


def test_threelines_nonpositive_maxima_rejected():
    grid = build_grid(Strip(1.0, 2.0, 2.0), 0.2)
    with pytest.raises(NonpositiveBoundaryMax):
        check_threelines_condition(
            constant_alpha(0.0), grid, 0.0, 1.0, 1.0, 2.0, DamperFamily.halfplane()
        )

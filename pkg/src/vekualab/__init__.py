"""vekualab: a numerical laboratory for dbar(w) = alpha * conj(w).

Builds solutions of the generalized Cauchy-Riemann equation on planar grids
via the area-Cauchy transform and empirically verifies weight conditions,
maximum principles (bounded and Phragmen-Lindelof style), domain
transformations, and three-lines log-convexity.
"""

from .errors import *  # noqa: F401,F403
from .geometry import (
    DiscComplement,
    DomainSpec,
    Grid,
    Membership,
    PointClass,
    Rectangle,
    Strip,
    TruncatedDomain,
    TruncatedHalfPlane,
    UnitDisc,
    boundary_points,
    build_grid,
    domain_from_config,
    in_domain,
    truncate,
)
from .weights import (
    NuField,
    SigmaField,
    WeightField,
    alpha_from_sigma,
    constant_alpha,
    f_to_w_values,
    nu_from_sigma,
    power_alpha,
    radial_alpha,
    sigma_from_nu,
    tokamak_alpha,
    w_to_f_values,
    wirtinger,
)
from .pompeiu import (
    CELL_EXCLUSION,
    EXACT_CONSTANT_CELL,
    TransformResult,
    box_inverse_integral,
    pompeiu_on_grid,
    pompeiu_transform,
)
from .solver import (
    Provenance,
    SolutionField,
    hp_norm,
    load_solution,
    residual,
    residual_field,
    save_solution,
    solve_vekua,
)
from .principles import (
    ConditionReport,
    ConvexityReport,
    DamperFamily,
    DamperPropertiesReport,
    MaxPrincipleReport,
    MuScanEntry,
    ThreeLinesProfile,
    Verdict,
    Witness,
    carl_matrix,
    check_carl,
    check_halfplane,
    check_logmap,
    check_threelines_condition,
    damper_properties_check,
    is_negative_semidefinite,
    log_convexity_check,
    max_principle_report,
    power_mu_scan,
    pullback_weight,
    three_lines_profile,
)
from . import catalog

__version__ = "0.1.0"

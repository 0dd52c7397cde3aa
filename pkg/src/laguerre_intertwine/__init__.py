"""Non-colliding Laguerre diffusions, interlacing kernels, and their
verification suite."""

from .numerics import (
    QuadratureRule,
    RngStream,
    bessel_i_scaled,
    gauss_legendre_rule,
    integrate_composite,
    log_gamma,
    pochhammer,
    sample_gamma,
    sample_noncentral_chisq,
    sample_poisson,
)
from .diffusion import (
    BoundaryKind,
    DiffusionParams,
    backward_generator_residual,
    boundary_kind,
    dual_transition_density,
    dual_transition_density_exit,
    htransform_residual_32a,
    speed_measure_dual,
    transition_density,
    transition_density_absorbed,
    transition_mean,
    transition_sample,
    transition_variance,
)
from .kernels import (
    DegenerateAnchorError,
    InterlacingWindow,
    KernelSpec,
    UnsupportedDimensionError,
    apply_kernel_quadrature,
    apply_kernel_to_anchors,
    density_alpha_corner,
    density_alpha_square,
    density_corner,
    density_hat_corner,
    density_hat_square,
    is_chamber_point,
    is_strict_interior,
    kernel_density,
    sample_alpha_corner,
    sample_alpha_corner_rows,
    sample_alpha_square,
    sample_corner,
    sample_corner_many,
    sample_corner_rejection,
    vandermonde,
)
from .process import (
    SdeConfig,
    SemigroupParams,
    km_density,
    lambda_eigen,
    semigroup_apply,
    semigroup_apply_rows,
    simulate_matrix_ou,
    simulate_sde,
    subkm_density,
    subkm_dual_density,
)
from .rmt import (
    laguerre_ensemble_density,
    laguerre_ensemble_log_norm,
    radial_part,
    sample_corner_alpha_matrix,
    sample_ginibre,
    sample_haar_unitary,
    sample_invariant_rectangular,
    sample_laguerre_ensemble,
    sample_wishart_radial,
    truncate,
)
from .stats import (
    BonferroniFamily,
    ComparisonReport,
    EmpiricalSample,
    grid_cdf,
    ks_one_sample,
    ks_two_sample,
    moment_compare,
)

__version__ = "0.1.0"

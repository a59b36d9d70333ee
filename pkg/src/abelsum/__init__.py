"""Spectral series solver for fractional evolution problems.

The package splits into a linear-algebra substrate (linops), one-dimensional
fractional-calculus kernels (fraccalc), an entire-function growth toolkit
(growth), the series summation core (abel), contour quadrature with residue
cross-checks (contour), ready-made evolution problems (evolve), and a CLI
(cli) that renders figures next to its delimited output.
"""

from __future__ import annotations

from .abel import (
    GroupingScheme,
    HmTable,
    SplitRow,
    SplitTable,
    abel_series_sum,
    chain_time_coeffs,
    default_gap_constant,
    fourier_chain_coeffs,
    group_by_gaps,
    h_coefficients,
    make_power_grouping,
    projector_apply,
    split_order_reduction,
)
from .contour import (
    ContourResult,
    QuadratureSettings,
    SectorContour,
    build_contour,
    contour_integral,
    default_varsigma,
    eigenfunction_apply,
    gamma_boundary_bound_check,
    pole_residue,
    ray_resolvent_bound_check,
)
from .errors import (
    AbelsumError,
    ConfigError,
    ConstructionWarning,
    DecayError,
    ExtrapolationWarning,
    PoleError,
    SpecError,
    ToleranceError,
)
from .evolve import (
    CauchyProblem,
    QuasiPolynomial,
    artificial_modulus,
    build_artificial_normal,
    build_difference_operator,
    build_frac_perturbed,
    build_sturm_liouville,
    difference_matrix,
    frac_perturbed_modal,
    quasi_polynomial_apply,
    quasi_polynomial_expand,
    quasi_polynomial_matrix,
    residual,
    solution_gap,
    solve_cauchy,
    sturm_liouville_grid,
)
from .fraccalc import (
    FracOrder,
    Grid1D,
    accretivity_certificate,
    difference_frac_coeffs,
    difference_frac_coeffs_alt,
    grid_from_function,
    marchaud_derivative,
    marchaud_matrix,
    riesz_potential,
    rl_derivative,
    rl_derivative_matrix,
    rl_integral,
    rl_integral_matrix,
    time_frac_derivative,
)
from .funcspec import FunctionSpec, entire_truncated, laurent, monomial, phi_alpha, polynomial
from .growth import (
    GrowthReport,
    ZeroSequence,
    angular_H,
    beta_function,
    canonical_product,
    canonical_product_log_abs,
    convergence_exponent,
    counting_function,
    det_resolvent_bound_check,
    example41_sequence,
    fredholm_det,
)
from .linops import (
    DenseOperator,
    JordanSpec,
    SectorGauge,
    build_jordan_operator,
    dense,
    decaying_element,
    diagonal_spec,
    diagonalizable_spec_from_matrix,
    hermitian_components,
    inner,
    jordan_resolvent_chain,
    random_jordan_spec,
    resolvent_apply,
    sector_gauge,
    singular_values,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

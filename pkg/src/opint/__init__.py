"""Operator Stieltjes integrals with respect to the spectral measure of
a normal matrix, the E-norm, and spectral-integral solvers with
existence certificates for Sylvester and Riccati matrix equations."""

__version__ = "0.1.0"

from .errors import (
    BoundaryEigenvalueError,
    BoundaryEigenvalueWarning,
    CertificateViolationError,
    ContourConstructionError,
    GapViolationError,
    InvalidProblemError,
    MaxIterationsError,
    NoConvergenceError,
    NotNormalError,
    OpintError,
    ShapeMismatchError,
    SingularResolventError,
    SingularSystemError,
    ZeroQuadraticTermError,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    adjoint,
    dist_to_numrange,
    hs_norm,
    is_normal,
    numrange_support,
    operator_norm,
    resolvent,
)
from .spectral import (
    Rect,
    SpectralMeasure,
    apply_function,
    decompose_normal,
    measure_of_rect,
    spectral_function,
    spectral_invariant_residuals,
)
from .stieltjes import (
    ConvergenceReport,
    GridPartition,
    OperatorFunction,
    czero_check,
    dyadic_level_sum,
    estimate_lipschitz,
    exact_left_integral,
    exact_right_integral,
    integrate_right,
    left_sum,
    lnest_bound,
    right_sum,
)
from .enorm import bounded_integral_bound_check, check_enorm_sandwich, e_norm
from .sylvester import (
    BoundCheck,
    SylvesterProblem,
    SylvesterReport,
    contour_quadrature,
    dual_solution,
    solve_contour,
    solve_double_spectral,
    solve_kronecker,
    solve_spectral,
    spectral_gap,
    sylvester_residual,
    verify_bounds,
)
from .riccati import (
    ContractionCertificate,
    RiccatiProblem,
    RiccatiReport,
    certify,
    posterior_check,
    riccati_residual,
    solve_fixed_point,
)

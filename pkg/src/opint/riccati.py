"""Certified fixed-point solution of the Riccati equation XA - CX + XBX = D.

The equation is solved through the integral map
F(X) = sum_k P_k D (A + BX - zeta_k)^{-1} over the atoms of the
spectral measure of C.  When sqrt(||B|| ||D||_E) < d/2 (d the distance
between spec(C) and the numerical range of A, or the spectral gap when
A is normal), F is a strict contraction on an explicit ball, so the
iteration converges to the unique solution in that ball and the
certificate records every quantitative ingredient.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .enorm import e_norm
from .errors import (
    CertificateViolationError,
    MaxIterationsError,
    ShapeMismatchError,
    ZeroQuadraticTermError,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    as_matrix,
    is_normal,
    numrange_distances,
    operator_norm,
    resolvent,
)
from .spectral import decompose_normal
from .sylvester import BoundCheck

__all__ = [
    "RiccatiProblem",
    "ContractionCertificate",
    "RiccatiReport",
    "certify",
    "solve_fixed_point",
    "riccati_residual",
    "posterior_check",
]


@dataclass
class RiccatiProblem:
    """Data (A, B, C, D) of the equation XA - CX + XBX = D; C normal."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    tolerances: "object" = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        self.A = as_matrix(self.A, "A")
        self.B = as_matrix(self.B, "B")
        self.C = as_matrix(self.C, "C")
        self.D = as_matrix(self.D, "D")
        if self.A.shape[0] != self.A.shape[1]:
            raise ShapeMismatchError(f"A must be square, got {self.A.shape}")
        if self.C.shape[0] != self.C.shape[1]:
            raise ShapeMismatchError(f"C must be square, got {self.C.shape}")
        h, k = self.A.shape[0], self.C.shape[0]
        if self.B.shape != (h, k):
            raise ShapeMismatchError(
                f"B must be ({h} x {k}) to match A and C, got {self.B.shape}")
        if self.D.shape != (k, h):
            raise ShapeMismatchError(
                f"D must be ({k} x {h}) to match C and A, got {self.D.shape}")

    @property
    def h(self):
        return self.A.shape[0]

    @property
    def k(self):
        return self.C.shape[0]


@dataclass
class ContractionCertificate:
    """Quantitative record certifying solvability by contraction.

    mode is "normal_a" (d = spectral gap) or "numerical_range" (d = a
    conservative lower bound on dist(W(A), spec(C))).  condition_ok
    holds exactly when sqrt(||B|| ||D||_E) < d/2; then [r_min, r_max) is
    the admissible radius interval, q_at_rmin the contraction factor on
    the smallest admissible ball, and the a-priori bounds cap both the
    operator and the E-norm of the solution by r_min.
    """

    mode: str
    d: float
    norm_b: float
    enorm_d: float
    condition_ok: bool
    r_min: float
    r_max: float
    q_at_rmin: float
    apriori_norm_x: float
    apriori_enorm_x: float
    strict_contraction_predicted: bool


@dataclass
class RiccatiReport:
    """Solution record of a fixed-point run."""

    X: np.ndarray
    iterations: int
    residual: float
    enorm_x: float
    certificate: ContractionCertificate
    converged: bool
    step_norms: list = field(default_factory=list)


def riccati_residual(prob, X):
    """||XA - CX + XBX - D|| recomputed from scratch."""
    X = np.asarray(X, dtype=np.complex128)
    return operator_norm(X @ prob.A - prob.C @ X + X @ prob.B @ X - prob.D)


def certify(prob, tol=None, n_angles=720):
    """Contraction certificate for the fixed-point map of the problem.

    Raises ZeroQuadraticTermError when B = 0: the equation is then a
    plain Sylvester equation and should be solved as such.
    """
    tol = tol or prob.tolerances
    norm_b = operator_norm(prob.B)
    if norm_b == 0.0:
        raise ZeroQuadraticTermError(
            "B = 0 turns the equation into a Sylvester equation; "
            "use the sylvester solvers instead")
    sm = decompose_normal(prob.C, tol)
    if is_normal(prob.A, tol):
        mode = "normal_a"
        eig_a = np.linalg.eigvals(prob.A)
        d = float(np.abs(eig_a[:, None] - sm.eigenvalues[None, :]).min())
    else:
        mode = "numerical_range"
        d = float(numrange_distances(prob.A, sm.eigenvalues,
                                     n_angles=n_angles).min())
    enorm_d = e_norm(prob.D, sm)
    bd = norm_b * enorm_d
    condition_ok = math.sqrt(bd) < d / 2.0
    if condition_ok:
        disc = math.sqrt(d * d / 4.0 - bd)
        r_min = (d / 2.0 - disc) / norm_b
        r_max = (d - math.sqrt(bd)) / norm_b
        q_at_rmin = bd / (d - norm_b * r_min) ** 2
    else:
        r_min = r_max = q_at_rmin = math.nan
    strict_predicted = ((norm_b < d / 2.0 and norm_b + enorm_d < d)
                        or (norm_b >= d / 2.0 and enorm_d < d * d / (4.0 * norm_b)))
    return ContractionCertificate(
        mode=mode, d=d, norm_b=norm_b, enorm_d=enorm_d,
        condition_ok=condition_ok, r_min=r_min, r_max=r_max,
        q_at_rmin=q_at_rmin,
        apriori_norm_x=r_min, apriori_enorm_x=r_min,
        strict_contraction_predicted=strict_predicted)


def _apply_map(prob, sm, X, tol):
    """One application of F(X) = sum_k P_k D (A + BX - zeta_k)^{-1}."""
    shifted = prob.A + prob.B @ X
    out = np.zeros((prob.k, prob.h), dtype=np.complex128)
    for k, zeta in enumerate(sm.eigenvalues):
        out += sm.projections[k] @ prob.D @ resolvent(shifted, zeta, tol)
    return out


def solve_fixed_point(prob, x0=None, tol=1e-10, max_iter=100,
                      override_certificate=False, tolerances=None,
                      n_angles=720):
    """Iterate the integral map to a fixed point.

    Starts from x0 (default zero, which lies in every admissible ball)
    and stops when ||X_{n+1} - X_n|| <= tol * max(1, ||X_n||).  When the
    certificate fails, the solve proceeds only with
    override_certificate=True; the theorem is sufficient rather than
    necessary, so best-effort iteration is still offered, with honest
    reporting.

    Raises MaxIterationsError (with the partial report attached) when
    max_iter is exhausted, and propagates SingularResolventError when an
    iterate drives A + BX onto the spectrum of C.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    tolerances = tolerances or prob.tolerances
    cert = certify(prob, tolerances, n_angles=n_angles)
    if not cert.condition_ok and not override_certificate:
        raise CertificateViolationError(
            "contraction certificate failed: sqrt(||B|| ||D||_E) = "
            f"{math.sqrt(cert.norm_b * cert.enorm_d):.6g} is not below d/2 = "
            f"{cert.d / 2.0:.6g}; pass override_certificate=True to iterate "
            "without a guarantee", certificate=cert)
    sm = decompose_normal(prob.C, tolerances)
    if x0 is None:
        X = np.zeros((prob.k, prob.h), dtype=np.complex128)
    else:
        X = as_matrix(x0, "x0")
        if X.shape != (prob.k, prob.h):
            raise ShapeMismatchError(
                f"x0 must be ({prob.k} x {prob.h}), got {X.shape}")
    step_norms = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        X_next = _apply_map(prob, sm, X, tolerances)
        step = operator_norm(X_next - X)
        step_norms.append(step)
        X = X_next
        if step <= tol * max(1.0, operator_norm(X)):
            converged = True
            break
    report = RiccatiReport(X=X, iterations=iterations,
                           residual=riccati_residual(prob, X),
                           enorm_x=e_norm(X, sm), certificate=cert,
                           converged=converged, step_norms=step_norms)
    if not converged:
        raise MaxIterationsError(
            f"fixed-point iteration did not converge in {max_iter} steps "
            f"(last step {step_norms[-1]:.3e})", report=report)
    return report


def posterior_check(prob, report, tol=None):
    """A-posteriori bounds evaluated on a converged solution.

    Returns named BoundCheck entries:

      aposteriori_sup_resolvent  ||X||_E <= ||D||_E *
                                 sup_k ||(A + BX - zeta_k)^{-1}||
      aposteriori_gap            ||X||_E <= ||D||_E / (d - ||B|| ||X||),
                                 present when the denominator is positive
      strict_enorm_lt_1          ||X||_E < 1, and
      strict_norm_order          ||X|| <= ||X||_E,
                                 both present when the certificate
                                 predicted a strict contraction
    """
    tol = tol or prob.tolerances
    cert = report.certificate
    sm = decompose_normal(prob.C, tol)
    X = report.X
    enorm_x = e_norm(X, sm)
    enorm_d = cert.enorm_d
    shifted = prob.A + prob.B @ X
    sup_res = max(operator_norm(resolvent(shifted, zeta, tol))
                  for zeta in sm.eigenvalues)
    checks = {"aposteriori_sup_resolvent": BoundCheck(enorm_d * sup_res, enorm_x)}
    denom = cert.d - cert.norm_b * operator_norm(X)
    if denom > 0:
        checks["aposteriori_gap"] = BoundCheck(enorm_d / denom, enorm_x)
    if cert.strict_contraction_predicted:
        checks["strict_enorm_lt_1"] = BoundCheck(1.0, enorm_x)
        checks["strict_norm_order"] = BoundCheck(enorm_x, operator_norm(X))
    return checks

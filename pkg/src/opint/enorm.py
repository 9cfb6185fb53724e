"""Norm of an operator with respect to a spectral measure.

The E-norm of Y is the square root of the supremum, over systems of
mutually disjoint Borel sets, of  sum_k ||Y* E(Omega_k) Y||.  It sits
between the operator norm and the Hilbert-Schmidt norm and is the
quantity all solvability certificates for the quadratic equation are
measured in.
"""

import numpy as np

from .errors import ShapeMismatchError
from .linalg import DEFAULT_TOLERANCES, adjoint, hs_norm, operator_norm
from .stieltjes import OperatorFunction, exact_left_integral

__all__ = ["e_norm", "check_enorm_sandwich", "bounded_integral_bound_check"]


def e_norm(Y, sm):
    """E-norm of Y with respect to the spectral measure sm.

    Evaluated in closed form at the atomic partition: refining a set
    splits one projection sum into several, and since the measure is
    additive and the operator norm subadditive the partition sum can
    only grow under refinement, so for a finite spectrum the supremum
    over Borel partitions is attained when every atom is its own set.
    """
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.ndim != 2 or Y.shape[0] != sm.dim:
        raise ShapeMismatchError(
            f"Y must have {sm.dim} rows to match the measure, got {Y.shape}")
    total = 0.0
    for P in sm.projections:
        total += operator_norm(adjoint(Y) @ P @ Y)
    return float(np.sqrt(total))


def check_enorm_sandwich(Y, sm):
    """The triple (||Y||, ||Y||_E, ||Y||_2), verifying its ordering.

    Raises AssertionError when the sandwich
    ||Y|| <= ||Y||_E <= ||Y||_2 fails beyond 1e-12 relative slack,
    which would indicate a broken measure rather than a borderline
    instance.
    """
    op = operator_norm(Y)
    en = e_norm(Y, sm)
    hs = hs_norm(Y)
    slack = 1e-12 * max(1.0, op, en, hs)
    assert op <= en + slack, f"||Y|| = {op} exceeds ||Y||_E = {en}"
    assert en <= hs + slack, f"||Y||_E = {en} exceeds ||Y||_2 = {hs}"
    return op, en, hs


def bounded_integral_bound_check(Y, F, sm, rect, tol=DEFAULT_TOLERANCES):
    """Evaluate both sides of the E-norm bound for a weighted integral.

    lhs is the norm of the left integral of  z -> Y F(z)  over rect, rhs
    is ||Y||_E times the sup of ||F|| over the eigenvalues in rect.
    Returns (lhs, rhs) after asserting lhs <= rhs up to solver slack.
    """
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.ndim != 2 or Y.shape[0] != sm.dim:
        raise ShapeMismatchError(
            f"Y must have {sm.dim} rows to match the measure, got {Y.shape}")
    h = Y.shape[1]
    probe = F(rect.a, rect.c)
    if probe.shape != (h, h):
        raise ShapeMismatchError(
            f"F must return ({h} x {h}) matrices to compose with Y, "
            f"got {probe.shape}")
    weighted = OperatorFunction(lambda lam, mu: Y @ F(lam, mu))
    lhs = operator_norm(exact_left_integral(weighted, sm, rect, tol))
    atoms = sm.atoms_in(rect)
    sup_F = max((operator_norm(F(sm.eigenvalues[k].real, sm.eigenvalues[k].imag))
                 for k in atoms), default=0.0)
    rhs = e_norm(Y, sm) * sup_F
    slack = tol.tol_solve * max(1.0, rhs)
    assert lhs <= rhs + slack, (
        f"integral bound violated: {lhs} > {rhs} + {slack}")
    return lhs, rhs

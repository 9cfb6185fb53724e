"""Dense complex-matrix primitives shared by every other module."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ShapeMismatchError, SingularResolventError

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "as_matrix",
    "operator_norm",
    "hs_norm",
    "adjoint",
    "resolvent",
    "normality_defect",
    "is_normal",
    "numrange_support",
    "dist_to_numrange",
    "numrange_distances",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used throughout the package.

    tol_normal   relative normality tolerance
    tol_cluster  eigenvalue clustering tolerance, relative to spectral radius
    tol_solve    solver / convergence tolerance
    tol_quad     contour-quadrature tolerance
    """

    tol_normal: float = 1e-10
    tol_cluster: float = 1e-8
    tol_solve: float = 1e-10
    tol_quad: float = 1e-12

    def __post_init__(self):
        for name in ("tol_normal", "tol_cluster", "tol_solve", "tol_quad"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(M, name="matrix"):
    """Coerce input to a 2-D complex128 array with finite entries."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeMismatchError(f"{name} must be a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ShapeMismatchError(f"{name} contains non-finite entries")
    return A


def _square(M, name="matrix"):
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatchError(f"{name} must be square, got shape {A.shape}")
    return A


def operator_norm(M):
    """Largest singular value of M."""
    A = np.asarray(M, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def hs_norm(M):
    """Frobenius norm of M."""
    return float(np.linalg.norm(np.asarray(M, dtype=np.complex128), "fro"))


def adjoint(M):
    """Conjugate transpose."""
    return np.asarray(M, dtype=np.complex128).conj().T


def resolvent(M, z, tol=DEFAULT_TOLERANCES):
    """(M - zI)^{-1}, computed by an LU-based solve per column.

    Raises SingularResolventError when M - zI is numerically singular,
    i.e. z is within working precision of the spectrum of M.
    """
    A = _square(M, "M")
    n = A.shape[0]
    shifted = A - complex(z) * np.eye(n, dtype=np.complex128)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(shifted, check_finite=False)
            R = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=np.complex128),
                                      check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularResolventError(
            f"M - zI is singular at z = {complex(z)}") from exc
    if not np.all(np.isfinite(R)):
        raise SingularResolventError(
            f"M - zI is numerically singular at z = {complex(z)}")
    # Backward-stable solves leave a residual ~ eps * kappa; anything far
    # beyond that means z effectively sits on the spectrum.
    residual = operator_norm(shifted @ R - np.eye(n))
    scale = max(1.0, operator_norm(shifted) * operator_norm(R))
    if residual > tol.tol_solve * scale:
        raise SingularResolventError(
            f"resolvent solve at z = {complex(z)} lost all accuracy "
            f"(residual {residual:.3e})")
    return R


def normality_defect(M):
    """Operator norm of M*M - MM*."""
    A = _square(M, "M")
    return operator_norm(adjoint(A) @ A - A @ adjoint(A))


def is_normal(M, tol=DEFAULT_TOLERANCES):
    """True when the relative normality defect is within tol_normal."""
    A = _square(M, "M")
    scale = operator_norm(A) ** 2
    return normality_defect(A) <= tol.tol_normal * max(scale, 1e-300)


def _support_values(A, thetas):
    """Support function of the numerical range of A at the given angles.

    For each angle t the value is the top eigenvalue of the Hermitian
    part of exp(-it) A, evaluated as one batched eigensolve.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phase = np.exp(-1j * thetas)[:, None, None]
    H = 0.5 * (phase * A + np.conj(np.transpose(phase * A, (0, 2, 1))))
    return np.linalg.eigvalsh(H)[:, -1]


def numrange_support(A, theta):
    """Support function h(theta) = sup over unit x of Re(e^{-i theta} <Ax, x>)."""
    A = _square(A, "A")
    return float(_support_values(A, [float(theta)])[0])


def numrange_distances(A, points, n_angles=720, refine_iters=40):
    """Lower bounds on the distances from each point to the numerical range.

    Samples the support function on a uniform angle grid (one batched
    eigensolve), takes per-point maxima of
    Re(e^{-i theta} z) - h(theta), and sharpens each maximum with a
    ternary-search refinement pass on its grid bracket.  Sampling can
    only underestimate the true distance, which is the safe direction
    for every certificate built on top of it.
    """
    A = _square(A, "A")
    pts = np.atleast_1d(np.asarray(points, dtype=np.complex128))
    if n_angles < 8:
        raise ValueError("n_angles must be at least 8")
    thetas = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    h = _support_values(A, thetas)
    # g[t, p] = Re(e^{-i theta_t} z_p) - h(theta_t)
    g = np.real(np.exp(-1j * thetas)[:, None] * pts[None, :]) - h[:, None]
    best = g.max(axis=0)
    if refine_iters > 0:
        idx = g.argmax(axis=0)
        step = 2.0 * np.pi / n_angles
        lo = thetas[idx] - step
        hi = thetas[idx] + step
        for _ in range(refine_iters):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            g1 = np.real(np.exp(-1j * m1) * pts) - _support_values(A, m1)
            g2 = np.real(np.exp(-1j * m2) * pts) - _support_values(A, m2)
            keep_low = g1 >= g2
            hi = np.where(keep_low, m2, hi)
            lo = np.where(keep_low, lo, m1)
            best = np.maximum(best, np.maximum(g1, g2))
    return np.maximum(best, 0.0)


def dist_to_numrange(A, z, n_angles=720):
    """Lower bound on dist(z, W(A)) via support-function sampling.

    Zero when z lies inside the numerical range.  Nondecreasing in
    n_angles (up to refinement noise) and never exceeds the true
    distance, by convexity of W(A).
    """
    return float(numrange_distances(A, [complex(z)], n_angles=n_angles)[0])

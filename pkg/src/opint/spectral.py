"""Projection-valued spectral measures of normal matrices.

A normal matrix C decomposes as C = sum_k zeta_k P_k with distinct
eigenvalues zeta_k and mutually orthogonal eigenprojections P_k.  The
family {P_k} is the atomic realization of the projection-valued measure
E(.): evaluating E on a set just sums the projections of the eigenvalues
it contains.  Everything downstream (integral sums, E-norms, equation
solvers) is built on this object.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BoundaryEigenvalueWarning, NotNormalError, ShapeMismatchError
from .linalg import DEFAULT_TOLERANCES, adjoint, as_matrix, operator_norm

__all__ = [
    "Rect",
    "SpectralMeasure",
    "decompose_normal",
    "measure_of_rect",
    "spectral_function",
    "apply_function",
    "spectral_invariant_residuals",
]


@dataclass(frozen=True)
class Rect:
    """Half-open rectangle [a, b) x [c, d) in the (Re, Im) plane."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"rectangle bound {name} must be finite")
        if not (self.a < self.b and self.c < self.d):
            raise ValueError(
                f"rectangle requires a < b and c < d, got "
                f"[{self.a}, {self.b}) x [{self.c}, {self.d})")

    def contains(self, lam, mu):
        """Half-open membership test, exact IEEE comparisons."""
        return self.a <= lam < self.b and self.c <= mu < self.d

    def contains_z(self, z):
        return self.contains(z.real, z.imag)

    def boundary_distance(self, lam, mu):
        """Distance from (lam, mu) to the edge lines of the rectangle."""
        return min(abs(lam - self.a), abs(lam - self.b),
                   abs(mu - self.c), abs(mu - self.d))

    @property
    def width(self):
        return self.b - self.a

    @property
    def height(self):
        return self.d - self.c


@dataclass
class SpectralMeasure:
    """Distinct eigenvalues of a normal matrix with their eigenprojections.

    Attributes
    ----------
    dim : int
        Dimension of the underlying space.
    eigenvalues : (K,) complex ndarray
        Distinct (clustered) eigenvalues.
    projections : (K, dim, dim) complex ndarray
        Orthogonal projections onto the corresponding eigenspaces.
    multiplicities : (K,) int ndarray
        Eigenspace dimensions; sums to dim.
    """

    dim: int
    eigenvalues: np.ndarray
    projections: np.ndarray
    multiplicities: np.ndarray
    spectral_radius: float = field(init=False)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=np.complex128)
        self.projections = np.asarray(self.projections, dtype=np.complex128)
        self.multiplicities = np.asarray(self.multiplicities, dtype=int)
        self.spectral_radius = float(np.abs(self.eigenvalues).max())

    def __len__(self):
        return len(self.eigenvalues)

    def reconstruct(self):
        """Sum of zeta_k P_k, which should reproduce the source matrix."""
        return np.einsum("k,kij->ij", self.eigenvalues, self.projections)

    def atoms_in(self, rect):
        """Indices of eigenvalues inside the half-open rectangle."""
        lam = self.eigenvalues.real
        mu = self.eigenvalues.imag
        mask = (rect.a <= lam) & (lam < rect.b) & (rect.c <= mu) & (mu < rect.d)
        return np.nonzero(mask)[0]

    def bounding_rect(self, pad=1.0):
        """A rectangle that strictly contains every eigenvalue."""
        lam = self.eigenvalues.real
        mu = self.eigenvalues.imag
        return Rect(float(lam.min() - pad), float(lam.max() + pad),
                    float(mu.min() - pad), float(mu.max() + pad))


def _cluster(values, threshold):
    """Group values by single-linkage with the given merge threshold.

    Agglomerates until every pair of cluster representatives (the
    multiplicity-weighted means) is separated by more than the threshold,
    so repeated eigenvalues coming out of a floating-point eigensolver
    collapse into one atom.
    """
    groups = [[i] for i in range(len(values))]
    reps = list(values)
    merged = True
    while merged and len(groups) > 1:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if abs(reps[i] - reps[j]) <= threshold:
                    groups[i] = groups[i] + groups[j]
                    reps[i] = np.mean([values[m] for m in groups[i]])
                    del groups[j], reps[j]
                    merged = True
                    break
            if merged:
                break
    return groups, np.asarray(reps, dtype=np.complex128)


def decompose_normal(C, tol=DEFAULT_TOLERANCES):
    """Spectral measure of a normal matrix.

    Uses the complex Schur form (diagonal for normal input, with
    orthonormal Schur vectors), clusters near-coincident eigenvalues,
    and rebuilds each projection as V V* from a re-orthonormalized
    eigenvector block so Hermitian idempotency holds to machine
    precision.

    Raises NotNormalError when ||C*C - CC*|| > tol_normal * ||C||^2.
    """
    A = as_matrix(C, "C")
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatchError(f"C must be square, got shape {A.shape}")
    n = A.shape[0]
    norm_sq = max(operator_norm(A) ** 2, 1e-300)
    defect = operator_norm(adjoint(A) @ A - A @ adjoint(A))
    if defect > tol.tol_normal * norm_sq:
        raise NotNormalError(
            f"matrix is not normal: ||C*C - CC*|| = {defect:.3e} exceeds "
            f"{tol.tol_normal:.1e} * ||C||^2 = {tol.tol_normal * norm_sq:.3e}")

    T, Z = scipy.linalg.schur(A, output="complex")
    raw = np.diag(T).astype(np.complex128)
    threshold = tol.tol_cluster * max(1.0, float(np.abs(raw).max()))
    groups, reps = _cluster(raw, threshold)

    order = np.lexsort((reps.imag, reps.real))
    eigenvalues = reps[order]
    projections = np.empty((len(groups), n, n), dtype=np.complex128)
    multiplicities = np.empty(len(groups), dtype=int)
    for out_idx, g_idx in enumerate(order):
        cols = Z[:, groups[g_idx]]
        Q, _ = np.linalg.qr(cols)
        P = Q @ Q.conj().T
        # Symmetrizing makes P[j, i] the exact conjugate of P[i, j].
        projections[out_idx] = 0.5 * (P + P.conj().T)
        multiplicities[out_idx] = len(groups[g_idx])

    return SpectralMeasure(dim=n, eigenvalues=eigenvalues,
                           projections=projections,
                           multiplicities=multiplicities)


def measure_of_rect(sm, rect, tol=DEFAULT_TOLERANCES):
    """E(rect): the orthogonal projection for a half-open rectangle.

    Membership uses exact half-open comparisons on the stored cluster
    representatives.  Eigenvalues within tol_cluster of the boundary are
    flagged with BoundaryEigenvalueWarning: the result is still computed,
    but it is numerically fragile.
    """
    threshold = tol.tol_cluster * max(1.0, sm.spectral_radius)
    for z in sm.eigenvalues:
        if rect.boundary_distance(z.real, z.imag) <= threshold:
            warnings.warn(
                f"eigenvalue {z} lies within {threshold:.2e} of the rectangle "
                "boundary; half-open membership is fragile",
                BoundaryEigenvalueWarning, stacklevel=2)
    out = np.zeros((sm.dim, sm.dim), dtype=np.complex128)
    for k in sm.atoms_in(rect):
        out += sm.projections[k]
    return out


def spectral_function(sm, lam, mu):
    """E of the open south-west quadrant {x < lam, y < mu}."""
    out = np.zeros((sm.dim, sm.dim), dtype=np.complex128)
    for k, z in enumerate(sm.eigenvalues):
        if z.real < lam and z.imag < mu:
            out += sm.projections[k]
    return out


def apply_function(sm, f):
    """Functional calculus: sum of f(zeta_k) P_k."""
    values = np.array([f(z) for z in sm.eigenvalues], dtype=np.complex128)
    if not np.all(np.isfinite(values)):
        raise ValueError("f is not finite on every eigenvalue")
    return np.einsum("k,kij->ij", values, sm.projections)


def spectral_invariant_residuals(sm, C=None):
    """Residuals of the defining properties of a spectral measure.

    Returns a dict with the worst-case deviations from Hermitian
    idempotency, mutual orthogonality, completeness, and (when the
    source matrix is supplied) reconstruction, the latter relative to
    ||C||.
    """
    herm = max(operator_norm(P - P.conj().T) for P in sm.projections)
    idem = max(operator_norm(P @ P - P) for P in sm.projections)
    ortho = 0.0
    for i in range(len(sm)):
        for j in range(i + 1, len(sm)):
            ortho = max(ortho, operator_norm(sm.projections[i] @ sm.projections[j]))
    complete = operator_norm(sm.projections.sum(axis=0) - np.eye(sm.dim))
    out = {
        "hermitian": herm,
        "idempotent": idem,
        "orthogonality": ortho,
        "completeness": complete,
    }
    if C is not None:
        A = as_matrix(C, "C")
        out["reconstruction"] = operator_norm(sm.reconstruct() - A) / max(
            1.0, operator_norm(A))
    return out

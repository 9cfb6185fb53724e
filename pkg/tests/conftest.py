import numpy as np
import pytest

from opint import RiccatiProblem, SylvesterProblem, certify


def random_unitary(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_normal(rng, n, re=(-1.0, 1.0), im=(-1.0, 1.0), repeat=False):
    """Random normal matrix with eigenvalues in the given box."""
    eigs = rng.uniform(*re, n) + 1j * rng.uniform(*im, n)
    if repeat and n >= 3:
        eigs[1] = eigs[0]
        eigs[2] = eigs[0]
    U = random_unitary(rng, n)
    return U @ np.diag(eigs) @ U.conj().T, eigs


def random_complex(rng, rows, cols, scale=1.0):
    M = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return scale * M / max(1.0, np.linalg.norm(M, 2))


def make_sylvester(rng, h, k, normal_a=True, re_a=(2.0, 4.0)):
    """Instance with spec(C) in [-1,1]^2 and spec(A) shifted right; the
    construction keeps the spectral gap at least 1."""
    C, _ = random_normal(rng, k)
    if normal_a:
        A, _ = random_normal(rng, h, re=re_a)
    else:
        A0, _ = random_normal(rng, h, re=re_a)
        N = np.triu(random_complex(rng, h, h), 1)
        A = A0 + 0.2 * N
    D = random_complex(rng, k, h)
    return SylvesterProblem(A, C, D)


def make_certified_riccati(rng, h, k, normal_a=True, margin=0.4):
    """Instance scaled so that sqrt(||B|| ||D||_E) <= margin * d."""
    C, _ = random_normal(rng, k)
    if normal_a:
        A, _ = random_normal(rng, h, re=(2.5, 4.0))
    else:
        A0, _ = random_normal(rng, h, re=(2.5, 4.0))
        A = A0 + 0.1 * np.triu(random_complex(rng, h, h), 1)
    B = random_complex(rng, h, k)
    D = random_complex(rng, k, h)
    prob = RiccatiProblem(A, B, C, D)
    cert = certify(prob)
    target = (margin * cert.d) ** 2
    bd = cert.norm_b * cert.enorm_d
    s = np.sqrt(target / bd)
    prob = RiccatiProblem(A, s * B, C, s * D)
    return prob


@pytest.fixture
def rng():
    return np.random.default_rng(20250809)

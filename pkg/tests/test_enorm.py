import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opint import (
    Rect,
    ShapeMismatchError,
    OperatorFunction,
    adjoint,
    bounded_integral_bound_check,
    check_enorm_sandwich,
    decompose_normal,
    e_norm,
    measure_of_rect,
    operator_norm,
)

from conftest import random_complex, random_normal


def set_partitions(items):
    """All partitions of a list into nonempty disjoint blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]
        yield [[first]] + partition


def brute_force_e_norm(Y, sm):
    """Supremum over every set partition of the atoms (oracle)."""
    best = 0.0
    for partition in set_partitions(list(range(len(sm)))):
        total = 0.0
        for block in partition:
            E = sm.projections[block].sum(axis=0)
            total += operator_norm(adjoint(Y) @ E @ Y)
        best = max(best, total)
    return float(np.sqrt(best))


class TestENorm:
    def test_identity_two_atoms(self):
        sm = decompose_normal(np.diag([0.0, 1.0]))
        assert e_norm(np.eye(2), sm) == pytest.approx(np.sqrt(2.0))

    def test_diag_34(self):
        sm = decompose_normal(np.diag([0.0, 1.0]))
        assert e_norm(np.diag([3.0, 4.0]), sm) == pytest.approx(5.0)

    def test_zero(self):
        sm = decompose_normal(np.diag([0.0, 1.0]))
        assert e_norm(np.zeros((2, 3)), sm) == 0.0

    def test_shape_mismatch(self):
        sm = decompose_normal(np.diag([0.0, 1.0]))
        with pytest.raises(ShapeMismatchError):
            e_norm(np.eye(3), sm)

    def test_matches_brute_force_oracle(self, rng):
        from conftest import random_unitary
        for _ in range(25):
            n_atoms = int(rng.integers(1, 5))
            dim = n_atoms + int(rng.integers(0, 3))
            eigs = rng.standard_normal(n_atoms) + 1j * rng.standard_normal(n_atoms)
            diag = np.concatenate([eigs, rng.choice(eigs, dim - n_atoms)])
            U = random_unitary(rng, dim)
            C = U @ np.diag(diag) @ U.conj().T
            sm = decompose_normal(C)
            assert len(sm) <= 4
            Y = random_complex(rng, dim, int(rng.integers(1, 4)))
            assert e_norm(Y, sm) == pytest.approx(brute_force_e_norm(Y, sm),
                                                  abs=1e-12)

    def test_scaling(self, rng):
        C, _ = random_normal(rng, 5)
        sm = decompose_normal(C)
        Y = random_complex(rng, 5, 3)
        assert e_norm(-2.5j * Y, sm) == pytest.approx(2.5 * e_norm(Y, sm))

    @settings(max_examples=30, deadline=None)
    @given(st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                              allow_infinity=False))
    def test_scaling_hypothesis(self, alpha):
        rng = np.random.default_rng(4242)
        C, _ = random_normal(rng, 4)
        sm = decompose_normal(C)
        Y = random_complex(rng, 4, 2)
        assert e_norm(alpha * Y, sm) == pytest.approx(
            abs(alpha) * e_norm(Y, sm), rel=1e-10, abs=1e-12)

    def test_projection_contracts(self, rng):
        C, _ = random_normal(rng, 6)
        sm = decompose_normal(C)
        Y = random_complex(rng, 6, 4)
        E = measure_of_rect(sm, Rect(-2.0, 0.2, -2.0, 2.0))
        assert e_norm(E @ Y, sm) <= e_norm(Y, sm) + 1e-12


class TestSandwich:
    def test_diag_example(self):
        sm = decompose_normal(np.diag([0.0, 1.0]))
        assert check_enorm_sandwich(np.diag([3.0, 4.0]), sm) == \
            pytest.approx((4.0, 5.0, 5.0))

    def test_single_atom_collapses_to_operator_norm(self, rng):
        # one eigenvalue means one projection = I, so ||Y||_E = ||Y||
        sm = decompose_normal(np.eye(4) * (2.0 + 1j))
        assert len(sm) == 1
        Y = random_complex(rng, 4, 3)
        op, en, _ = check_enorm_sandwich(Y, sm)
        assert en == pytest.approx(op, abs=1e-13)

    def test_random_sandwich(self, rng):
        for _ in range(30):
            dim = int(rng.integers(2, 31))
            C, _ = random_normal(rng, dim)
            sm = decompose_normal(C)
            Y = random_complex(rng, dim, int(rng.integers(1, dim + 1)))
            op, en, hs = check_enorm_sandwich(Y, sm)
            assert op <= en + 1e-12 <= hs + 2e-12


class TestIntegralBound:
    def test_constant_weight(self, rng):
        C, _ = random_normal(rng, 5)
        sm = decompose_normal(C)
        Y = random_complex(rng, 5, 3)
        rect = Rect(-2.0, 2.0, -2.0, 2.0)
        lhs, rhs = bounded_integral_bound_check(
            Y, OperatorFunction.constant(np.eye(3)), sm, rect)
        assert lhs == pytest.approx(operator_norm(Y), abs=1e-12)
        assert rhs == pytest.approx(e_norm(Y, sm), abs=1e-12)

    def test_zero_operator(self, rng):
        C, _ = random_normal(rng, 4)
        sm = decompose_normal(C)
        lhs, rhs = bounded_integral_bound_check(
            np.zeros((4, 2)), OperatorFunction.constant(np.eye(2)), sm,
            Rect(-2.0, 2.0, -2.0, 2.0))
        assert (lhs, rhs) == (0.0, 0.0)

    def test_random_instances(self, rng):
        rect = Rect(-2.0, 2.0, -2.0, 2.0)
        for _ in range(20):
            dim = int(rng.integers(2, 21))
            h = int(rng.integers(1, 5))
            C, _ = random_normal(rng, dim)
            sm = decompose_normal(C)
            Y = random_complex(rng, dim, h)
            M = random_complex(rng, h, h)
            F = OperatorFunction(lambda lam, mu, M=M:
                                 (1.0 + 0.3 * lam - 0.2j * mu) * M)
            lhs, rhs = bounded_integral_bound_check(Y, F, sm, rect)
            assert lhs <= rhs + 1e-10

    def test_shape_mismatch(self, rng):
        C, _ = random_normal(rng, 4)
        sm = decompose_normal(C)
        with pytest.raises(ShapeMismatchError):
            bounded_integral_bound_check(
                random_complex(rng, 4, 2), OperatorFunction.constant(np.eye(3)),
                sm, Rect(-2.0, 2.0, -2.0, 2.0))

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from opint import (
    BoundaryEigenvalueError,
    GridPartition,
    NoConvergenceError,
    OperatorFunction,
    Rect,
    adjoint,
    czero_check,
    decompose_normal,
    estimate_lipschitz,
    exact_left_integral,
    exact_right_integral,
    integrate_right,
    left_sum,
    lnest_bound,
    operator_norm,
    right_sum,
    solve_kronecker,
    SylvesterProblem,
)

from conftest import random_complex, random_normal

RECT = Rect(-2.0, 2.0, -2.0, 2.0)


def z_function(dim):
    return OperatorFunction(
        lambda lam, mu: complex(lam, mu) * np.eye(dim, dtype=complex))


class TestPartition:
    def test_uniform(self):
        p = GridPartition.uniform(RECT, 4, 8)
        assert p.m == 4 and p.n == 8
        assert p.mesh == pytest.approx(1.0 + 0.5)

    def test_invalid_lines(self):
        with pytest.raises(ValueError):
            GridPartition([0.0, 0.0, 1.0], [0.0, 1.0])

    def test_custom_tags_validated(self):
        with pytest.raises(ValueError):
            GridPartition([0.0, 1.0], [0.0, 1.0], tag_rule="custom",
                          custom_tags=([1.5], [0.5]))
        p = GridPartition([0.0, 1.0], [0.0, 1.0], tag_rule="custom",
                          custom_tags=([0.25], [0.75]))
        assert p.custom_tags[0][0] == 0.25


class TestSums:
    def test_constant_identity_gives_full_measure(self, rng):
        C, _ = random_normal(rng, 6)
        sm = decompose_normal(C)
        p = GridPartition.uniform(RECT, 5, 7)
        J = right_sum(OperatorFunction.constant(np.eye(6)), sm, p)
        assert operator_norm(J - np.eye(6)) <= 1e-12

    def test_tags_at_eigenvalues_reproduce_matrix(self):
        C = np.diag([1.0, 1j])
        sm = decompose_normal(C)
        # one cell per eigenvalue with the tag placed exactly on it
        p = GridPartition(np.array([-0.5, 0.5, 1.5]), np.array([-0.5, 0.5, 1.5]),
                          tag_rule="custom",
                          custom_tags=([0.0, 1.0], [0.0, 1.0]))
        J = right_sum(z_function(2), sm, p)
        assert operator_norm(J - C) <= 1e-12

    def test_single_cell(self, rng):
        C, _ = random_normal(rng, 4)
        sm = decompose_normal(C)
        p = GridPartition(np.array([-2.0, 2.0]), np.array([-2.0, 2.0]),
                          tag_rule="custom", custom_tags=([0.3], [-0.2]))
        F = z_function(4)
        expected = complex(0.3, -0.2) * np.eye(4)
        assert_allclose(right_sum(F, sm, p), expected, atol=1e-12)

    def test_left_constant(self, rng):
        C, _ = random_normal(rng, 5)
        sm = decompose_normal(C)
        p = GridPartition.uniform(Rect(-2.0, 0.1, -2.0, 2.0), 3, 3)
        from opint import measure_of_rect
        E = measure_of_rect(sm, Rect(-2.0, 0.1, -2.0, 2.0))
        J = left_sum(OperatorFunction.constant(np.eye(5)), sm, p)
        assert operator_norm(J - E) <= 1e-12

    def test_adjoint_duality_every_partition(self, rng):
        for _ in range(5):
            C, _ = random_normal(rng, 6)
            sm = decompose_normal(C)
            G_mat = random_complex(rng, 6, 3)

            def G_eval(lam, mu, M=G_mat):
                return complex(lam, mu) * M

            G = OperatorFunction(G_eval)
            G_star = OperatorFunction(lambda lam, mu: adjoint(G_eval(lam, mu)))
            for m, n in ((1, 1), (3, 2), (8, 8)):
                p = GridPartition.uniform(RECT, m, n)
                lhs = left_sum(G, sm, p)
                rhs = adjoint(right_sum(G_star, sm, p))
                scale = max(1.0, operator_norm(lhs))
                assert operator_norm(lhs - rhs) <= 1e-13 * scale

    def test_left_sum_range_inclusion(self, rng):
        C, _ = random_normal(rng, 6)
        sm = decompose_normal(C)
        rect = Rect(-2.0, 0.15, -2.0, 2.0)
        from opint import measure_of_rect
        E = measure_of_rect(sm, rect)
        p = GridPartition.uniform(rect, 4, 4)
        M = random_complex(rng, 6, 4)
        G = OperatorFunction(lambda lam, mu: (1.0 + lam - 2j * mu) * M)
        J = left_sum(G, sm, p)
        assert operator_norm((np.eye(6) - E) @ J) <= 1e-12

    def test_shape_mismatch(self, rng):
        from opint import ShapeMismatchError
        C, _ = random_normal(rng, 4)
        sm = decompose_normal(C)
        p = GridPartition.uniform(RECT, 2, 2)
        with pytest.raises(ShapeMismatchError):
            right_sum(OperatorFunction.constant(np.eye(3)), sm, p)

    def test_grid_lines_on_eigenvalues(self):
        # colliding lines get moved away but the lower-left tag stays at
        # the original corner, i.e. exactly on the eigenvalue
        C = np.diag([1.0, 1j])
        sm = decompose_normal(C)
        p = GridPartition.uniform(RECT, 4, 4)
        assert 1.0 in p.lambda_points and 0.0 in p.mu_points
        J = right_sum(z_function(2), sm, p)
        assert operator_norm(J - C) <= 1e-12

    def test_tag_independence_decays(self, rng):
        C, _ = random_normal(rng, 8)
        sm = decompose_normal(C)
        F = OperatorFunction(
            lambda lam, mu: (lam ** 2 + 1j * lam * mu) * np.eye(8))
        diffs = []
        for m in (4, 8, 16, 32, 64):
            lower = right_sum(F, sm, GridPartition.uniform(RECT, m, m))
            center = right_sum(
                F, sm, GridPartition.uniform(RECT, m, m, tag_rule="center"))
            diffs.append(operator_norm(lower - center))
        assert diffs[-1] <= 0.2 * diffs[0]
        assert diffs[-1] <= diffs[0]


class TestExactIntegrals:
    def test_reconstruction(self, rng):
        C, _ = random_normal(rng, 7)
        sm = decompose_normal(C)
        J = exact_right_integral(z_function(7), sm, RECT)
        assert operator_norm(J - C) <= 1e-12

    def test_empty_rect_is_zero(self, rng):
        C, _ = random_normal(rng, 4)
        sm = decompose_normal(C)
        J = exact_right_integral(z_function(4), sm, Rect(5.0, 6.0, 5.0, 6.0))
        assert operator_norm(J) == 0.0

    def test_boundary_eigenvalue_raises(self):
        sm = decompose_normal(np.diag([1.0, 1j]))
        with pytest.raises(BoundaryEigenvalueError):
            exact_right_integral(z_function(2), sm, Rect(0.0, 1.0, -1.0, 2.0))

    def test_left_integral_solves_sylvester(self, rng):
        # the left integral of D (A - z)^{-1} over a rect covering
        # spec(C) is the solution of XA - CX = D
        k, h = 5, 4
        C, _ = random_normal(rng, k)
        A, _ = random_normal(rng, h, re=(2.5, 4.0))
        D = random_complex(rng, k, h)
        sm = decompose_normal(C)
        G = OperatorFunction.resolvent_family(A, D)
        X = exact_left_integral(G, sm, RECT)
        oracle = solve_kronecker(SylvesterProblem(A, C, D)).X
        assert operator_norm(X - oracle) <= 1e-10 * max(1.0, operator_norm(oracle))


class TestIntegrateRight:
    def test_affine_matches_exact(self):
        sm = decompose_normal(np.diag([1.0, 1j]))
        F = OperatorFunction.affine(1.0, 2.0, 2)
        J, report = integrate_right(F, sm, RECT, tol=1e-12, max_levels=40)
        exact = exact_right_integral(F, sm, RECT)
        expected = sm.projections[np.argmin(np.abs(sm.eigenvalues - 1))] * 1.0 \
            + sm.projections[np.argmin(np.abs(sm.eigenvalues - 1j))] * 2.0
        assert report.converged
        assert operator_norm(J - exact) <= 1e-10
        assert operator_norm(J - expected) <= 1e-10

    def test_constant_converges_quickly_and_exactly(self, rng):
        C, _ = random_normal(rng, 5)
        sm = decompose_normal(C)
        J, report = integrate_right(OperatorFunction.constant(np.eye(5)),
                                    sm, RECT, tol=1e-14, max_levels=10)
        assert report.converged
        # Cauchy differences are zero up to summation-order roundoff;
        # the loop stops as soon as the zero streak has probed the tags
        assert math.isnan(report.levels[0][1])
        assert all(diff <= 1e-14 for _, diff in report.levels[1:])
        assert len(report.levels) <= 8
        assert operator_norm(J - np.eye(5)) <= 1e-12

    def test_resolvent_family_matches_exact(self, rng):
        k = 6
        C, _ = random_normal(rng, k)
        A, _ = random_normal(rng, k, re=(3.0, 4.0))
        D = random_complex(rng, 3, k)
        sm = decompose_normal(C)
        F = OperatorFunction.resolvent_family(A, D)
        rect = Rect(-1.2, 1.2, -1.2, 1.2)
        J, report = integrate_right(F, sm, rect, tol=2e-9, max_levels=50)
        exact = exact_right_integral(F, sm, rect)
        assert report.converged
        assert operator_norm(J - exact) <= 1e-8

    def test_no_convergence_carries_report(self, rng):
        C, _ = random_normal(rng, 4)
        sm = decompose_normal(C)
        # wildly oscillating integrand: tags keep landing on fresh values
        F = OperatorFunction(
            lambda lam, mu: np.sin(1e6 * lam + 1e5 * mu) * np.eye(4))
        with pytest.raises(NoConvergenceError) as err:
            integrate_right(F, sm, RECT, tol=1e-13, max_levels=6)
        assert err.value.report is not None
        assert not err.value.report.converged
        assert err.value.value is not None

    def test_max_levels_validated(self, rng):
        C, _ = random_normal(rng, 3)
        sm = decompose_normal(C)
        with pytest.raises(ValueError):
            integrate_right(OperatorFunction.constant(np.eye(3)), sm, RECT,
                            tol=1e-10, max_levels=1)


class TestLipschitz:
    def test_affine(self):
        F = OperatorFunction.affine(1.0, 2.0, 3)
        g1, g2 = estimate_lipschitz(F, Rect(0.0, 1.0, 0.0, 1.0), 5)
        assert g1 == pytest.approx(2.0, abs=1e-12)
        assert g2 == pytest.approx(0.0, abs=1e-12)

    def test_constant(self):
        F = OperatorFunction.constant(np.eye(2) * 3.7)
        assert estimate_lipschitz(F, RECT, 4) == (0.0, 0.0)

    def test_product_mixed_constant(self):
        F = OperatorFunction(lambda lam, mu: lam * mu * np.eye(2))
        g1, g2 = estimate_lipschitz(F, Rect(0.0, 1.0, 0.0, 1.0), 6)
        assert g2 == pytest.approx(1.0, abs=1e-12)

    def test_needs_three_samples(self):
        with pytest.raises(ValueError):
            estimate_lipschitz(OperatorFunction.constant(np.eye(2)), RECT, 2)


class TestLnest:
    def test_constant_on_unit_square(self):
        assert lnest_bound(1.0, 0.0, 0.0, Rect(0.0, 1.0, 0.0, 1.0)) == 4.0

    def test_zero_function(self):
        assert lnest_bound(0.0, 0.0, 0.0, RECT) == 0.0

    def test_affine_example(self):
        rect = Rect(0.0, 1.0, 0.0, 1.0)
        # sup |lam + 2 mu| = 3, gamma1 = 2, gamma2 = 0
        assert lnest_bound(3.0, 2.0, 0.0, rect) == pytest.approx(20.0)

    def test_bound_dominates_integral(self, rng):
        C, _ = random_normal(rng, 6)
        sm = decompose_normal(C)
        F = OperatorFunction.affine(1.0, 2.0, 6)
        J = exact_right_integral(F, sm, RECT)
        g1, g2 = estimate_lipschitz(F, RECT, 5)
        sup = max(abs(z.real + 2 * z.imag) for z in sm.eigenvalues)
        assert operator_norm(J) <= lnest_bound(sup, g1, g2, RECT)

    def test_bound_dominates_partition_sums(self, rng):
        # the bound holds for integral sums too, up to a mesh-size slack
        C, _ = random_normal(rng, 6)
        sm = decompose_normal(C)
        F = OperatorFunction.affine(1.0, 2.0, 6)
        sup = 2.0 + 2 * 2.0  # sup over the rectangle
        bound = lnest_bound(sup, F.gamma1, F.gamma2, RECT)
        for m in (2, 5, 16):
            p = GridPartition.uniform(RECT, m, m)
            slack = F.gamma1 * p.mesh
            assert operator_norm(right_sum(F, sm, p)) <= bound + slack

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            lnest_bound(-1.0, 0.0, 0.0, RECT)


class TestCZero:
    def test_constant_identity(self, rng):
        C, _ = random_normal(rng, 6)
        sm = decompose_normal(C)
        G = OperatorFunction.constant(np.eye(6))
        assert czero_check(G, sm, C, RECT) <= 1e-12

    def test_linear(self, rng):
        C, _ = random_normal(rng, 6)
        sm = decompose_normal(C)
        assert czero_check(z_function(6), sm, C, RECT) <= 1e-12

    def test_resolvent_type_family(self, rng):
        for _ in range(5):
            n = int(rng.integers(2, 21))
            C, _ = random_normal(rng, n)
            sm = decompose_normal(C)
            T = random_complex(rng, n, 3)
            G = OperatorFunction(lambda lam, mu, T=T:
                                 np.linalg.solve(
                                     5.0 * np.eye(n) - complex(lam, mu) * np.eye(n),
                                     T))
            scale = max(1.0, operator_norm(C))
            assert czero_check(G, sm, C, RECT) <= 1e-10 * scale

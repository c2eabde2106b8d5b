"""
Tests for the eigenvalue oracles.
"""

import numpy as np
from django.test import SimpleTestCase
from scipy import linalg

from graph_core import Graph, build_laplacian
from graph_core.generators import path_graph, random_graph
from recovery import QuantityOfInterest
from recovery.fixtures import random_instance

from .oracles import (
    FeasibilityContext,
    SpectralError,
    constrained_opnorm,
    feasibility_tolerance,
    is_feasible,
    max_generalized_eig,
    min_eig_constraint,
)


def random_psd(rng, size, rank=None):
    factor = rng.normal(size=(size, rank or size))
    return factor @ factor.T


def k2_context():
    bundle = build_laplacian(Graph.from_edges(2, [(0, 1, 1.0)]))
    return FeasibilityContext.build(bundle, [0], QuantityOfInterest.unlabeled())


class FeasibilityContextTest(SimpleTestCase):

    def test_gram_is_psd(self):
        rng = np.random.default_rng(1)
        instance = random_instance(rng, max_vertices=15)
        ctx = FeasibilityContext.build(instance.bundle, instance.obs, QuantityOfInterest.unlabeled())
        np.testing.assert_allclose(ctx.gram, ctx.gram.T)
        self.assertGreaterEqual(np.linalg.eigvalsh(ctx.gram)[0], -1e-12)

    def test_pencil_and_constraint(self):
        ctx = k2_context()
        np.testing.assert_allclose(ctx.pencil(0.5), [[1.0, -0.5], [-0.5, 0.5]])
        np.testing.assert_allclose(ctx.constraint_matrix(2, 2), [[4, -2], [-2, 1]])

    def test_dimension_mismatch(self):
        bundle = build_laplacian(path_graph(3))
        with self.assertRaises(SpectralError):
            FeasibilityContext.build(bundle, [0], np.ones((1, 4)))


class MinEigConstraintTest(SimpleTestCase):

    def test_zero_multipliers(self):
        rng = np.random.default_rng(2)
        instance = random_instance(rng, max_vertices=10)
        ctx = FeasibilityContext.build(instance.bundle, instance.obs, QuantityOfInterest.full())
        self.assertAlmostEqual(min_eig_constraint(ctx, 0.0, 0.0), -1.0)

    def test_k2_boundary_point(self):
        ctx = k2_context()
        self.assertAlmostEqual(min_eig_constraint(ctx, 2.0, 2.0), 0.0, places=12)
        self.assertTrue(is_feasible(ctx, 2.0, 2.0))
        self.assertFalse(is_feasible(ctx, 1.9, 2.0))

    def test_large_multipliers_dominate(self):
        ctx = k2_context()
        self.assertGreater(min_eig_constraint(ctx, 1e6, 1e6), 0.0)

    def test_rejects_negative_multipliers(self):
        with self.assertRaises(SpectralError):
            min_eig_constraint(k2_context(), -1.0, 1.0)

    def test_tolerance_formula(self):
        ctx = k2_context()
        self.assertAlmostEqual(feasibility_tolerance(ctx, 1.0, 3.0), 1e-9 * (1 + 2 + 3))

    def test_concave_along_segments(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            instance = random_instance(rng, max_vertices=12)
            ctx = FeasibilityContext.build(instance.bundle, instance.obs, QuantityOfInterest.unlabeled())
            first = rng.uniform(0, 5, size=2)
            second = rng.uniform(0, 5, size=2)
            middle = (first + second) / 2
            lower = min(min_eig_constraint(ctx, *first), min_eig_constraint(ctx, *second))
            self.assertGreaterEqual(min_eig_constraint(ctx, *middle), lower - 1e-9)


class MaxGeneralizedEigTest(SimpleTestCase):

    def test_identical_matrices(self):
        rng = np.random.default_rng(4)
        m = random_psd(rng, 6) + np.eye(6)
        self.assertAlmostEqual(max_generalized_eig(m, m), 1.0, places=10)

    def test_zero_numerator(self):
        self.assertEqual(max_generalized_eig(np.zeros((3, 3)), np.eye(3)), 0.0)

    def test_matches_whitening(self):
        rng = np.random.default_rng(5)
        a = random_psd(rng, 8)
        m = random_psd(rng, 8) + 0.5 * np.eye(8)
        values, vectors = np.linalg.eigh(m)
        inverse_root = (vectors / np.sqrt(values)) @ vectors.T
        expected = np.linalg.eigvalsh(inverse_root @ a @ inverse_root)[-1]
        self.assertLessEqual(abs(max_generalized_eig(a, m) - expected), 1e-10 * expected)

    def test_requires_positive_definite(self):
        with self.assertRaises(SpectralError):
            max_generalized_eig(np.eye(2), np.diag([1.0, 0.0]))

    def test_monotone_in_numerator(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            size = int(rng.integers(2, 10))
            a = random_psd(rng, size, rank=max(1, size // 2))
            m = random_psd(rng, size) + 0.1 * np.eye(size)
            bump = random_psd(rng, size, rank=1)
            self.assertGreaterEqual(
                max_generalized_eig(a + bump, m), max_generalized_eig(a, m) * (1 - 1e-10)
            )


class ConstrainedOpnormTest(SimpleTestCase):

    def test_square_root_has_unit_norm(self):
        rng = np.random.default_rng(7)
        bundle = build_laplacian(random_graph(rng, 12))
        self.assertAlmostEqual(constrained_opnorm(bundle.sqrt_laplacian, bundle), 1.0, places=10)

    def test_row_vector_formula(self):
        rng = np.random.default_rng(8)
        bundle = build_laplacian(random_graph(rng, 10))
        q = rng.normal(size=10)
        q -= q.mean()
        positive = bundle.positive_mask
        coefficients = bundle.eigenvectors[:, positive].T @ q
        expected = np.sqrt(np.sum(coefficients ** 2 / bundle.eigenvalues[positive]))
        self.assertAlmostEqual(constrained_opnorm(q, bundle), expected, places=10)

    def test_kernel_component_gives_infinity(self):
        bundle = build_laplacian(path_graph(4))
        self.assertEqual(constrained_opnorm(np.ones((1, 4)), bundle), float('inf'))

    def test_constants_unbounded_on_every_connected_graph(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            num_vertices = int(rng.integers(2, 13))
            bundle = build_laplacian(random_graph(rng, num_vertices, edge_probability=float(rng.uniform(0.1, 0.6))))
            self.assertEqual(bundle.kernel_basis.shape[1], 1)
            self.assertEqual(constrained_opnorm(np.ones((1, num_vertices)), bundle), float('inf'))
            average = np.full((1, num_vertices), 1.0 / num_vertices)
            self.assertEqual(constrained_opnorm(average, bundle), float('inf'))

    def test_matches_generalized_eigenvalue_route(self):
        rng = np.random.default_rng(9)
        bundle = build_laplacian(random_graph(rng, 9))
        b = rng.normal(size=(3, 9))
        b -= b.mean(axis=1, keepdims=True)
        # sup ||B f||^2 / <L f, f> on the complement of constants
        basis = linalg.null_space(np.ones((1, 9)))
        expected = np.sqrt(max_generalized_eig(
            basis.T @ b.T @ b @ basis, basis.T @ bundle.laplacian @ basis
        ))
        self.assertAlmostEqual(constrained_opnorm(b, bundle), expected, places=8)

"""
Property suites for parameter selection on random graphs.

These compare the selectors against brute-force oracles and sampled
signals; the heavier ones carry the slow marker.
"""

import numpy as np
import pytest
from django.test import SimpleTestCase
from scipy import optimize

from lwce_bound import enclosing_ball_center, sample_feasible_signals, sampled_lwce
from recovery import QuantityOfInterest, regularize, regularizer_matrix
from recovery.fixtures import consistent_instance, random_instance
from spectral import FeasibilityContext

from .global_select import solve_global
from .local_select import balance_terms, minimax_objective, solve_local


def brute_force_program(ctx, params, c_center, d_center, size=200, decades=2.0):
    """
    Smallest c eps^2 + d eta^2 over a log grid with c L + d Lambda^* Lambda - Q^* Q >= 0.

    Feasibility is tested with numpy's eigvalsh on an explicitly assembled
    matrix; for each c the smallest feasible d is found by bisection.
    """
    laplacian = ctx.bundle.laplacian
    selector = np.zeros(laplacian.shape[0])
    selector[ctx.labeled] = 1.0
    gram = ctx.qoi_matrix.T @ ctx.qoi_matrix

    def feasible(c, d):
        matrix = c * laplacian + d * np.diag(selector) - gram
        return np.linalg.eigvalsh(matrix)[0] >= -1e-12 * (1.0 + c + d)

    cs = np.logspace(np.log10(c_center) - decades, np.log10(c_center) + decades, size)
    ds = np.logspace(np.log10(d_center) - decades, np.log10(d_center) + decades, size)
    best = np.inf
    for c in cs:
        if not feasible(c, ds[-1]):
            continue
        low, high = -1, size - 1
        while high - low > 1:
            middle = (low + high) // 2
            if feasible(c, ds[middle]):
                high = middle
            else:
                low = middle
        best = min(best, c * params.epsilon ** 2 + ds[high] * params.eta ** 2)
    return best


def primal_maximum(bundle, labeled, qoi_matrix, params):
    """
    Direct search for max ||Q h||^2 over the two-ellipsoid intersection.

    Sweeps the top two generalized eigenvectors of (Q^* Q, (1-t) L / eps^2 +
    t Lambda^* Lambda / eta^2) over t, mixes them on an angle grid, scales each
    candidate into the intersection and polishes the best one with SLSQP.
    """
    laplacian = bundle.laplacian
    num_vertices = laplacian.shape[0]
    selector = np.zeros((num_vertices, num_vertices))
    selector[labeled, labeled] = 1.0
    gram = qoi_matrix.T @ qoi_matrix
    angles = np.linspace(0.0, np.pi, 181)

    best_value, best_h = 0.0, None
    for t in 1.0 / (1.0 + np.exp(-np.linspace(-12.0, 12.0, 401))):
        pencil = (1.0 - t) * laplacian / params.epsilon ** 2 + t * selector / params.eta ** 2
        root = np.linalg.cholesky(pencil)
        whitened = np.linalg.solve(root, np.linalg.solve(root, gram).T).T
        _, vectors = np.linalg.eigh((whitened + whitened.T) / 2)
        top = np.linalg.solve(root.T, vectors[:, -2:])
        mixes = np.outer(np.cos(angles), top[:, 1]) + np.outer(np.sin(angles), top[:, 0])
        energies = np.sqrt(np.einsum('ij,jk,ik->i', mixes, laplacian, mixes))
        labels = np.linalg.norm(mixes[:, labeled], axis=1)
        with np.errstate(divide='ignore'):
            scales = np.minimum(params.epsilon / energies, params.eta / labels)
        values = np.sum((mixes @ qoi_matrix.T) ** 2, axis=1) * scales ** 2
        index = int(np.argmax(values))
        if np.isfinite(values[index]) and values[index] > best_value:
            best_value, best_h = float(values[index]), scales[index] * mixes[index]

    constraints = [
        {'type': 'ineq', 'fun': lambda h: params.epsilon ** 2 - h @ laplacian @ h},
        {'type': 'ineq', 'fun': lambda h: params.eta ** 2 - np.sum(h[labeled] ** 2)},
    ]
    polished = optimize.minimize(
        lambda h: -np.sum((qoi_matrix @ h) ** 2), best_h, method='SLSQP', constraints=constraints,
    )
    if polished.success:
        h = polished.x
        inside = (
            h @ laplacian @ h <= params.epsilon ** 2 * (1 + 1e-9)
            and np.sum(h[labeled] ** 2) <= params.eta ** 2 * (1 + 1e-9)
        )
        if inside:
            best_value = max(best_value, float(np.sum((qoi_matrix @ h) ** 2)))
    return best_value


@pytest.mark.slow
class GlobalProgramAgainstGridTest(SimpleTestCase):
    """The reduction is never beaten by a brute-force grid."""

    def test_matches_brute_force_grid(self):
        rng = np.random.default_rng(41)
        q = QuantityOfInterest.unlabeled()
        for _ in range(50):
            instance = random_instance(rng, min_vertices=3, max_vertices=30)
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            solution = solve_global(bundle, obs, q, params)
            ctx = FeasibilityContext.build(bundle, obs.labeled, q)
            grid = brute_force_program(ctx, params, solution.c_flat, solution.d_flat)
            self.assertLessEqual(solution.gwce_sq_bound, grid * 1.005)

            matrix = solution.c_flat * bundle.laplacian - ctx.gram
            matrix[obs.labeled, obs.labeled] += solution.d_flat
            scale = 1.0 + solution.c_flat * bundle.lambda_max + solution.d_flat
            self.assertGreaterEqual(np.linalg.eigvalsh(matrix)[0], -1e-9 * scale)


class OptimalMapCertificateTest(SimpleTestCase):
    """
    For feasible (c, d) and tau = d / (c + d), the error of Q Delta_tau obeys
    ||Q(f - Delta_tau(Lambda f + e))||^2 <= c ||L^{1/2} f||^2 + d ||e||^2.
    """

    def test_error_split_inequality(self):
        rng = np.random.default_rng(42)
        q = QuantityOfInterest.unlabeled()
        for _ in range(20):
            instance = random_instance(rng, max_vertices=12)
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            solution = solve_global(bundle, obs, q, params)
            c, d = solution.c_flat, solution.d_flat
            qoi = FeasibilityContext.build(bundle, obs.labeled, q).qoi_matrix
            regularizer = regularizer_matrix(bundle, obs, solution.tau_flat)
            signals = rng.normal(size=(1000, bundle.num_vertices))
            noises = rng.normal(size=(1000, obs.num_labeled))
            estimates = (signals[:, obs.labeled] + noises) @ regularizer.T
            errors = np.sum(((signals - estimates) @ qoi.T) ** 2, axis=1)
            budgets = (
                c * np.einsum('ij,jk,ik->i', signals, bundle.laplacian, signals)
                + d * np.sum(noises ** 2, axis=1)
            )
            self.assertGreaterEqual(np.min(budgets - errors), -1e-8 * (1.0 + np.max(budgets)))

    def test_model_consistent_trials_meet_certificate(self):
        rng = np.random.default_rng(43)
        q = QuantityOfInterest.unlabeled()
        for _ in range(20):
            instance, f, e = consistent_instance(rng, random_instance(rng, max_vertices=12))
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            solution = solve_global(bundle, obs, q, params)
            qoi = FeasibilityContext.build(bundle, obs.labeled, q).qoi_matrix
            error = np.linalg.norm(qoi @ f - solution.recovery_matrix @ obs.values)
            self.assertLessEqual(error, solution.gwce_bound + 1e-8)


class ProgramLowerBoundTest(SimpleTestCase):
    """Every h in both ellipsoids has ||Q h||^2 below the program value."""

    def test_sampled_signals_stay_below_value(self):
        rng = np.random.default_rng(44)
        q = QuantityOfInterest.unlabeled()
        for _ in range(10):
            instance = random_instance(rng, max_vertices=10)
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            solution = solve_global(bundle, obs, q, params)
            qoi = FeasibilityContext.build(bundle, obs.labeled, q).qoi_matrix
            directions = rng.normal(size=(10000, bundle.num_vertices))
            energies = np.sqrt(np.einsum('ij,jk,ik->i', directions, bundle.laplacian, directions))
            labels = np.linalg.norm(directions[:, obs.labeled], axis=1)
            scales = np.minimum(params.epsilon / energies, params.eta / labels)
            values = np.sum((directions @ qoi.T) ** 2, axis=1) * scales ** 2
            self.assertLessEqual(np.max(values), solution.gwce_sq_bound * (1.0 + 1e-9))

    @pytest.mark.slow
    def test_direct_maximization_reaches_value(self):
        rng = np.random.default_rng(45)
        q = QuantityOfInterest.unlabeled()
        for _ in range(10):
            instance = random_instance(rng, min_vertices=3, max_vertices=8)
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            solution = solve_global(bundle, obs, q, params)
            qoi = FeasibilityContext.build(bundle, obs.labeled, q).qoi_matrix
            attained = primal_maximum(bundle, obs.labeled, qoi, params)
            self.assertLessEqual(attained, solution.gwce_sq_bound * (1.0 + 1e-6))
            self.assertGreaterEqual(attained, 0.98 * solution.gwce_sq_bound)


class OverestimatedBudgetsTest(SimpleTestCase):
    """Inflating the budgets by C costs at most a factor C^2 in the squared bound."""

    def test_bound_grows_at_most_quadratically(self):
        rng = np.random.default_rng(905)
        factor = 2.0
        for _ in range(20):
            instance = random_instance(rng)
            q = QuantityOfInterest.unlabeled()
            exact = solve_global(instance.bundle, instance.obs, q, instance.params)
            for epsilon_factor in (1.0, factor):
                with self.subTest(epsilon_factor=epsilon_factor):
                    over = solve_global(
                        instance.bundle, instance.obs, q,
                        instance.params.scaled(epsilon_factor=epsilon_factor, eta_factor=factor),
                    )
                    limit = factor ** 2 * exact.gwce_sq_bound
                    self.assertLessEqual(over.gwce_sq_bound, limit * (1.0 + 1e-9) + 1e-8)
                    self.assertGreaterEqual(over.gwce_sq_bound, exact.gwce_sq_bound * (1.0 - 1e-9))

    def test_scaling_both_budgets_is_exactly_quadratic(self):
        rng = np.random.default_rng(906)
        for _ in range(10):
            instance = random_instance(rng)
            q = QuantityOfInterest.full()
            exact = solve_global(instance.bundle, instance.obs, q, instance.params)
            over = solve_global(instance.bundle, instance.obs, q, instance.params.scaled(2.0, 2.0))
            self.assertAlmostEqual(over.gwce_sq_bound / exact.gwce_sq_bound, 4.0, places=5)
            self.assertAlmostEqual(over.tau_flat, exact.tau_flat, places=5)


class PsdLemmaTest(SimpleTestCase):
    """Block and product inequalities behind the optimality of Q Delta_tau."""

    def random_psd(self, rng, size, rank=None):
        factor = rng.normal(size=(size, rank or size)) / np.sqrt(size)
        return factor @ factor.T

    def test_block_difference_is_psd(self):
        rng = np.random.default_rng(46)
        for _ in range(500):
            size = int(rng.integers(2, 13))
            a = self.random_psd(rng, size)
            b = self.random_psd(rng, size)
            c = self.random_psd(rng, size, int(rng.integers(1, size + 1)))
            left = np.block([[a, np.zeros((size, size))], [np.zeros((size, size)), b]])
            right = np.block([[a - c, c], [c, b - c]])
            difference = left - right
            self.assertGreaterEqual(np.linalg.eigvalsh((difference + difference.T) / 2)[0], -1e-9)

    def test_product_is_psd(self):
        rng = np.random.default_rng(47)
        for _ in range(500):
            size = int(rng.integers(2, 13))
            a = self.random_psd(rng, size, int(rng.integers(1, size + 1)))
            b = self.random_psd(rng, size) + 0.1 * np.eye(size)
            product = a @ np.linalg.solve(a + b, b)
            self.assertGreaterEqual(np.linalg.eigvalsh((product + product.T) / 2)[0], -1e-9)

    def test_regularizer_product_is_psd(self):
        # c L (c L + d Lambda^* Lambda)^{-1} d Lambda^* Lambda = c L Delta_tau Lambda
        rng = np.random.default_rng(48)
        for _ in range(50):
            instance = random_instance(rng, max_vertices=12)
            bundle, obs = instance.bundle, instance.obs
            c, d = 10 ** rng.uniform(-1, 1, size=2)
            lifted = np.zeros((bundle.num_vertices, bundle.num_vertices))
            lifted[:, obs.labeled] = regularizer_matrix(bundle, obs, d / (c + d))
            product = c * bundle.laplacian @ lifted
            scale = 1.0 + c * bundle.lambda_max
            self.assertGreaterEqual(np.linalg.eigvalsh((product + product.T) / 2)[0], -1e-9 * scale)


class LocalSelectionPropertiesTest(SimpleTestCase):

    @pytest.mark.slow
    def test_balance_and_minimax(self):
        rng = np.random.default_rng(49)
        for _ in range(20):
            instance, _, _ = consistent_instance(rng, random_instance(rng, max_vertices=12))
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            solution = solve_local(bundle, obs, params)
            if solution.degenerate:
                continue
            self.assertLessEqual(solution.balance_residual, 1e-8 * (params.epsilon + params.eta))

            energy, misfit = balance_terms(bundle, obs, solution.f_hat)
            self.assertLessEqual(energy, params.epsilon + 1e-8)
            self.assertLessEqual(misfit, params.eta + 1e-8)

            grid = [
                minimax_objective(bundle, obs, params, regularize(bundle, obs, tau))
                for tau in np.linspace(1e-4, 1 - 1e-4, 10000)
            ]
            self.assertLessEqual(solution.minimax_value, min(grid) + 1e-8 * (1.0 + min(grid)))

    @pytest.mark.slow
    def test_within_factor_two_of_sampled_center(self):
        rng = np.random.default_rng(50)
        q = QuantityOfInterest.unlabeled()
        for _ in range(10):
            instance, _, _ = consistent_instance(rng, random_instance(rng, min_vertices=3, max_vertices=6))
            bundle, obs, params = instance.bundle, instance.obs, instance.params
            solution = solve_local(bundle, obs, params)
            qoi = FeasibilityContext.build(bundle, obs.labeled, q).qoi_matrix
            samples = sample_feasible_signals(bundle, obs, params, 100000, rng, center=solution.f_hat)
            samples = np.vstack([solution.f_hat[None, :], samples])
            _, radius = enclosing_ball_center(samples @ qoi.T)
            at_estimate = sampled_lwce(samples, qoi, qoi @ solution.f_hat)
            self.assertLessEqual(at_estimate, 2.1 * radius + 1e-12)

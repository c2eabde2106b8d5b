"""
Property suites for the regularization path on random graphs.
"""

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from .fixtures import random_instance
from .regularization import Observation, regularize


class RegularizationPathMonotonicityTest(SimpleTestCase):
    """
    Along tau, the energy of f_tau grows while the label misfit shrinks.
    """

    def test_energy_and_misfit_are_monotone(self):
        rng = np.random.default_rng(8)
        taus = np.linspace(0.01, 0.99, 50)
        for _ in range(50):
            instance = random_instance(rng, max_vertices=20, connected=bool(rng.random() < 0.7))
            bundle, obs = instance.bundle, instance.obs
            energies = []
            misfits = []
            for tau in taus:
                f = regularize(bundle, obs, tau)
                energies.append(bundle.energy_norm(f))
                misfits.append(np.linalg.norm(obs.restrict(f) - obs.values))
            self.assertGreaterEqual(np.min(np.diff(energies)), -1e-10)
            self.assertLessEqual(np.max(np.diff(misfits)), 1e-10)


class RegularizationLinearityTest(SimpleTestCase):

    def test_linear_in_observations(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            instance = random_instance(rng, max_vertices=20)
            bundle, obs = instance.bundle, instance.obs
            tau = float(rng.uniform(0.05, 0.95))
            y1 = rng.normal(size=obs.num_labeled)
            y2 = rng.normal(size=obs.num_labeled)
            alpha, beta = rng.normal(size=2)
            combined = regularize(bundle, obs.with_values(alpha * y1 + beta * y2), tau)
            separate = (
                alpha * regularize(bundle, obs.with_values(y1), tau)
                + beta * regularize(bundle, obs.with_values(y2), tau)
            )
            self.assertLessEqual(np.max(np.abs(combined - separate)), 1e-9)

    def test_component_constants_reproduced(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            instance = random_instance(rng, max_vertices=16, connected=False)
            bundle = instance.bundle
            levels = rng.normal(size=bundle.num_components)
            signal = levels[bundle.component_of]
            obs = Observation(instance.obs.labeled, signal[instance.obs.labeled])
            for tau in (0.05, 0.5, 0.95):
                assert_allclose(regularize(bundle, obs, tau), signal, atol=1e-8)

import itertools
import math
import unittest
from unittest.mock import patch

import numpy as np

import packages.sdk.src as Shaper

Mixture = Shaper.Mixture
Rates = Shaper.Rates
NOISE = Mixture.NoiseModel(1.0)
GAUSS_BITS = 0.5 * math.log2(2 * math.pi * math.e)


def constellations(k, m, peak=1.0):
    return Shaper.Constellation.shared_constellations(k, m, peak)


def brute_force(h_k, W, cons, P, users):
    gains = h_k @ W
    means, weights = [], []
    for combo in itertools.product(range(P.shape[1]), repeat=len(users)):
        means.append(sum(gains[i] * cons[i].amplitudes[m] for i, m in zip(users, combo)))
        weights.append(np.prod([P[i, m] for i, m in zip(users, combo)]))
    order = np.lexsort((np.array(weights), np.array(means)))
    return np.array(means)[order], np.array(weights)[order]


def sorted_mixture(mix):
    order = np.lexsort((mix.weights, mix.means))
    return mix.means[order], mix.weights[order]


class TestMixtures(unittest.TestCase):

    def test_single_user_collapse(self):
        mix = Mixture.mixture_signal(np.array([2.0]), np.array([[1.5]]), constellations(1, 2), np.full((1, 2), 0.5), 1.0)
        np.testing.assert_allclose(np.sort(mix.means), [-3.0, 3.0])
        np.testing.assert_allclose(mix.weights, [0.5, 0.5])

    def test_two_users_binary(self):
        rng = np.random.default_rng(0)
        mix = Mixture.mixture_signal(rng.random(3), rng.normal(size=(3, 2)), constellations(2, 2),
                                     rng.dirichlet(np.ones(2), size=2), 1.0)
        self.assertEqual(mix.size, 4)
        self.assertAlmostEqual(mix.weights.sum(), 1.0, places=12)

    def test_signal_matches_enumeration(self):
        rng = np.random.default_rng(1)
        h, W, P = rng.random(4), rng.normal(size=(4, 2)), rng.dirichlet(np.ones(4), size=2)
        cons = constellations(2, 4, 1.7)
        means, weights = sorted_mixture(Mixture.mixture_signal(h, W, cons, P, 1.0))
        bf_means, bf_weights = brute_force(h, W, cons, P, [0, 1])
        np.testing.assert_allclose(means, bf_means, atol=1e-12)
        np.testing.assert_allclose(weights, bf_weights, atol=1e-12)

    def test_interference_single_user_is_noise(self):
        mix = Mixture.mixture_interference(np.array([1.0]), np.array([[1.0]]), constellations(1, 4),
                                           np.full((1, 4), 0.25), 1.0, 0)
        np.testing.assert_array_equal(mix.means, [0.0])
        np.testing.assert_array_equal(mix.weights, [1.0])

    def test_interference_two_users(self):
        mix = Mixture.mixture_interference(np.array([1.0, 1.0]), np.eye(2), constellations(2, 2),
                                           np.full((2, 2), 0.5), 1.0, 0)
        self.assertEqual(mix.size, 2)
        np.testing.assert_allclose(mix.weights, [0.5, 0.5])

    def test_interference_matches_enumeration(self):
        rng = np.random.default_rng(2)
        h, W, P = rng.random(3), rng.normal(size=(3, 3)), rng.dirichlet(np.ones(2), size=3)
        cons = constellations(3, 2)
        means, weights = sorted_mixture(Mixture.mixture_interference(h, W, cons, P, 1.0, 1))
        bf_means, bf_weights = brute_force(h, W, cons, P, [0, 2])
        self.assertEqual(means.size, 4)
        np.testing.assert_allclose(means, bf_means, atol=1e-12)
        np.testing.assert_allclose(weights, bf_weights, atol=1e-12)

    def test_component_cap(self):
        Shaper.init({"component_cap": 8})
        try:
            with self.assertRaises(Shaper.Errors.ComponentCapError):
                Mixture.mixture_signal(np.ones(2), np.eye(2), constellations(2, 4), np.full((2, 4), 0.25), 1.0)
        finally:
            Shaper.init()


class TestQuadrature(unittest.TestCase):

    def test_auto_grid_zero_mean(self):
        grid = Mixture.auto_grid(Mixture.GaussianMixture([0.0], [1.0], 1.0), points_per_sigma=10)
        self.assertAlmostEqual(grid.lo, -8.0)
        self.assertAlmostEqual(grid.hi, 8.0)
        self.assertAlmostEqual(grid.delta, 0.1)
        self.assertEqual(grid.n_points, 160)

    def test_auto_grid_two_means(self):
        grid = Mixture.auto_grid(Mixture.GaussianMixture([-3.0, 3.0], [0.5, 0.5], 1.0))
        self.assertAlmostEqual(grid.lo, -11.0)
        self.assertAlmostEqual(grid.hi, 11.0)

    def test_auto_grid_rejects_coarse_step(self):
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Mixture.auto_grid(Mixture.GaussianMixture([0.0], [1.0], 1.0), points_per_sigma=3)

    def test_gaussian_entropy(self):
        mix = Mixture.GaussianMixture([0.0], [1.0], 1.0)
        self.assertLess(abs(Mixture.differential_entropy(mix, Mixture.grid_for(mix)) - GAUSS_BITS), 1e-4)

    def test_separated_components_add_one_bit(self):
        mix = Mixture.GaussianMixture([-10.0, 10.0], [0.5, 0.5], 1.0)
        value = Mixture.differential_entropy(mix, Mixture.grid_for(mix))
        self.assertLess(abs(value - GAUSS_BITS - 1.0), 1e-4)

    def test_random_mixture_against_monte_carlo(self):
        rng = np.random.default_rng(7)
        mix = Mixture.GaussianMixture(rng.uniform(-4, 4, 8), rng.dirichlet(np.ones(8)), 1.0)
        riemann = Mixture.differential_entropy(mix, Mixture.grid_for(mix))
        self.assertLess(abs(riemann - Shaper.Oracle.monte_carlo_entropy(mix, 10 ** 6, seed=1)), 1e-2)

    def test_grid_refinement(self):
        mix = Mixture.GaussianMixture([-2.0, 0.5, 3.0], [0.2, 0.5, 0.3], 1.0)
        policy = Mixture.GridPolicy()
        coarse = Mixture.differential_entropy(mix, Mixture.grid_for(mix, policy))
        fine = Mixture.differential_entropy(mix, Mixture.grid_for(mix, policy.refined(2)))
        self.assertLess(abs(coarse - fine), 1e-5)

    def test_uncovered_grid(self):
        mix = Mixture.GaussianMixture([0.0, 10.0], [0.5, 0.5], 1.0)
        with self.assertRaises(Shaper.Errors.GridCoverageError):
            Mixture.differential_entropy(mix, Mixture.QuadratureGrid(-8.0, 8.0, 256))

    def test_density_integrates_to_one(self):
        mix = Mixture.GaussianMixture([-1.0, 2.0], [0.3, 0.7], 0.5)
        grid = Mixture.grid_for(mix)
        self.assertAlmostEqual(float(mix.density(grid.points).sum() * grid.delta), 1.0, places=9)

    def test_chunked_density_matches_single_block(self):
        mix = Mixture.GaussianMixture(np.linspace(-5, 5, 64), np.full(64, 1 / 64), 1.0)
        y = np.linspace(-10, 10, 1001)
        full = mix.density(y)
        Shaper.init({"density_chunk": 64 * 7})
        try:
            np.testing.assert_allclose(mix.density(y), full, rtol=1e-14, atol=0)
        finally:
            Shaper.init()

    def test_binned_density_close_to_exact(self):
        rng = np.random.default_rng(12)
        mix = Mixture.GaussianMixture(rng.uniform(-20, 20, 256), rng.dirichlet(np.ones(256)), 1.0)
        grid = Mixture.grid_for(mix)
        exact = mix.density(grid.points)
        binned = Mixture.binned_density(mix, grid)
        np.testing.assert_allclose(binned, exact, rtol=0, atol=1e-3 * exact.max())
        self.assertAlmostEqual(float(binned.sum() * grid.delta), 1.0, places=9)
        self.assertLess(abs(Mixture.differential_entropy(mix, grid, binned=True)
                            - Mixture.differential_entropy(mix, grid)), 1e-3)

    def test_binned_density_of_mean_on_grid_point(self):
        mix = Mixture.GaussianMixture([0.0], [1.0], 1.0)
        grid = Mixture.QuadratureGrid(-8.0 - 1 / 32, 8.0 - 1 / 32, 256)
        np.testing.assert_allclose(Mixture.binned_density(mix, grid), mix.density(grid.points), rtol=1e-9, atol=1e-13)


class TestRates(unittest.TestCase):

    def test_zero_precoder(self):
        H = np.array([[1.0, 0.5], [0.3, 1.0]])
        cons = constellations(2, 4)
        P = Shaper.Constellation.uniform_pmf(2, 4)
        self.assertEqual(Rates.rate_general(H[0], np.zeros((2, 2)), cons, P, NOISE, None, 0), 0.0)
        self.assertEqual(Rates.sum_rate(H, np.zeros((2, 2)), cons, P, NOISE), 0.0)

    def test_zero_own_gain_skips_mixtures(self):
        H = np.array([[1.0, 0.5]])
        W = np.array([[0.0, 0.4], [0.0, 0.2]])
        with patch("packages.rate_engine.src.rates.mixture_signal") as signal:
            rate = Rates.rate_general(H[0], W, constellations(2, 4), Shaper.Constellation.uniform_pmf(2, 4), NOISE, None, 0)
        self.assertEqual(rate, 0.0)
        signal.assert_not_called()

    def test_binned_rate_close_to_exact(self):
        H = np.array([[0.9, 0.4], [0.3, 1.0]])
        W = np.array([[0.6, -0.3], [0.2, 0.7]])
        cons = constellations(2, 8, 4.0)
        P = np.random.default_rng(8).dirichlet(np.ones(8), size=2)
        binned = Mixture.GridPolicy(binned=True)
        for k in range(2):
            exact = Rates.rate_general(H[k], W, cons, P, NOISE, None, k)
            fast = Rates.rate_general(H[k], W, cons, P, NOISE, binned, k)
            self.assertAlmostEqual(fast, exact, delta=1e-3)

    def test_binary_saturation(self):
        P = np.full((1, 2), 0.5)
        general = Rates.rate_general(np.array([1.0]), np.array([[1.0]]), constellations(1, 2, 10.0), P, NOISE, None, 0)
        zf = Rates.rate_zf(10.0, Shaper.Constellation.Constellation(2, 1.0), P[0], NOISE)
        self.assertGreaterEqual(general, 0.99)
        self.assertGreaterEqual(zf, 0.99)
        self.assertLessEqual(zf, 1.0)

    def test_zf_zero_gain(self):
        self.assertEqual(Rates.rate_zf(0.0, Shaper.Constellation.Constellation(4, 1.0), np.full(4, 0.25), NOISE), 0.0)
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Rates.rate_zf(-1.0, Shaper.Constellation.Constellation(4, 1.0), np.full(4, 0.25), NOISE)

    def test_zf_rate_bounds(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            m = int(rng.integers(2, 9))
            p = rng.dirichlet(np.ones(m))
            gain = float(rng.uniform(0.1, 30.0))
            c = Shaper.Constellation.Constellation(m, 1.0)
            rate = Rates.rate_zf(gain, c, p, NOISE)
            self.assertGreaterEqual(rate, 0.0)
            self.assertLessEqual(rate, Shaper.Constellation.pmf_entropy(p) + 1e-6)
            raw = Rates.rate_zf(gain, c, p, NOISE, clamp=False)
            self.assertLess(max(0.0, -raw, raw - Shaper.Constellation.pmf_entropy(p)), 1e-3)

    def test_single_user_modes_agree(self):
        H = np.array([[0.8, 0.4, 0.1]])
        W = np.array([[0.5], [0.3], [-0.2]])
        cons = constellations(1, 4, 3.0)
        P = np.array([[0.1, 0.4, 0.4, 0.1]])
        general = Rates.sum_rate(H, W, cons, P, NOISE, "general")
        zf = Rates.sum_rate(H, W, cons, P, NOISE, "zf")
        self.assertLess(abs(general - zf), 1e-6)

    def test_unknown_mode(self):
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Rates.per_user_rates(np.ones((1, 1)), np.ones((1, 1)), constellations(1, 2), np.full((1, 2), 0.5), NOISE, "mmse")

    def test_rates_against_monte_carlo(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            k, m, n_t = int(rng.integers(1, 3)), int(rng.integers(2, 5)), 3
            H = rng.uniform(0.1, 1.0, size=(k, n_t))
            W = rng.uniform(-1.0 / k, 1.0 / k, size=(n_t, k))
            P = rng.dirichlet(np.ones(m), size=k)
            cons = constellations(k, m, float(rng.uniform(1.0, 8.0)))
            for user in range(k):
                riemann = Rates.rate_general(H[user], W, cons, P, NOISE, None, user, clamp=False)
                oracle = Shaper.Oracle.monte_carlo_rate(H[user], W, cons, P, NOISE, user, 2 * 10 ** 5, seed=user)
                self.assertLess(abs(riemann - oracle), 2e-2)

    def test_grid_refinement_on_rates(self):
        H = np.array([[0.9, 0.2], [0.1, 0.7]])
        W = np.array([[0.4, -0.1], [-0.2, 0.6]])
        cons = constellations(2, 4, 5.0)
        P = np.array([[0.1, 0.4, 0.3, 0.2], [0.25, 0.25, 0.25, 0.25]])
        policy = Mixture.GridPolicy()
        coarse = Rates.per_user_rates(H, W, cons, P, NOISE, "general", policy)
        fine = Rates.per_user_rates(H, W, cons, P, NOISE, "general", policy.refined(2))
        np.testing.assert_allclose(coarse, fine, atol=1e-4)


class TestZfRateShape(unittest.TestCase):

    def setUp(self):
        self.c = Shaper.Constellation.Constellation(4, 1.0)

    def test_rate_is_concave_in_pmf(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            p1, p2 = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
            theta = float(rng.uniform(0.05, 0.95))
            gain = float(rng.uniform(0.5, 6.0))
            mixed = Rates.rate_zf(gain, self.c, theta * p1 + (1 - theta) * p2, NOISE, clamp=False)
            chord = (theta * Rates.rate_zf(gain, self.c, p1, NOISE, clamp=False)
                     + (1 - theta) * Rates.rate_zf(gain, self.c, p2, NOISE, clamp=False))
            self.assertGreaterEqual(mixed, chord - 1e-6)

    def test_gradient_against_finite_differences(self):
        rng = np.random.default_rng(37)
        step = 1e-6
        for _ in range(10):
            p = rng.dirichlet(np.ones(4) * 3.0)
            gain = float(rng.uniform(0.5, 4.0))
            grad = Rates.rate_zf_gradient(gain, self.c, p, NOISE)
            i, j = rng.choice(4, size=2, replace=False)
            direction = np.zeros(4)
            direction[i], direction[j] = 1.0, -1.0
            numeric = (Rates.rate_zf(gain, self.c, p + step * direction, NOISE, clamp=False)
                       - Rates.rate_zf(gain, self.c, p - step * direction, NOISE, clamp=False)) / (2 * step)
            analytic = float(grad @ direction)
            self.assertLess(abs(numeric - analytic), 1e-4 * max(abs(analytic), 1e-2))


class TestPenaltyAndFitness(unittest.TestCase):

    def setUp(self):
        self.weights = Rates.PenaltyWeights()
        self.H = np.array([[0.9, 0.3], [0.2, 0.8]])
        self.problem = Rates.RateProblem(self.H, constellations(2, 2, 3.0), NOISE)

    def test_feasible_point_has_no_penalty(self):
        P = Shaper.Constellation.uniform_pmf(2, 4)
        W = np.array([[0.5, -0.5], [0.2, 0.3]])
        self.assertEqual(Rates.penalty(P, W, self.weights), 0.0)

    def test_precoder_row_excess(self):
        W = np.array([[1.0, 0.5], [0.1, 0.1]])
        self.assertAlmostEqual(Rates.penalty(np.full((2, 2), 0.5), W, self.weights), 2500.0)

    def test_negative_probability(self):
        P = np.array([[-0.1, 1.1], [0.5, 0.5]])
        weights = Rates.PenaltyWeights(lambda1=0, lambda2=1e4, lambda3=0, lambda4=0)
        self.assertAlmostEqual(Rates.penalty(P, np.zeros((2, 2)), weights), 100.0)

    def test_rejects_negative_weights(self):
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Rates.PenaltyWeights(lambda1=-1.0)

    def test_fitness_of_feasible_point_is_sum_rate(self):
        W = np.array([[0.6, -0.2], [-0.1, 0.7]])
        P = np.array([[0.3, 0.7], [0.5, 0.5]])
        self.assertEqual(Rates.fitness(P, W, self.problem), Rates.sum_rate(self.H, W, self.problem.constellations, P, NOISE))

    def test_large_violation_is_strongly_negative(self):
        W = np.full((2, 2), 5.0)
        self.assertLess(Rates.fitness(np.full((2, 2), 0.5), W, self.problem), -1e5)

    def test_feasible_beats_infeasible_with_equal_rate(self):
        W = np.array([[0.6, -0.2], [-0.1, 0.7]])
        P = np.array([[0.3, 0.7], [0.5, 0.5]])
        raw = np.array([[0.3, 0.7], [0.5, 0.5]]) * 1.2
        self.assertAlmostEqual(
            Rates.sum_rate(self.H, W, self.problem.constellations, Rates.sanitize_pmf(raw), NOISE),
            Rates.sum_rate(self.H, W, self.problem.constellations, P, NOISE), places=12)
        self.assertGreater(Rates.fitness(P, W, self.problem), Rates.fitness(raw, W, self.problem))

    def test_sanitize_pmf(self):
        P = np.array([[0.2, 0.8], [0.0, 0.0], [1.5, -0.5]])
        sanitized = Rates.sanitize_pmf(P)
        np.testing.assert_array_equal(sanitized[0], P[0])
        np.testing.assert_allclose(sanitized[1], [0.5, 0.5])
        np.testing.assert_allclose(sanitized[2], [1.0, 0.0])

    def test_rate_problem_rejects_negative_channel(self):
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Rates.RateProblem(np.array([[-1.0, 1.0]]), constellations(1, 2), NOISE)


if __name__ == "__main__":
    unittest.main()

import unittest

import numpy as np

import packages.sdk.src as Shaper


class TestPamAmplitudes(unittest.TestCase):

    def test_binary(self):
        np.testing.assert_allclose(Shaper.Constellation.pam_amplitudes(2, 1.0), [-1.0, 1.0], atol=1e-12)

    def test_eight_levels(self):
        expected = np.array([-7, -5, -3, -1, 1, 3, 5, 7]) / 7.0
        np.testing.assert_allclose(Shaper.Constellation.pam_amplitudes(8, 1.0), expected, atol=1e-12)

    def test_scaled_four_levels(self):
        np.testing.assert_allclose(
            Shaper.Constellation.pam_amplitudes(4, 0.5), [-0.5, -1 / 6, 1 / 6, 0.5], atol=1e-12
        )

    def test_symmetric_and_increasing(self):
        for m in (2, 3, 4, 8, 16):
            a = Shaper.Constellation.pam_amplitudes(m, 2.5)
            np.testing.assert_allclose(a, -a[::-1], atol=1e-12)
            self.assertTrue(np.all(np.diff(a) > 0))
            self.assertAlmostEqual(np.abs(a).max(), 2.5, places=12)

    def test_rejects_bad_arguments(self):
        for m, peak in ((1, 1.0), (4, 0.0), (4, -1.0), (2.5, 1.0)):
            with self.assertRaises(Shaper.Errors.InvalidInputError):
                Shaper.Constellation.pam_amplitudes(m, peak)

    def test_constellation_amplitudes_are_read_only(self):
        c = Shaper.Constellation.Constellation(4, 1.0)
        with self.assertRaises(ValueError):
            c.amplitudes[0] = 0.0


class TestPmf(unittest.TestCase):

    def test_uniform(self):
        np.testing.assert_array_equal(Shaper.Constellation.uniform_pmf(1, 4), [[0.25] * 4])
        P = Shaper.Constellation.uniform_pmf(2, 8)
        self.assertEqual(P.shape, (2, 8))
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-15)

    def test_entropy_examples(self):
        self.assertAlmostEqual(Shaper.Constellation.pmf_entropy([0.5, 0.5]), 1.0, places=12)
        self.assertEqual(Shaper.Constellation.pmf_entropy([1.0, 0.0, 0.0, 0.0]), 0.0)
        self.assertAlmostEqual(Shaper.Constellation.pmf_entropy(np.full(16, 1 / 16)), 4.0, places=12)

    def test_entropy_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            m = int(rng.integers(2, 17))
            h = Shaper.Constellation.pmf_entropy(rng.dirichlet(np.ones(m)))
            self.assertGreaterEqual(h, 0.0)
            self.assertLessEqual(h, np.log2(m) + 1e-12)

    def test_entropy_rejects_invalid_rows(self):
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Shaper.Constellation.pmf_entropy([0.6, 0.6])
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Shaper.Constellation.pmf_entropy([1.2, -0.2])

    def test_total_variation_and_active_symbols(self):
        p = np.array([0.5, 0.5, 0.0, 0.0])
        self.assertAlmostEqual(Shaper.Constellation.total_variation(p, np.full(4, 0.25)), 0.5)
        self.assertEqual(Shaper.Constellation.total_variation(np.full(4, 0.25), np.full(4, 0.25)), 0.0)
        self.assertEqual(Shaper.Constellation.active_symbols(p), 2)
        self.assertEqual(Shaper.Constellation.active_symbols([0.9995, 0.0005]), 1)


class TestSimplexProjection(unittest.TestCase):

    def test_known_projection(self):
        np.testing.assert_allclose(
            Shaper.Constellation.project_rows_to_simplex([[0.5, 0.5, 0.5]]), [[1 / 3] * 3], atol=1e-15
        )
        np.testing.assert_allclose(
            Shaper.Constellation.project_rows_to_simplex([[2.0, 0.0]]), [[1.0, 0.0]], atol=1e-15
        )

    def test_rows_land_on_simplex(self):
        rng = np.random.default_rng(11)
        V = rng.normal(size=(20, 6)) * 3.0
        Y = Shaper.Constellation.project_rows_to_simplex(V)
        self.assertTrue(np.all(Y >= 0))
        np.testing.assert_allclose(Y.sum(axis=1), 1.0, atol=1e-12)

    def test_points_on_simplex_are_fixed(self):
        P = np.random.default_rng(5).dirichlet(np.ones(5), size=4)
        np.testing.assert_allclose(Shaper.Constellation.project_rows_to_simplex(P), P, atol=1e-12)

    def test_repair_pmf(self):
        repaired = Shaper.Constellation.repair_pmf([[1.0, 0.0, -0.5]], floor=1e-6)
        self.assertTrue(np.all(repaired >= 1e-6 / (1 + 2e-6) - 1e-18))
        self.assertAlmostEqual(repaired.sum(), 1.0, places=15)


if __name__ == "__main__":
    unittest.main()

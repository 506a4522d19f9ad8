import math

import numpy as np
from django.test import SimpleTestCase

from robustness.core import (
    STREAM_ATTACK,
    STREAM_NETWORK,
    JointDegreeHistogram,
    MultiplexNetwork,
    RemovalMask,
    RngContract,
    average_histograms,
    default_k_max,
    joint_degree_histogram,
    moment,
    product_poisson_histogram,
)
from robustness.exceptions import ConfigError, HistogramError, NetworkValidationError, TruncationError


class RngContractTests(SimpleTestCase):
    def test_same_key_same_bits(self):
        a = RngContract(42).stream(3, STREAM_ATTACK).random(5)
        b = RngContract(42).stream(3, STREAM_ATTACK).random(5)
        np.testing.assert_array_equal(a, b)

    def test_purposes_and_runs_are_independent_streams(self):
        contract = RngContract(42)
        base = contract.stream(0, STREAM_NETWORK).random(4)
        self.assertFalse(np.array_equal(base, contract.stream(0, STREAM_ATTACK).random(4)))
        self.assertFalse(np.array_equal(base, contract.stream(1, STREAM_NETWORK).random(4)))
        self.assertFalse(np.array_equal(base, contract.stream(0, STREAM_NETWORK, 1).random(4)))

    def test_run_seed_is_stable_64_bit(self):
        seed = RngContract(7).run_seed(0)
        self.assertEqual(seed, RngContract(7).run_seed(0))
        self.assertTrue(0 <= seed < 2**64)
        self.assertNotEqual(seed, RngContract(7).run_seed(1))

    def test_seed_range(self):
        RngContract(0)
        RngContract(2**63 - 1)
        for bad in (-1, 2**63):
            with self.assertRaises(ConfigError):
                RngContract(bad)


class MultiplexNetworkTests(SimpleTestCase):
    def test_edges_canonicalized(self):
        net = MultiplexNetwork(3, ([(1, 0), (2, 1)], []))
        np.testing.assert_array_equal(net.layers[0], [[0, 1], [1, 2]])
        self.assertEqual(net.layers[1].shape, (0, 2))
        np.testing.assert_array_equal(net.degrees(), [[1, 2, 1], [0, 0, 0]])
        self.assertEqual(net.mean_degrees(), (4 / 3, 0.0))

    def test_rejects_bad_edges(self):
        with self.assertRaises(NetworkValidationError):
            MultiplexNetwork(2, ([(0, 2)],))
        with self.assertRaises(NetworkValidationError):
            MultiplexNetwork(2, ([(1, 1)],))
        with self.assertRaisesMessage(NetworkValidationError, "duplicate edge (0, 1)"):
            MultiplexNetwork(3, ([(0, 1), (1, 0)],))

    def test_layers_are_read_only(self):
        net = MultiplexNetwork(2, ([(0, 1)],))
        with self.assertRaises(ValueError):
            net.layers[0][0, 0] = 1

    def test_removal_mask_helpers(self):
        net = MultiplexNetwork(4, ([], []))
        empty = RemovalMask.empty(net)
        self.assertTrue(empty.matches(net))
        some = RemovalMask([[True, False, False, False], [True, True, False, False]])
        np.testing.assert_allclose(some.removed_fraction(), [0.25, 0.5])
        self.assertTrue(empty.issubset(some))
        self.assertFalse(some.issubset(empty))


class JointDegreeHistogramTests(SimpleTestCase):
    def test_single_edge_in_one_layer(self):
        net = MultiplexNetwork(2, ([(0, 1)], []))
        hist = joint_degree_histogram(net)
        self.assertEqual(hist.entries, {(1, 0): 1.0})
        self.assertEqual(hist.z, (1.0, 0.0))

    def test_triangle_in_both_layers(self):
        tri = [(0, 1), (1, 2), (0, 2)]
        hist = joint_degree_histogram(MultiplexNetwork(3, (tri, tri)))
        self.assertEqual(hist.entries, {(2, 2): 1.0})
        self.assertEqual(hist.z, (2.0, 2.0))

    def test_permutation_invariant(self):
        rng = np.random.default_rng(1)
        n = 30
        layers = []
        for _ in range(2):
            pairs = {tuple(sorted(p)) for p in rng.integers(0, n, size=(40, 2)).tolist() if p[0] != p[1]}
            layers.append(sorted(pairs))
        perm = rng.permutation(n)
        relabeled = [[(int(perm[u]), int(perm[w])) for u, w in layer] for layer in layers]
        a = joint_degree_histogram(MultiplexNetwork(n, tuple(layers)))
        b = joint_degree_histogram(MultiplexNetwork(n, tuple(relabeled)))
        self.assertEqual(a.entries, b.entries)

    def test_mass_and_z_checks(self):
        with self.assertRaises(HistogramError):
            JointDegreeHistogram.from_entries({(0, 0): 0.5})
        with self.assertRaises(HistogramError):
            JointDegreeHistogram(np.array([[1, 0]]), np.array([1.0]), z=(2.0, 0.0))
        with self.assertRaises(HistogramError):
            JointDegreeHistogram.from_entries({})

    def test_from_entries_merges_duplicates(self):
        hist = JointDegreeHistogram.from_entries({(1, 0): 0.25, (0, 1): 0.75})
        self.assertEqual(hist.marginal(0), {0: 0.75, 1: 0.25})
        self.assertEqual(hist.total_degree_distribution(), {1: 1.0})


class ProductPoissonTests(SimpleTestCase):
    def test_zero_means(self):
        self.assertEqual(product_poisson_histogram((0, 0)).entries, {(0, 0): 1.0})

    def test_origin_mass(self):
        hist = product_poisson_histogram((1, 1), k_max=30)
        self.assertAlmostEqual(hist.entries[(0, 0)], math.exp(-2), places=12)

    def test_stored_means(self):
        hist = product_poisson_histogram((2, 3), k_max=40)
        self.assertAlmostEqual(hist.z[0], 2.0, delta=1e-9)
        self.assertAlmostEqual(hist.z[1], 3.0, delta=1e-9)

    def test_factorial_moment(self):
        hist = product_poisson_histogram((2, 3))
        for i, z in enumerate((2.0, 3.0)):
            second = moment(hist, lambda k, i=i: k[:, i] ** 2 - k[:, i])
            self.assertAlmostEqual(second, z * z, delta=1e-8)

    def test_truncation_too_tight(self):
        with self.assertRaises(TruncationError) as ctx:
            product_poisson_histogram((5, 1), k_max=10)
        self.assertEqual(ctx.exception.layer, 0)

    def test_default_k_max(self):
        self.assertEqual(default_k_max(1), 30)
        self.assertEqual(default_k_max(16), 16 + 48)


class MomentTests(SimpleTestCase):
    def test_moments(self):
        hist = product_poisson_histogram((2, 3))
        self.assertAlmostEqual(moment(hist, lambda k: 1.0), 1.0, places=12)
        self.assertAlmostEqual(moment(hist, lambda k: k[:, 0]), 2.0, delta=1e-9)
        self.assertAlmostEqual(moment(hist, lambda k: k[:, 0] * k[:, 1]), 6.0, delta=1e-8)

    def test_average_histograms(self):
        a = JointDegreeHistogram.from_entries({(1, 1): 1.0})
        b = JointDegreeHistogram.from_entries({(1, 1): 0.5, (0, 2): 0.5})
        mixed = average_histograms([a, b])
        self.assertEqual(mixed.entries, {(0, 2): 0.25, (1, 1): 0.75})
        with self.assertRaises(HistogramError):
            average_histograms([])

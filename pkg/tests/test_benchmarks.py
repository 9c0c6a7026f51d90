import math

import numpy as np
import pytest

from eeihv.benchmarks import (
    BUILTIN_OBJECTIVES,
    ground_truth,
    make_objective,
    noise_wrapper,
    sample_average,
    synthetic_2d,
    synthetic_6d,
)
from eeihv.core import BoxBounds
from eeihv.numerics import rng_stream
from eeihv.pareto import hypervolume2d, pareto_filter


class TestSynthetic2d:
    def test_known_value(self):
        o1, _ = synthetic_2d(np.array([1 / 3, 0.0]), None, 0.0)
        np.testing.assert_allclose(o1, -56.0 + 10.0 / (8.0 * math.pi), rtol=1e-14)
        np.testing.assert_allclose(o1, -55.602, atol=1e-3)

    def test_second_objective_by_hand(self):
        b1, b2 = 15 * 0.5 - 5, 15 * 0.2
        cos_term = (1 - 1 / (8 * math.pi)) * math.cos(b1) + 1
        o2 = (
            math.sqrt(abs(10.5 - b1) * abs(b1 + 5.5) * abs(b2 + 0.5))
            + (b2 - 5.1 / (4 * math.pi**2) * b1**2 - 6) ** 2 / 30
            + cos_term / 3
        )
        np.testing.assert_allclose(synthetic_2d(np.array([0.5, 0.2]), None)[1], o2, rtol=1e-14)

    def test_noiseless_is_deterministic(self, rng):
        x = rng.uniform(size=(10, 2))
        np.testing.assert_array_equal(synthetic_2d(x, rng_stream(0), 0.0), synthetic_2d(x, rng_stream(1), 0.0))

    def test_shared_perturbation(self):
        # the same xi shifts both coordinates: equals the noiseless value at the shifted point
        x = np.array([[0.4, 0.6]])
        xi = rng_stream(3).standard_normal(1)
        noisy = synthetic_2d(x, rng_stream(3), 0.1)
        np.testing.assert_allclose(noisy, synthetic_2d(x + 0.1 * xi[0], None, 0.0))

    def test_monte_carlo_self_consistency(self):
        obj = make_objective("synthetic-2d", 0.1)
        x = np.array([0.3, 0.7])
        small = obj.batch(np.tile(x, (10_000, 1)), rng_stream(1))
        large = obj.batch(np.tile(x, (1_000_000, 1)), rng_stream(2))
        se = small.std(axis=0) / math.sqrt(10_000)
        assert np.all(np.abs(small.mean(axis=0) - large.mean(axis=0)) <= 3 * se)


class TestSynthetic6d:
    def test_g_vanishes_at_centre(self):
        x = np.array([0.3, 0.5, 0.5, 0.5, 0.5, 0.5])
        np.testing.assert_allclose(synthetic_6d(x, None, signs=(1, 1)), [0.15, 0.35], atol=1e-12)
        np.testing.assert_allclose(synthetic_6d(np.full(6, 0.5), None, signs=(1, 1)), [0.25, 0.25], atol=1e-12)

    def test_one_displaced_coordinate(self):
        # g = 100 * (5 + (0.25 - cos(pi)) + 4 * (0 - cos 0)) = 225
        x = np.array([0.5, 1.0, 0.5, 0.5, 0.5, 0.5])
        np.testing.assert_allclose(synthetic_6d(x, None, signs=(1, 1)), [0.25 * 226, 0.25 * 226], rtol=1e-13)

    def test_default_orientation_maximizes_negatives(self):
        x = np.array([0.3, 0.5, 0.5, 0.5, 0.5, 0.5])
        np.testing.assert_allclose(synthetic_6d(x, None), [-0.15, -0.35], atol=1e-12)

    def test_orientation_pins_analytic_front(self, rng):
        # at s = 0 the optimal designs have g = 0 and o1 + o2 = 1/2; under the default
        # orientation no random design may dominate them
        x1 = np.linspace(0, 1, 51)
        optimal = np.column_stack([x1, np.full((51, 5), 0.5)])
        best = synthetic_6d(optimal, None)
        np.testing.assert_allclose(best.sum(axis=1), -0.5, atol=1e-12)
        others = synthetic_6d(rng.uniform(size=(5000, 6)), None)
        front = pareto_filter(np.vstack([best, others]))
        np.testing.assert_allclose(front.sum(axis=1), -0.5, atol=1e-12)

    def test_independent_noise(self):
        x = np.full((200_000, 6), 0.5)
        out = make_objective("synthetic-6d", 0.01).batch(x, rng_stream(0))
        assert np.corrcoef(out.T)[0, 1] > 0.5  # shared g dominates
        assert np.all(out <= 0)


class TestNoiseWrapper:
    def test_zero_noise_passthrough(self, rng):
        base = lambda x: np.column_stack([x.sum(1), x[:, 0]])  # noqa: E731
        obj = noise_wrapper(base, 0.0, BoxBounds([1.0, 2.0], [3.0, 6.0]), 2)
        x = rng.uniform(size=(5, 2))
        np.testing.assert_allclose(obj.batch(x, rng), base([1.0, 2.0] + x * [2.0, 4.0]))

    def test_moments(self):
        obj = noise_wrapper(lambda x: x[:, :1], 0.05, BoxBounds.unit(2), 1)
        out = obj.batch(np.tile([0.5, 0.5], (100_000, 1)), rng_stream(4))[:, 0]
        assert abs(out.mean() - 0.5) <= 3 * out.std() / math.sqrt(out.size)
        np.testing.assert_allclose(out.std(), 0.05, rtol=0.02)

    def test_clamped_to_box(self):
        bounds = BoxBounds([7.2, 0.0], [7.5, 1.0])
        obj = noise_wrapper(lambda x: x, 0.3, bounds, 2)
        out = obj.batch(np.tile([1.0, 0.0], (5000, 1)), rng_stream(5))
        assert np.all(out >= bounds.lower) and np.all(out <= bounds.upper)

    def test_negative_noise(self):
        with pytest.raises(ValueError):
            noise_wrapper(lambda x: x, -0.1, BoxBounds.unit(1), 1)


class TestGroundTruth:
    def test_deterministic_objective(self):
        obj = make_objective("synthetic-2d", 0.0)
        gt = ground_truth(obj, 300, 1, seed=1)
        np.testing.assert_allclose(gt.front, pareto_filter(synthetic_2d(gt.designs, None)))
        np.testing.assert_allclose(synthetic_2d(gt.front_designs, None), gt.front)

    def test_single_design(self):
        gt = ground_truth(make_objective("synthetic-2d", 0.05), 1, 3, seed=2)
        assert gt.front.shape == (1, 2)

    def test_reproducible(self):
        obj = make_objective("synthetic-2d", 0.05)
        np.testing.assert_array_equal(ground_truth(obj, 500, 5, 3).front, ground_truth(obj, 500, 5, 3).front)

    def test_stable_across_seeds(self):
        obj = make_objective("synthetic-2d", 0.01)
        a = ground_truth(obj, 10_000, 100, seed=1)
        b = ground_truth(obj, 10_000, 100, seed=2)
        both = np.vstack([a.front, b.front])
        ref = both.min(axis=0) - 0.1 * np.ptp(both, axis=0)
        hv_a, hv_b = hypervolume2d(a.front, ref), hypervolume2d(b.front, ref)
        assert abs(hv_a - hv_b) <= 0.01 * max(hv_a, hv_b)

    def test_sample_average_streams(self):
        obj = make_objective("synthetic-2d", 0.1)
        x = np.array([[0.2, 0.3], [0.8, 0.1]])
        np.testing.assert_array_equal(sample_average(obj, x, 4, 9), sample_average(obj, x, 4, 9))

    def test_registry(self):
        assert set(BUILTIN_OBJECTIVES) == {"synthetic-2d", "synthetic-6d"}
        with pytest.raises(KeyError):
            make_objective("zdt1")

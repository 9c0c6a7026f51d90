import math

import numpy as np
import pytest
from scipy import integrate

from eeihv.numerics import (
    FactorizationError,
    bfgs_minimize,
    cholesky_factor,
    finite_diff_grad,
    norm_cdf,
    norm_pdf,
    rng_stream,
)


class TestCholesky:
    def test_identity(self):
        L, jitter = cholesky_factor(np.eye(4))
        np.testing.assert_array_equal(L, np.eye(4))
        assert jitter == 0.0

    def test_hand_computed(self):
        L, _ = cholesky_factor(np.array([[4.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(L, [[2.0, 0.0], [1.0, math.sqrt(2.0)]], atol=1e-15)

    def test_random_spd_reconstruction(self, rng):
        m = rng.normal(size=(20, 20))
        a = m.T @ m + np.eye(20)
        L, jitter = cholesky_factor(a)
        assert jitter == 0.0
        assert np.max(np.abs(L @ L.T - a)) < 1e-8

    def test_jitter_rescues_semidefinite(self):
        v = np.arange(1.0, 6.0)
        a = np.outer(v, v)  # rank one
        L, jitter = cholesky_factor(a)
        assert jitter > 0.0
        np.testing.assert_allclose(L @ L.T, a + jitter * np.eye(5), atol=1e-9)

    def test_indefinite_raises(self):
        with pytest.raises(FactorizationError):
            cholesky_factor(np.diag([1.0, -1.0]))


class TestBfgs:
    def test_quadratic_bowl(self, rng):
        c = rng.normal(size=3)
        res = bfgs_minimize(lambda x: float(np.sum((x - c) ** 2)), rng.normal(size=3) * 5)
        np.testing.assert_allclose(res.argmin, c, atol=1e-6)

    def test_rosenbrock(self):
        def f(x):
            return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2

        def g(x):
            return np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2), 200 * (x[1] - x[0] ** 2)])

        res = bfgs_minimize(f, [-1.2, 1.0], grad=g)
        np.testing.assert_allclose(res.argmin, [1.0, 1.0], atol=1e-4)
        assert res.value < 1e-8

    def test_constant(self):
        res = bfgs_minimize(lambda x: 4.0, [0.3, -0.7])
        np.testing.assert_array_equal(res.argmin, [0.3, -0.7])
        assert res.converged

    def test_bounds_respected(self):
        res = bfgs_minimize(lambda x: float(np.sum((x - 2.0) ** 2)), [0.5, 0.5], bounds=([0, 0], [1, 1]))
        np.testing.assert_allclose(res.argmin, [1.0, 1.0])

    def test_never_worse_than_start(self):
        f = lambda x: float(np.sin(5 * x[0]) + x[0] ** 2)  # noqa: E731
        res = bfgs_minimize(f, [0.9])
        assert res.value <= f(np.array([0.9]))

    def test_non_finite_start(self):
        with pytest.raises(ValueError):
            bfgs_minimize(lambda x: np.nan, [0.0])


class TestFiniteDifferences:
    def test_square(self):
        np.testing.assert_allclose(finite_diff_grad(lambda x: float(x[0] ** 2), np.array([3.0])), [6.0], atol=1e-6)

    def test_sine(self):
        np.testing.assert_allclose(finite_diff_grad(lambda x: float(np.sin(x[0])), np.array([0.0])), [1.0], atol=1e-8)

    def test_one_sided_fallback(self):
        f = lambda x: float(np.sqrt(x[0])) if x[0] >= 0 else np.nan  # noqa: E731
        g = finite_diff_grad(f, np.array([0.0]), h=1e-6)
        assert np.isfinite(g[0]) and g[0] > 0


class TestNormal:
    def test_cdf_at_zero(self):
        assert norm_cdf(0.0) == 0.5

    def test_pdf_at_zero(self):
        np.testing.assert_allclose(norm_pdf(0.0), 1.0 / math.sqrt(2 * math.pi), rtol=1e-15)
        np.testing.assert_allclose(norm_pdf(0.0), 0.3989422804, atol=1e-10)

    def test_cdf_against_quadrature(self):
        tail, _ = integrate.quad(lambda t: math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi), -np.inf, 1.96)
        np.testing.assert_allclose(norm_cdf(1.96), tail, rtol=1e-12)
        np.testing.assert_allclose(norm_cdf(1.96), 0.9750021, atol=1e-7)

    def test_far_tail(self):
        assert norm_cdf(-40.0) >= 0.0
        assert norm_cdf(40.0) == 1.0


class TestStreams:
    def test_reproducible(self):
        a = rng_stream(7, 1, 2).normal(size=5)
        b = rng_stream(7, 1, 2).normal(size=5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_keys(self):
        a = rng_stream(7, 1, 2).normal(size=5)
        b = rng_stream(7, 2, 1).normal(size=5)
        assert not np.allclose(a, b)

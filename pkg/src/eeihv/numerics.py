"""Numerical kernel: jittered Cholesky, bounded quasi-Newton, finite differences,
Gaussian CDF/PDF and reproducible RNG substreams."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

logger = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class FactorizationError(np.linalg.LinAlgError):
    """Raised when a matrix stays indefinite after the full jitter ladder."""


def rng_stream(seed: int, *stream_id: int) -> np.random.Generator:
    """Independent generator for ``(seed, *stream_id)``.

    Identical keys reproduce identical draws; distinct keys yield independent
    streams (``SeedSequence`` spawn keys).
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream_id)))


def cholesky_factor(a, min_rel_jitter: float = 1e-10, max_rel_jitter: float = 1e-4) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of a symmetric matrix, adding diagonal jitter if needed.

    The plain factorization is tried first. On failure the jitter climbs from
    ``min_rel_jitter * trace/n`` by factors of ten up to ``max_rel_jitter * trace/n``.

    Returns:
        ``(L, jitter)`` with ``L @ L.T == a + jitter * I``.

    Raises:
        FactorizationError: the matrix is still indefinite at the largest jitter.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n == 0:
        return np.zeros((0, 0)), 0.0
    try:
        return np.linalg.cholesky(a), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = max(np.trace(a) / n, np.finfo(float).tiny)
    jitter = min_rel_jitter * scale
    eye = np.eye(n)
    while jitter <= max_rel_jitter * scale * (1 + 1e-12):
        try:
            return np.linalg.cholesky(a + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise FactorizationError(f"matrix of size {n} is not positive definite after jitter {jitter / 10:.3g}")


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def norm_cdf(z):
    # ndtr uses erf/erfc internally and is accurate to double precision in both tails
    return special.ndtr(z)


def finite_diff_grad(f, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function.

    Coordinates whose stencil hits a non-finite value fall back to a one-sided
    difference on whichever side is finite (``nan`` if neither is).
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    f0 = None
    for i in range(x.size):
        step = np.zeros_like(x)
        step.flat[i] = h
        fp = f(x + step)
        fm = f(x - step)
        if np.isfinite(fp) and np.isfinite(fm):
            grad.flat[i] = (fp - fm) / (2 * h)
            continue
        if f0 is None:
            f0 = f(x)
        if np.isfinite(fp):
            grad.flat[i] = (fp - f0) / h
        elif np.isfinite(fm):
            grad.flat[i] = (f0 - fm) / h
        else:
            grad.flat[i] = np.nan
    return grad


@dataclass
class MinimizeResult:
    argmin: np.ndarray
    value: float
    converged: bool
    iterations: int


def bfgs_minimize(
    f,
    x0,
    grad=None,
    bounds=None,
    gtol: float = 1e-8,
    max_iter: int = 500,
    fd_step: float = 1e-5,
) -> MinimizeResult:
    """Minimize ``f`` with limited-memory BFGS, optionally inside box bounds.

    Box constraints are handled by projected-gradient steps. If ``grad`` is
    omitted, central finite differences with step ``fd_step`` are used; if it is
    ``True``, ``f`` returns ``(value, gradient)`` pairs. Non-finite
    objective values are treated as a failed step; the best finite point seen is
    always returned, so ``value <= f(x0)``.
    """
    x0 = np.asarray(x0, dtype=float).copy()
    if grad is True:
        value_and_grad = f
        f = lambda x: value_and_grad(x)[0]  # noqa: E731
    elif grad is None:
        def value_and_grad(x):
            return f(x), finite_diff_grad(f, x, fd_step)
    else:
        def value_and_grad(x):
            return f(x), grad(x)

    f0 = float(f(x0))
    if not np.isfinite(f0):
        raise ValueError("objective is not finite at the starting point")
    best = {"x": x0.copy(), "f": f0}

    def fun(x):
        val, g = value_and_grad(x)
        val = float(val)
        if not np.isfinite(val):
            return np.inf, np.zeros_like(x)
        if val < best["f"]:
            best["x"], best["f"] = x.copy(), val
        g = np.nan_to_num(np.asarray(g, dtype=float), nan=0.0, posinf=0.0, neginf=0.0)
        return val, g

    scipy_bounds = None
    if bounds is not None:
        lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), x0.shape) for b in bounds)
        scipy_bounds = list(zip(lo, hi))

    try:
        res = optimize.minimize(
            fun,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=scipy_bounds,
            options={"gtol": gtol, "ftol": 1e-15, "maxiter": max_iter},
        )
        converged, nit = bool(res.success), int(res.nit)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        logger.debug("line search aborted: %s", exc)
        converged, nit = False, 0
    return MinimizeResult(best["x"], best["f"], converged, nit)

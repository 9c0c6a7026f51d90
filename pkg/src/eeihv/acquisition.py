"""Expected hypervolume improvement for two objectives and its noisy-data variant.

For independent Gaussian predictions ``Y_i ~ N(mu_i, sigma_i^2)`` the expected
improvement of the dominated area factorizes over the vertical strips cut by the
sorted front::

    E[HVI] = sum_k [G1(a_{k-1}) - G1(a_k)] * G2(h_k)

where ``a_0 = r1``, ``a_k`` are the front abscissae (``a_{K+1} = inf``), ``h_k``
is the staircase height over strip ``k`` (``r2`` on the last strip) and
``G(a) = E[(Y - a)^+] = sigma * phi((a - mu)/sigma) + (mu - a) * Phi((mu - a)/sigma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import bfgs_minimize, norm_cdf, norm_pdf
from .pareto import UnsupportedDimensionError, pareto_filter


class AcquisitionError(RuntimeError):
    pass


def expected_excess(a, mu, sigma) -> np.ndarray:
    """``E[(Y - a)^+]`` for ``Y ~ N(mu, sigma^2)``; broadcasts, exact at ``sigma = 0``."""
    a = np.asarray(a, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    diff = mu - a
    pos = sigma > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        t = diff / np.where(pos, sigma, 1.0)
        smooth = sigma * norm_pdf(t) + diff * norm_cdf(t)
    out = np.where(pos, smooth, np.maximum(diff, 0.0))
    # a = +inf contributes nothing
    return np.where(np.isposinf(a), 0.0, out)


def _strip_geometry(front, r) -> tuple[np.ndarray, np.ndarray]:
    """Strip edges ``a_0..a_{K+1}`` and heights ``h_1..h_{K+1}`` of the non-dominated region."""
    pts = np.asarray(front, dtype=float).reshape(-1, 2)
    pts = pareto_filter(pts[np.all(pts >= r, axis=1)]) if pts.size else pts
    edges = np.r_[r[0], pts[:, 0], np.inf]
    heights = np.r_[pts[:, 1], r[1]]
    return edges, heights


def _eihv_strips(edges, heights, mu, sigma) -> np.ndarray:
    g1 = expected_excess(edges[None, :], mu[:, :1], sigma[:, :1])  # (q, K+2)
    g2 = expected_excess(heights[None, :], mu[:, 1:], sigma[:, 1:])  # (q, K+1)
    return np.maximum(np.sum((g1[:, :-1] - g1[:, 1:]) * g2, axis=1), 0.0)


def eihv_exact(front, r, mu, sigma):
    """Expected increase of the dominated area when adding one Gaussian point.

    Args:
        front: ``(k, 2)`` current points (filtered internally; points not
            dominating ``r`` are dropped since they attain nothing above ``r``).
        r: reference point.
        mu, sigma: predictive means and standard deviations, shape ``(2,)`` or
            ``(q, 2)`` for a batch of candidates.

    Returns:
        Scalar for a single candidate, ``(q,)`` array for a batch.
    """
    r = np.asarray(r, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if r.shape != (2,) or mu.shape[-1] != 2 or sigma.shape != mu.shape:
        raise UnsupportedDimensionError("closed-form EIHV is implemented for two objectives only")
    if np.any(sigma < 0):
        raise ValueError("predictive standard deviations must be non-negative")
    edges, heights = _strip_geometry(front, r)
    value = _eihv_strips(edges, heights, np.atleast_2d(mu), np.atleast_2d(sigma))
    return float(value[0]) if mu.ndim == 1 else value


@dataclass
class AcquisitionConfig:
    n_restarts: int = 20
    n_probe: int = 1000
    fd_step: float = 1e-5
    gtol: float = 1e-7
    max_iter: int = 200

    def __post_init__(self):
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")


class DenoisedEihv:
    """Lower bound of the extended expected hypervolume improvement.

    Works in the models' (standardized) target space: the current front is the
    Pareto set of posterior means at the training inputs, and the predictive
    at a candidate uses latent variance only.
    """

    def __init__(self, models, reference):
        if len(models) != 2:
            raise UnsupportedDimensionError("closed-form EIHV is implemented for two objectives only")
        self.models = list(models)
        self.reference = np.asarray(reference, dtype=float)
        self.denoised = np.column_stack([gp.denoised_targets() for gp in self.models])
        self.front = pareto_filter(self.denoised)
        self.dim = self.models[0].x.shape[1]
        self._edges, self._heights = _strip_geometry(self.front, self.reference)

    def predictive(self, x) -> tuple[np.ndarray, np.ndarray]:
        preds = [gp.predict(x) for gp in self.models]
        mu = np.column_stack([p.mean for p in preds])
        sigma = np.sqrt(np.column_stack([p.var_latent for p in preds]))
        return mu, sigma

    def __call__(self, x):
        """Acquisition value at one design (returns float) or a batch ``(q, d)``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        mu, sigma = self.predictive(np.atleast_2d(x))
        values = _eihv_strips(self._edges, self._heights, mu, sigma)
        return float(values[0]) if single else values

    def value_and_grad(self, x, h: float = 1e-5) -> tuple[float, np.ndarray]:
        """Value and central-difference gradient, evaluated as one batch."""
        x = np.asarray(x, dtype=float)
        steps = h * np.eye(self.dim)
        values = self(np.vstack([x, x + steps, x - steps]))
        grad = (values[1 : 1 + self.dim] - values[1 + self.dim :]) / (2.0 * h)
        return float(values[0]), grad


def eeihv_bar(x, models, reference):
    return DenoisedEihv(models, reference)(x)


def maximize_eeihv(acq: DenoisedEihv, config: AcquisitionConfig, rng: np.random.Generator):
    """Multi-start bounded BFGS ascent of the acquisition over the unit box.

    ``n_probe`` uniform designs are scored first and the ``n_restarts`` best
    become starting points; each start is then refined with central-difference
    gradients. Returns ``(x_best, value_best)``.
    """
    d = acq.dim
    probe = rng.uniform(size=(max(config.n_probe, config.n_restarts), d))
    scores = acq(probe)
    finite = np.isfinite(scores)
    if not np.any(finite):
        raise AcquisitionError("acquisition is non-finite at every probe point")
    scores = np.where(finite, scores, -np.inf)
    order = np.argsort(-scores, kind="stable")[: config.n_restarts]

    best_x, best_val = probe[order[0]].copy(), float(scores[order[0]])
    lo, hi = np.zeros(d), np.ones(d)
    for i in order:
        if not np.isfinite(scores[i]):
            continue
        if scores[i] <= 0.0:
            # flat zero region: no gradient signal to follow
            continue
        scale = float(scores[i])  # keeps gradients O(1) for tiny improvements

        def negated(z, scale=scale):
            val, grad = acq.value_and_grad(z, config.fd_step)
            return -val / scale, -grad / scale

        res = bfgs_minimize(negated, probe[i], grad=True, bounds=(lo, hi), gtol=config.gtol, max_iter=config.max_iter)
        x_new = np.clip(res.argmin, 0.0, 1.0)
        val_new = acq(x_new)
        if val_new > best_val:
            best_x, best_val = x_new, val_new
    return best_x, best_val


def hypervolume_improvement(front, r, y) -> np.ndarray:
    """Exact area gained by adding each row of ``y`` to ``front``.

    Geometric counterpart of :func:`eihv_exact` used for Monte-Carlo checks:
    the gain is the part of the box ``[r, y]`` not already dominated.
    """
    r = np.asarray(r, dtype=float)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    edges, heights = _strip_geometry(front, r)
    left = edges[None, :-1]
    right = np.minimum(edges[None, 1:], y[:, :1])
    width = np.maximum(right - left, 0.0)
    rise = np.maximum(y[:, 1:] - heights[None, :], 0.0)
    return np.sum(width * rise, axis=1)


def eihv_monte_carlo(front, r, mu, sigma, n_draws: int, rng: np.random.Generator, chunk: int = 200_000):
    """Sample mean and standard error of the hypervolume improvement."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_draws:
        k = min(chunk, n_draws - done)
        y = mu + sigma * rng.standard_normal((k, 2))
        gain = hypervolume_improvement(front, r, y)
        total += gain.sum()
        total_sq += (gain * gain).sum()
        done += k
    mean = total / n_draws
    var = max(total_sq / n_draws - mean * mean, 0.0)
    return mean, math.sqrt(var / n_draws)

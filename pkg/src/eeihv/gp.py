"""Gaussian-process surrogate for a single objective.

Zero prior mean, Matérn-3/2 covariance with one lengthscale per input
dimension, homoscedastic Gaussian noise. Hyperparameters are fitted by
maximizing the log marginal likelihood over their logarithms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .numerics import FactorizationError, bfgs_minimize, cholesky_factor

logger = logging.getLogger(__name__)

NOISE_FLOOR = 1e-6
_SQRT3 = math.sqrt(3.0)
_LOG_2PI = math.log(2.0 * math.pi)

# search box for log-hyperparameters on standardized targets and unit-box inputs
_LOG_SIGNAL_BOUNDS = (math.log(1e-3), math.log(1e2))
_LOG_LENGTH_BOUNDS = (math.log(1e-3), math.log(1e3))
_LOG_NOISE_BOUNDS = (math.log(NOISE_FLOOR), math.log(1e1))

# uniform initialization box for restarts
_INIT_SIGNAL = (math.log(0.1), math.log(2.0))
_INIT_LENGTH = (math.log(0.05), math.log(2.0))
_INIT_NOISE = (math.log(1e-3), math.log(1.0))


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    signal: float
    lengthscales: tuple
    noise_std: float

    def __post_init__(self):
        object.__setattr__(self, "lengthscales", tuple(float(v) for v in np.atleast_1d(self.lengthscales)))
        if not self.signal > 0 or not all(v > 0 for v in self.lengthscales):
            raise ValueError("signal and lengthscales must be strictly positive")
        if not self.noise_std >= 0:
            raise ValueError("noise_std must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.lengthscales)

    def to_log_vector(self) -> np.ndarray:
        noise = max(self.noise_std, NOISE_FLOOR)
        return np.log(np.r_[self.signal, self.lengthscales, noise])

    @classmethod
    def from_log_vector(cls, theta) -> "Hyperparams":
        theta = np.asarray(theta, dtype=float)
        return cls(float(np.exp(theta[0])), tuple(np.exp(theta[1:-1])), float(np.exp(theta[-1])))

    def to_dict(self) -> dict:
        return {"signal": self.signal, "lengthscales": list(self.lengthscales), "noise_std": self.noise_std}

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperparams":
        return cls(data["signal"], tuple(data["lengthscales"]), data["noise_std"])


def _scaled_sq_dist(x1, x2, lengthscales) -> np.ndarray:
    a = np.atleast_2d(x1) / lengthscales
    b = np.atleast_2d(x2) / lengthscales
    d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d2, 0.0)


def matern32(x1, x2, hp: Hyperparams) -> np.ndarray:
    """Matérn-3/2 covariance matrix between the rows of ``x1`` and ``x2``.

    ``k = s^2 (1 + sqrt(3 r^2)) exp(-sqrt(3 r^2))`` with ``r^2`` the
    lengthscale-weighted squared distance. Single points may be passed as 1-D arrays.
    """
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    if x1.shape[1] != hp.dim or x2.shape[1] != hp.dim:
        raise ValueError(f"inputs must have {hp.dim} columns")
    a = _SQRT3 * np.sqrt(_scaled_sq_dist(x1, x2, np.asarray(hp.lengthscales)))
    return hp.signal**2 * (1.0 + a) * np.exp(-a)


@dataclass
class PointPrediction:
    mean: np.ndarray
    var_latent: np.ndarray
    var_observation: np.ndarray


class GpModel:
    """Conditioned GP with a cached factorization of ``K + noise^2 I``."""

    def __init__(self, x, y, hp: Hyperparams):
        self.x = np.atleast_2d(np.asarray(x, dtype=float))
        self.y = np.asarray(y, dtype=float).ravel()
        if self.x.shape[0] != self.y.size or self.y.size < 1:
            raise ValueError("need at least one training point and matching x, y")
        if self.x.shape[1] != hp.dim:
            raise ValueError(f"hyperparameters are for d={hp.dim}, data has d={self.x.shape[1]}")
        self.hp = hp
        ky = matern32(self.x, self.x, hp) + hp.noise_std**2 * np.eye(self.y.size)
        self.chol, self.jitter = cholesky_factor(ky)
        self.alpha = linalg.cho_solve((self.chol, True), self.y)

    @property
    def n(self) -> int:
        return self.y.size

    def log_marginal_likelihood(self) -> float:
        fit = -0.5 * float(self.y @ self.alpha)
        logdet = 2.0 * float(np.log(np.diag(self.chol)).sum())
        return fit - 0.5 * logdet - 0.5 * self.n * _LOG_2PI

    def _cross(self, xq):
        xq = np.atleast_2d(np.asarray(xq, dtype=float))
        if xq.shape[1] != self.hp.dim:
            raise ValueError(f"query points must have {self.hp.dim} columns")
        return xq, matern32(xq, self.x, self.hp)

    def posterior(self, xq) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean vector and full covariance matrix at the query points."""
        xq, kx = self._cross(xq)
        mean = kx @ self.alpha
        v = linalg.solve_triangular(self.chol, kx.T, lower=True)
        cov = matern32(xq, xq, self.hp) - v.T @ v
        cov = 0.5 * (cov + cov.T)
        np.fill_diagonal(cov, np.maximum(np.diag(cov), 0.0))
        return mean, cov

    def predict(self, xq) -> PointPrediction:
        """Marginal predictive moments; cheaper than :meth:`posterior` for many points."""
        xq, kx = self._cross(xq)
        mean = kx @ self.alpha
        v = linalg.solve_triangular(self.chol, kx.T, lower=True)
        var = np.maximum(self.hp.signal**2 - (v * v).sum(0), 0.0)
        return PointPrediction(mean, var, var + self.hp.noise_std**2)

    def denoised_targets(self) -> np.ndarray:
        """Posterior mean at the training inputs."""
        return self.predict(self.x).mean

    def sample_posterior(self, xq, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Joint draw(s) of the latent function at ``xq``.

        Returns shape ``(len(xq),)`` for ``size=None`` or ``(size, len(xq))``.
        """
        mean, cov = self.posterior(xq)
        factor = posterior_sampling_factor(cov)
        k = 1 if size is None else size
        z = rng.standard_normal((k, mean.size))
        draws = mean + z @ factor.T
        return draws[0] if size is None else draws


def posterior_sampling_factor(cov) -> np.ndarray:
    """Square-root factor of a PSD covariance suitable for drawing samples."""
    cov = np.asarray(cov, dtype=float)
    if not np.any(cov):
        return np.zeros_like(cov)
    try:
        factor, _ = cholesky_factor(cov, min_rel_jitter=1e-10, max_rel_jitter=1e-6)
        return factor
    except FactorizationError:
        # rank-deficient posteriors: symmetric square root via eigendecomposition
        w, q = np.linalg.eigh(cov)
        return q * np.sqrt(np.clip(w, 0.0, None))


def _neg_lml_and_grad(theta, x, y, sq_diffs):
    """Negative log marginal likelihood and its gradient w.r.t. log-hyperparameters."""
    s2 = math.exp(2.0 * theta[0])
    ell = np.exp(theta[1:-1])
    nu2 = math.exp(2.0 * theta[-1])
    n = y.size
    scaled = sq_diffs / (ell * ell)  # (n, n, d)
    r2 = scaled.sum(-1)
    a = _SQRT3 * np.sqrt(r2)
    ea = np.exp(-a)
    k = s2 * (1.0 + a) * ea
    ky = k + nu2 * np.eye(n)
    try:
        chol, jitter = cholesky_factor(ky)
    except FactorizationError:
        return np.inf, np.zeros_like(theta)
    alpha = linalg.cho_solve((chol, True), y)
    nll = 0.5 * y @ alpha + np.log(np.diag(chol)).sum() + 0.5 * n * _LOG_2PI
    w = np.outer(alpha, alpha) - linalg.cho_solve((chol, True), np.eye(n))
    grad = np.empty_like(theta)
    grad[0] = -0.5 * np.sum(w * (2.0 * k))
    dk_dell = 3.0 * s2 * ea[..., None] * scaled  # d k / d log(ell_j)
    grad[1:-1] = -0.5 * np.einsum("ij,ijk->k", w, dk_dell)
    grad[-1] = -0.5 * np.trace(w) * 2.0 * nu2
    return nll, grad


def log_marginal_likelihood(x, y, hp: Hyperparams) -> float:
    return GpModel(x, y, hp).log_marginal_likelihood()


def _log_bounds(d: int):
    return [_LOG_SIGNAL_BOUNDS] + [_LOG_LENGTH_BOUNDS] * d + [_LOG_NOISE_BOUNDS]


def train(
    x,
    y,
    rng: np.random.Generator,
    restarts: int = 10,
    init: Hyperparams | None = None,
) -> GpModel:
    """Fit hyperparameters by multi-restart maximum likelihood.

    Restarts begin from log-uniform draws; ``init``, if given, replaces the first
    draw (used to warm-start from the previous iteration). The model with the
    highest likelihood over all restarts is returned.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = x.shape
    if n < 2:
        raise ValueError("training needs at least two observations")
    sq_diffs = (x[:, None, :] - x[None, :, :]) ** 2
    bounds = np.array(_log_bounds(d))

    starts = []
    for i in range(max(restarts, 1)):
        draw = np.r_[
            rng.uniform(*_INIT_SIGNAL),
            rng.uniform(*_INIT_LENGTH, size=d),
            rng.uniform(*_INIT_NOISE),
        ]
        if i == 0 and init is not None:
            draw = np.clip(init.to_log_vector(), bounds[:, 0], bounds[:, 1])
        starts.append(draw)

    def fg(theta):
        return _neg_lml_and_grad(theta, x, y, sq_diffs)

    best_theta, best_val = None, np.inf
    for theta0 in starts:
        f0, _ = fg(theta0)
        if not np.isfinite(f0):
            continue
        res = bfgs_minimize(
            fg,
            theta0,
            grad=True,
            bounds=(bounds[:, 0], bounds[:, 1]),
            gtol=1e-6,
            max_iter=200,
        )
        if res.value < best_val:
            best_theta, best_val = res.argmin, res.value
    if best_theta is None:
        raise TrainingError("every restart failed to factorize the covariance matrix")
    return GpModel(x, y, Hyperparams.from_log_vector(best_theta))

"""Stochastic test problems, design-noise wrapper and brute-force ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import BoxBounds, affine_map
from .numerics import rng_stream
from .pareto import pareto_indices

_BRANIN_B = 5.1 / (4.0 * math.pi**2)
_BRANIN_C = 5.0 / math.pi
_BRANIN_T = 1.0 / (8.0 * math.pi)


@dataclass
class StochasticObjective:
    """Noisy vector objective over the unit box, maximization convention.

    ``batch(x, rng)`` maps an ``(n, d)`` array of designs to ``(n, m)`` noisy
    measurements; all randomness is drawn from ``rng``.
    """

    name: str
    dim: int
    n_objectives: int
    batch: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    params: dict = field(default_factory=dict)

    def evaluate(self, x, rng: np.random.Generator) -> np.ndarray:
        return self.batch(np.asarray(x, dtype=float).reshape(1, self.dim), rng)[0]

    def __call__(self, x, rng: np.random.Generator) -> np.ndarray:
        return self.evaluate(x, rng)


def synthetic_2d(x, rng: np.random.Generator | None, s: float = 0.0) -> np.ndarray:
    """Two-objective Branin-type problem with a single shared input perturbation.

    Accepts one design ``(2,)`` or a batch ``(n, 2)``; one ``xi`` is drawn per
    design and shifts both coordinates. Both outputs are maximized as written.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    xi = rng.standard_normal(x.shape[0]) if s > 0 else np.zeros(x.shape[0])
    b1 = 15.0 * (x[:, 0] + s * xi) - 5.0
    b2 = 15.0 * (x[:, 1] + s * xi)
    cos_term = (1.0 - _BRANIN_T) * np.cos(b1) + 1.0
    o1 = -((b2 - _BRANIN_B * b1**2 + _BRANIN_C * b1 - 6.0) ** 2) - 10.0 * cos_term
    o2 = (
        np.sqrt(np.abs(10.5 - b1) * np.abs(b1 + 5.5) * np.abs(b2 + 0.5))
        + (b2 - _BRANIN_B * b1**2 - 6.0) ** 2 / 30.0
        + cos_term / 3.0
    )
    out = np.column_stack([o1, o2])
    return out[0] if single else out


def synthetic_6d(x, rng: np.random.Generator | None, s: float = 0.0, signs=(-1.0, -1.0)) -> np.ndarray:
    """Six-dimensional two-objective problem with independent per-coordinate noise.

    The raw outputs are meant to be minimized; ``signs`` multiplies them into
    the maximization convention (default: maximize their negatives).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    xp = x + s * rng.standard_normal(x.shape) if s > 0 else x
    z = xp[:, 1:] - 0.5
    g = 100.0 * (5.0 + np.sum(z**2 - np.cos(2.0 * math.pi * z), axis=1))
    o1 = 0.5 * xp[:, 0] * (1.0 + g)
    o2 = 0.5 * (1.0 - xp[:, 0]) * (1.0 + g)
    out = np.column_stack([o1, o2]) * np.asarray(signs, dtype=float)
    return out[0] if single else out


def noise_wrapper(base, noise_std, bounds: BoxBounds, n_objectives: int, name: str = "wrapped") -> StochasticObjective:
    """Stochastic objective that runs ``base`` at a perturbed, rescaled design.

    ``base`` takes an ``(n, d)`` array in ``bounds`` coordinates and returns
    ``(n, m)``. Designs are perturbed in unit-box scale by ``noise_std * xi``,
    clamped to ``[0, 1]`` and then mapped affinely onto ``bounds``.
    """
    noise_std = np.broadcast_to(np.asarray(noise_std, dtype=float), (bounds.dim,)).copy()
    if np.any(noise_std < 0):
        raise ValueError("noise standard deviations must be non-negative")

    def batch(x, rng):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        perturbed = x + noise_std * rng.standard_normal(x.shape)
        perturbed = np.clip(perturbed, 0.0, 1.0)
        return np.atleast_2d(base(affine_map(perturbed, bounds)))

    return StochasticObjective(name, bounds.dim, n_objectives, batch, {"noise_std": noise_std.tolist()})


def make_objective(name: str, s: float = 0.0) -> StochasticObjective:
    """Built-in benchmark by CLI name (``synthetic-2d`` or ``synthetic-6d``)."""
    if name == "synthetic-2d":
        return StochasticObjective(name, 2, 2, lambda x, rng: synthetic_2d(x, rng, s), {"s": s})
    if name == "synthetic-6d":
        return StochasticObjective(name, 6, 2, lambda x, rng: synthetic_6d(x, rng, s), {"s": s})
    raise KeyError(f"unknown built-in objective {name!r}")


BUILTIN_OBJECTIVES = ("synthetic-2d", "synthetic-6d")


def sample_average(objective: StochasticObjective, x, mc_reps: int, seed: int, stream: tuple = ()) -> np.ndarray:
    """Monte-Carlo estimate of the expected objectives at each design in ``x``.

    Replicate ``k`` draws from substream ``(seed, *stream, k)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    total = np.zeros((x.shape[0], objective.n_objectives))
    for k in range(mc_reps):
        total += objective.batch(x, rng_stream(seed, *stream, k))
    return total / mc_reps


@dataclass
class GroundTruth:
    front: np.ndarray
    designs: np.ndarray
    front_designs: np.ndarray
    mc_reps: int


def ground_truth(objective: StochasticObjective, n_designs: int, mc_reps: int, seed: int) -> GroundTruth:
    """Empirical Pareto front of sample-averaged objectives at uniform designs."""
    if n_designs < 1 or mc_reps < 1:
        raise ValueError("n_designs and mc_reps must be positive")
    designs = rng_stream(seed, 0).uniform(size=(n_designs, objective.dim))
    means = sample_average(objective, designs, mc_reps, seed, stream=(1,))
    idx = pareto_indices(means)
    return GroundTruth(means[idx], designs, designs[idx], mc_reps)

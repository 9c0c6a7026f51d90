"""Domain types shared by every module: dominance, datasets, standardization, box maps.

All objective vectors use the maximization convention. Objectives that should be
minimized are sign-flipped once, at ingestion, and never again.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    """Raised when array shapes disagree with the problem dimensions."""


class DomainRangeError(ValueError):
    """Raised when a design lies outside the box it is mapped from."""


class EvaluationError(RuntimeError):
    """Raised when an objective evaluation fails or returns unusable values."""


class Dominance(enum.Enum):
    STRICT = "strict"
    WEAK = "weak"
    NONE = "none"


def dominates(a, b) -> Dominance:
    """Classify how objective vector ``a`` dominates ``b`` (maximization).

    ``STRICT`` implies weak dominance plus one strictly better coordinate, so a
    caller that wants "weakly dominates" should test ``is not Dominance.NONE``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare vectors of shape {a.shape} and {b.shape}")
    if not np.all(a >= b):
        return Dominance.NONE
    if np.any(a > b):
        return Dominance.STRICT
    return Dominance.WEAK


@dataclass(frozen=True)
class BoxBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise DimensionError("lower and upper bounds must be vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("box bounds require lower < upper in every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @classmethod
    def unit(cls, d: int) -> "BoxBounds":
        return cls(np.zeros(d), np.ones(d))


def affine_map(x_unit, bounds: BoxBounds, atol: float = 1e-12) -> np.ndarray:
    """Map unit-box coordinates onto ``bounds``. Works on a single design or a batch."""
    x = np.asarray(x_unit, dtype=float)
    if x.shape[-1] != bounds.dim:
        raise DimensionError(f"expected {bounds.dim} coordinates, got {x.shape[-1]}")
    if np.any(x < -atol) or np.any(x > 1 + atol):
        raise DomainRangeError("unit-box design has coordinates outside [0, 1]")
    return bounds.lower + x * (bounds.upper - bounds.lower)


def inverse_affine_map(x, bounds: BoxBounds, atol: float = 1e-12) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != bounds.dim:
        raise DimensionError(f"expected {bounds.dim} coordinates, got {x.shape[-1]}")
    width = bounds.upper - bounds.lower
    if np.any(x < bounds.lower - atol * width) or np.any(x > bounds.upper + atol * width):
        raise DomainRangeError("design lies outside the box bounds")
    return (x - bounds.lower) / width


@dataclass(frozen=True)
class Standardizer:
    """Per-objective affine transform ``z = (y - mean) / std``.

    ``degenerate`` flags columns that were constant, for which ``std`` was set to 1.
    """

    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=float))
        if self.degenerate is None:
            object.__setattr__(self, "degenerate", np.zeros(self.mean.shape, dtype=bool))
        else:
            object.__setattr__(self, "degenerate", np.asarray(self.degenerate, dtype=bool))

    @classmethod
    def identity(cls, m: int) -> "Standardizer":
        return cls(np.zeros(m), np.ones(m))

    @classmethod
    def fit(cls, y) -> "Standardizer":
        y = np.asarray(y, dtype=float)
        if y.ndim != 2 or y.shape[0] < 2:
            raise ValueError("standardization needs at least two measurements")
        mean = y.mean(axis=0)
        std = y.std(axis=0)  # population convention
        degenerate = ~(std > 0)
        std = np.where(degenerate, 1.0, std)
        return cls(mean, std, degenerate)

    def transform(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.mean) / self.std

    def inverse(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.std + self.mean

    def scale_std(self, sigma) -> np.ndarray:
        """Convert standard deviations from standardized to raw units."""
        return np.asarray(sigma, dtype=float) * self.std


@dataclass
class Dataset:
    """Observed designs ``x`` (n, d) and noisy measurements ``y`` (n, m), raw units."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if self.x.shape[0] != self.y.shape[0]:
            raise DimensionError(
                f"{self.x.shape[0]} designs but {self.y.shape[0]} measurements"
            )
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset entries must be finite")

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def n_objectives(self) -> int:
        return self.y.shape[1]

    def append(self, x, y) -> "Dataset":
        x = np.asarray(x, dtype=float).reshape(1, self.dim)
        y = np.asarray(y, dtype=float).reshape(1, self.n_objectives)
        return Dataset(np.vstack([self.x, x]), np.vstack([self.y, y]))


def standardize(dataset: Dataset) -> tuple[np.ndarray, Standardizer]:
    """Return standardized measurements and the transform that produced them."""
    scaler = Standardizer.fit(dataset.y)
    return scaler.transform(dataset.y), scaler


def destandardize(z, scaler: Standardizer) -> np.ndarray:
    return scaler.inverse(z)

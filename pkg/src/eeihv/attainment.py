"""Monte-Carlo summaries of the random attained set for two objectives.

Sampled Pareto fronts come from joint posterior draws of every objective at a
shared set of candidate designs. On a regular grid over ``[r, u]`` they give the
empirical attainment function, its upper level sets (quantiles), the Vorob'ev
expectation and the symmetric deviation function. Cells are represented by their
centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Standardizer
from .gp import posterior_sampling_factor
from .numerics import rng_stream
from .pareto import pareto_filter, staircase_height


@dataclass
class AttainmentGrid:
    """Scalar field on a regular grid; ``values[i, j]`` belongs to cell center
    ``(centers1[i], centers2[j])``."""

    lower: np.ndarray
    upper: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.values = np.asarray(self.values)
        if not np.all(self.upper > self.lower):
            raise ValueError("grid corner u must exceed r in both objectives")

    @property
    def resolution(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def cell_area(self) -> float:
        return grid_cell_area(self.lower, self.upper, self.resolution)

    @property
    def centers1(self) -> np.ndarray:
        return grid_centers(self.lower, self.upper, self.resolution)[0]

    @property
    def centers2(self) -> np.ndarray:
        return grid_centers(self.lower, self.upper, self.resolution)[1]

    def long_form(self) -> np.ndarray:
        """Rows ``(y1, y2, value)`` in row-major cell order."""
        c1, c2 = np.meshgrid(self.centers1, self.centers2, indexing="ij")
        return np.column_stack([c1.ravel(), c2.ravel(), self.values.astype(float).ravel()])


def grid_centers(lower, upper, resolution) -> tuple[np.ndarray, np.ndarray]:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n1, n2 = resolution
    c1 = lower[0] + (np.arange(n1) + 0.5) * (upper[0] - lower[0]) / n1
    c2 = lower[1] + (np.arange(n2) + 0.5) * (upper[1] - lower[1]) / n2
    return c1, c2


def grid_cell_area(lower, upper, resolution) -> float:
    span = np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)
    return float(span[0] / resolution[0] * span[1] / resolution[1])


def attained_mask(front, lower, upper, resolution) -> np.ndarray:
    """Boolean grid: cell center weakly dominated by some point of ``front``."""
    c1, c2 = grid_centers(lower, upper, resolution)
    front = pareto_filter(np.asarray(front, dtype=float).reshape(-1, 2))
    heights = staircase_height(front, c1)
    return c2[None, :] <= heights[:, None]


@dataclass
class SampledFrontSet:
    fronts: list

    def __len__(self) -> int:
        return len(self.fronts)


def candidate_designs(observed_x, n_random: int, rng: np.random.Generator) -> np.ndarray:
    """Observed designs followed by ``n_random`` uniform draws from the unit box."""
    observed_x = np.atleast_2d(np.asarray(observed_x, dtype=float))
    d = observed_x.shape[1]
    return np.vstack([observed_x, rng.uniform(size=(n_random, d))])


def sample_fronts(
    models,
    candidates,
    n_samples: int,
    seed: int,
    stream: tuple = (),
    scaler: Standardizer | None = None,
) -> SampledFrontSet:
    """Draw ``n_samples`` Pareto fronts from the independent per-objective posteriors.

    Sample ``s`` uses the RNG substream ``(seed, *stream, s)`` so the result does
    not depend on evaluation order. With ``scaler`` the draws are mapped back to
    raw objective units before filtering.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    moments = []
    for gp in models:
        mean, cov = gp.posterior(candidates)
        moments.append((mean, posterior_sampling_factor(cov)))
    fronts = []
    q = candidates.shape[0]
    for s in range(n_samples):
        rng = rng_stream(seed, *stream, s)
        draw = np.column_stack([mean + factor @ rng.standard_normal(q) for mean, factor in moments])
        if scaler is not None:
            draw = scaler.inverse(draw)
        fronts.append(pareto_filter(draw))
    return SampledFrontSet(fronts)


def empirical_attainment(fronts: SampledFrontSet, lower, upper, resolution=(64, 64)) -> AttainmentGrid:
    """Fraction of sampled fronts attaining each cell center."""
    if len(fronts) == 0:
        raise ValueError("need at least one sampled front")
    counts = np.zeros(resolution, dtype=int)
    for front in fronts.fronts:
        counts += attained_mask(front, lower, upper, resolution)
    return AttainmentGrid(lower, upper, counts / len(fronts))


def beta_quantile(grid: AttainmentGrid, beta: float) -> np.ndarray:
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    return grid.values >= beta


@dataclass
class VorobevSummary:
    beta_star: float
    quantile_mask: np.ndarray
    expected_measure: float
    vorobev_measure: float


def vorobev(grid: AttainmentGrid, tol: float = 1e-4) -> VorobevSummary:
    """Vorob'ev expectation of the random attained set on the grid.

    The grid measure of the attained set averaged over samples equals the sum
    of attainment values times the cell area. Bisection on ``beta`` locates the
    quantile threshold; since attainment values are discrete, ``beta_star`` is
    then snapped to the smallest attainment level at or above the bisection's
    lower end, i.e. the largest level whose quantile still has measure at least
    the expected measure. Every ``beta > beta_star`` then gives a quantile of
    measure below the expectation.
    """
    area = grid.cell_area
    values = grid.values
    expected = float(values.sum() * area)
    if expected == 0.0:
        empty = np.zeros(values.shape, dtype=bool)
        return VorobevSummary(1.0, empty, 0.0, 0.0)

    def measure(beta):
        return float(np.count_nonzero(values >= beta) * area)

    lo, hi = 0.0, 1.0
    if measure(hi) >= expected:
        lo = hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if measure(mid) >= expected:
            lo = mid
        else:
            hi = mid
        if abs(measure(lo) - expected) <= area:
            break
    levels = np.unique(values[values >= lo])
    beta_star = float(levels[0]) if levels.size else lo
    mask = values >= beta_star
    return VorobevSummary(beta_star, mask, expected, float(mask.sum() * area))


def symmetric_deviation(fronts: SampledFrontSet, summary: VorobevSummary, lower, upper) -> AttainmentGrid:
    """Fraction of samples whose attained set disagrees with the Vorob'ev quantile."""
    resolution = summary.quantile_mask.shape
    counts = np.zeros(resolution, dtype=int)
    for front in fronts.fronts:
        counts += attained_mask(front, lower, upper, resolution) ^ summary.quantile_mask
    return AttainmentGrid(lower, upper, counts / len(fronts))


def vorobev_boundary(summary: VorobevSummary, grid: AttainmentGrid) -> np.ndarray:
    """Top-right staircase of the Vorob'ev quantile as polyline vertices.

    For each first-objective column the boundary sits at the upper edge of the
    highest cell in the quantile; columns with no cells drop out.
    """
    mask = summary.quantile_mask
    n1, n2 = mask.shape
    span = grid.upper - grid.lower
    w1, w2 = span[0] / n1, span[1] / n2
    verts = []
    for i in range(n1):
        col = np.flatnonzero(mask[i])
        if col.size == 0:
            break
        top = grid.lower[1] + (col.max() + 1) * w2
        left = grid.lower[0] + i * w1
        right = left + w1
        if verts and verts[-1][1] == top:
            verts[-1] = (right, top)
        else:
            verts.extend([(left, top), (right, top)])
    if verts:
        verts.append((verts[-1][0], grid.lower[1]))
    return np.array(verts, dtype=float).reshape(-1, 2)

"""Sequential information-acquisition driver.

Each pass retrains one GP per objective on standardized measurements, maximizes
the denoised expected hypervolume improvement, stops if it falls below the
tolerance, and otherwise queries the objective once. Every pass produces a
:class:`RunState` snapshot.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import attainment as att
from .acquisition import AcquisitionConfig, DenoisedEihv, maximize_eeihv
from .core import Dataset, EvaluationError, Standardizer, standardize
from .gp import Hyperparams, train
from .numerics import rng_stream
from .pareto import pareto_indices, staircase_boundary

logger = logging.getLogger(__name__)

# RNG purpose codes; every random draw is keyed by (seed, purpose, ...)
STREAM_INIT = 0
STREAM_TRAIN = 1
STREAM_ACQUIRE = 2
STREAM_OBJECTIVE = 3
STREAM_CANDIDATES = 4
STREAM_POSTERIOR = 5


@dataclass
class LoopConfig:
    n_max: int
    seed: int
    delta: float = 1e-6
    gp_restarts: int = 10
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    n_samples: int = 100
    n_candidates: int = 1000
    grid_resolution: int = 64
    attainment_every: int = 5
    margin: float = 0.1
    threads: int = 1

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.n_samples < 1 or self.n_candidates < 0 or self.grid_resolution < 1:
            raise ValueError("attainment settings must be positive")


@dataclass
class RunState:
    """Snapshot of one pass through the loop.

    ``x``/``y`` hold the data the GPs were trained on (raw units, maximization
    convention). ``next_x``/``next_y`` record the acquisition and, if it was
    accepted, the measurement appended before the following pass.
    """

    iteration: int
    x: np.ndarray
    y: np.ndarray
    hyperparams: list
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    reference: np.ndarray
    denoised: np.ndarray
    front_indices: np.ndarray
    next_x: np.ndarray | None = None
    next_value: float | None = None
    next_y: np.ndarray | None = None
    accepted: bool = False
    stop_reason: str | None = None
    failure: str | None = None
    upper: np.ndarray | None = None
    beta_star: float | None = None
    expected_measure: float | None = None
    vorobev_measure: float | None = None
    attainment: np.ndarray | None = None
    deviation: np.ndarray | None = None
    quantile_mask: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def denoised_front(self) -> np.ndarray:
        return self.denoised[self.front_indices]

    @property
    def front_designs(self) -> np.ndarray:
        return self.x[self.front_indices]

    @property
    def has_attainment(self) -> bool:
        return self.attainment is not None

    def to_dict(self) -> dict:
        def arr(v):
            return None if v is None else np.asarray(v).tolist()

        return {
            "iteration": self.iteration,
            "x": arr(self.x),
            "y": arr(self.y),
            "hyperparams": [hp.to_dict() for hp in self.hyperparams],
            "scaler_mean": arr(self.scaler_mean),
            "scaler_std": arr(self.scaler_std),
            "reference": arr(self.reference),
            "denoised": arr(self.denoised),
            "front_indices": arr(self.front_indices),
            "next_x": arr(self.next_x),
            "next_value": self.next_value,
            "next_y": arr(self.next_y),
            "accepted": self.accepted,
            "stop_reason": self.stop_reason,
            "failure": self.failure,
            "upper": arr(self.upper),
            "beta_star": self.beta_star,
            "expected_measure": self.expected_measure,
            "vorobev_measure": self.vorobev_measure,
            "attainment": arr(self.attainment),
            "deviation": arr(self.deviation),
            "quantile_mask": arr(self.quantile_mask),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunState":
        def arr(key, dtype=float):
            v = data.get(key)
            return None if v is None else np.asarray(v, dtype=dtype)

        return cls(
            iteration=int(data["iteration"]),
            x=arr("x"),
            y=arr("y"),
            hyperparams=[Hyperparams.from_dict(h) for h in data["hyperparams"]],
            scaler_mean=arr("scaler_mean"),
            scaler_std=arr("scaler_std"),
            reference=arr("reference"),
            denoised=arr("denoised"),
            front_indices=arr("front_indices", int),
            next_x=arr("next_x"),
            next_value=data.get("next_value"),
            next_y=arr("next_y"),
            accepted=bool(data.get("accepted", False)),
            stop_reason=data.get("stop_reason"),
            failure=data.get("failure"),
            upper=arr("upper"),
            beta_star=data.get("beta_star"),
            expected_measure=data.get("expected_measure"),
            vorobev_measure=data.get("vorobev_measure"),
            attainment=arr("attainment"),
            deviation=arr("deviation"),
            quantile_mask=arr("quantile_mask", bool),
        )


def initial_dataset(objective, n_init: int, seed: int) -> Dataset:
    """Uniform random designs and one measurement each."""
    x = rng_stream(seed, STREAM_INIT).uniform(size=(n_init, objective.dim))
    y = np.vstack([objective.evaluate(x[k], rng_stream(seed, STREAM_OBJECTIVE, k)) for k in range(n_init)])
    return Dataset(x, y)


def _evaluate_with_retry(objective, x, seed: int, n: int):
    last = None
    for attempt in range(2):
        try:
            y = np.asarray(objective.evaluate(x, rng_stream(seed, STREAM_OBJECTIVE, n, attempt)), dtype=float)
            if not np.all(np.isfinite(y)):
                raise EvaluationError("objective returned non-finite values")
            return y
        except Exception as exc:  # any evaluator failure is retried once
            last = exc
            logger.warning("evaluation at n=%d failed (attempt %d): %s", n, attempt + 1, exc)
    raise EvaluationError(str(last)) from last


def compute_attainment(state: RunState, models, scaler: Standardizer, config: LoopConfig) -> None:
    """Fill the attainment, Vorob'ev and deviation fields of ``state`` in place."""
    if state.y.shape[1] != 2:
        return
    lo = state.denoised.min(axis=0)
    hi = state.denoised.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    upper = np.maximum(hi + config.margin * span, state.reference + span * 1e-9)
    cands = att.candidate_designs(
        state.x, config.n_candidates, rng_stream(config.seed, STREAM_CANDIDATES, state.iteration)
    )
    fronts = att.sample_fronts(
        models, cands, config.n_samples, config.seed, stream=(STREAM_POSTERIOR, state.iteration), scaler=scaler
    )
    res = (config.grid_resolution, config.grid_resolution)
    grid = att.empirical_attainment(fronts, state.reference, upper, res)
    summary = att.vorobev(grid)
    dev = att.symmetric_deviation(fronts, summary, state.reference, upper)
    state.upper = upper
    state.attainment = grid.values
    state.deviation = dev.values
    state.quantile_mask = summary.quantile_mask
    state.beta_star = summary.beta_star
    state.expected_measure = summary.expected_measure
    state.vorobev_measure = summary.vorobev_measure


def _train_all(x, z, config: LoopConfig, iteration: int, prev_hps):
    # each objective has its own RNG substream, so results do not depend on thread count
    def fit(i):
        return train(
            x,
            z[:, i],
            rng_stream(config.seed, STREAM_TRAIN, iteration, i),
            restarts=config.gp_restarts,
            init=None if prev_hps is None else prev_hps[i],
        )

    m = z.shape[1]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=min(config.threads, m)) as pool:
            return list(pool.map(fit, range(m)))
    return [fit(i) for i in range(m)]


def run(objective, initial: Dataset, config: LoopConfig, on_state=None, resume: RunState | None = None):
    """Run the acquisition loop until the budget is spent or improvement stalls.

    Args:
        objective: anything with ``evaluate(x, rng)`` returning ``m`` values.
        initial: starting data with at least two observations.
        config: loop settings.
        on_state: optional callback receiving each finished :class:`RunState`.
        resume: continue after a persisted state instead of starting fresh;
            ``initial`` is ignored in that case.

    Returns:
        ``(final_state, history)``.
    """
    history = []
    if resume is not None:
        dataset = Dataset(resume.x, resume.y)
        if resume.accepted and resume.next_y is not None:
            dataset = dataset.append(resume.next_x, resume.next_y)
        iteration = resume.iteration + 1
        reference = resume.reference
        prev_hps = resume.hyperparams
    else:
        dataset = initial
        iteration = 0
        reference = None
        prev_hps = None
    if len(dataset) < 2:
        raise ValueError("the loop needs at least two initial observations")

    while True:
        z, scaler = standardize(dataset)
        models = _train_all(dataset.x, z, config, iteration, prev_hps)
        prev_hps = [gp.hp for gp in models]
        denoised_std = np.column_stack([gp.denoised_targets() for gp in models])
        denoised = scaler.inverse(denoised_std)
        if reference is None:
            lo, hi = denoised.min(axis=0), denoised.max(axis=0)
            reference = lo - config.margin * np.where(hi > lo, hi - lo, 1.0)
        state = RunState(
            iteration=iteration,
            x=dataset.x.copy(),
            y=dataset.y.copy(),
            hyperparams=prev_hps,
            scaler_mean=scaler.mean,
            scaler_std=scaler.std,
            reference=np.asarray(reference, dtype=float),
            denoised=denoised,
            front_indices=pareto_indices(denoised),
        )

        if len(dataset) >= config.n_max:
            state.stop_reason = "budget"
        else:
            acq = DenoisedEihv(models, scaler.transform(reference))
            x_next, value = maximize_eeihv(acq, config.acquisition, rng_stream(config.seed, STREAM_ACQUIRE, iteration))
            state.next_x, state.next_value = x_next, float(value)
            if value < config.delta:
                state.stop_reason = "tolerance"
            else:
                try:
                    state.next_y = _evaluate_with_retry(objective, x_next, config.seed, len(dataset))
                    state.accepted = True
                except EvaluationError as exc:
                    state.stop_reason = "evaluation-failure"
                    state.failure = str(exc)

        cadence = config.attainment_every > 0 and iteration % config.attainment_every == 0
        if cadence or state.stop_reason is not None:
            compute_attainment(state, models, scaler, config)
        history.append(state)
        if on_state is not None:
            on_state(state)
        logger.info(
            "iteration %d: n=%d eeihv=%s accepted=%s", iteration, state.n, state.next_value, state.accepted
        )
        if state.stop_reason is not None:
            return state, history
        dataset = dataset.append(state.next_x, state.next_y)
        iteration += 1


@dataclass
class ReportBundle:
    denoised: np.ndarray  # rows: x_1..x_d, mu_1..mu_m
    front: np.ndarray  # rows: x_1..x_d, mu_1..mu_m for Pareto designs
    vorobev_boundary: np.ndarray | None
    attainment: np.ndarray | None  # long form (y1, y2, value)
    deviation: np.ndarray | None
    attainment_skipped: bool


def report(state: RunState) -> ReportBundle:
    denoised = np.hstack([state.x, state.denoised])
    front = denoised[state.front_indices]
    if not state.has_attainment:
        return ReportBundle(denoised, front, None, None, None, True)
    grid = att.AttainmentGrid(state.reference, state.upper, state.attainment)
    dev = att.AttainmentGrid(state.reference, state.upper, state.deviation)
    summary = att.VorobevSummary(state.beta_star, state.quantile_mask, state.expected_measure, state.vorobev_measure)
    boundary = att.vorobev_boundary(summary, grid)
    return ReportBundle(denoised, front, boundary, grid.long_form(), dev.long_form(), False)


def denoised_staircase(state: RunState) -> np.ndarray:
    upper = state.upper if state.upper is not None else state.denoised.max(axis=0)
    return staircase_boundary(state.denoised_front, state.reference, upper)

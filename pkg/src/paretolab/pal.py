"""The epsilon-accurate Pareto active-learning engine.

Maintains per-point uncertainty hyperrectangles over the objective space,
classifies grid points as Pareto-optimal / discarded / undecided, picks
the most uncertain eligible point to evaluate next, and stops once no
point is left undecided.  Maximization convention throughout.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gp
from .errors import EvaluationAborted, InvalidArgument


class Classification(enum.IntEnum):
    UNDECIDED = 0
    PARETO_OPTIMAL = 1
    DISCARDED = 2


@dataclass
class PalConfig:
    epsilon: float | np.ndarray = 0.01
    delta: float = 0.05
    beta_scale: float = 0.5
    batch_size: int = 3
    max_evaluations: int = 100
    seed: int = 0
    n_initial: int = 3
    fit_restarts: int = 4
    fit_max_iter: int = 60
    refit_max_iter: int = 20
    # design coordinates are normalized to [0, 1]; capping the lengthscales
    # near the domain size keeps extrapolation into unsampled holes honest
    lengthscale_bounds: tuple[float, float] = (1e-3, 2.0)

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise InvalidArgument("delta must lie in (0, 1)")
        if np.any(np.asarray(self.epsilon) < 0):
            raise InvalidArgument("epsilon must be nonnegative")
        if self.beta_scale <= 0:
            raise InvalidArgument("beta_scale must be positive")

    def epsilon_vector(self, m: int) -> np.ndarray:
        eps = np.asarray(self.epsilon, dtype=float)
        if eps.ndim == 0:
            return np.full(m, float(eps))
        if eps.shape != (m,):
            raise InvalidArgument(f"epsilon vector must have length {m}")
        return eps


@dataclass
class PalState:
    """Per-grid-point regions and classifications, plus run bookkeeping."""

    low: np.ndarray  # (n, m)
    high: np.ndarray  # (n, m)
    classes: np.ndarray  # (n,) Classification values
    means: np.ndarray  # (n, m) latest predictive means
    stds: np.ndarray  # (n, m) latest predictive stds
    sampled_ids: list[int] = field(default_factory=list)
    iteration: int = 0
    objective_ranges: np.ndarray | None = None  # (m, 2)
    disjoint_fallbacks: int = 0
    region_updates: int = 0
    history: list[dict] = field(default_factory=list)
    observations: dict[int, np.ndarray] = field(default_factory=dict)
    kernel_params: list = field(default_factory=list)

    @property
    def n_points(self) -> int:
        return self.low.shape[0]

    def counts(self) -> dict[str, int]:
        c = np.bincount(self.classes, minlength=3)
        return {
            "undecided": int(c[Classification.UNDECIDED]),
            "pareto": int(c[Classification.PARETO_OPTIMAL]),
            "discarded": int(c[Classification.DISCARDED]),
        }

    @property
    def converged(self) -> bool:
        return not np.any(self.classes == Classification.UNDECIDED)

    def pareto_ids(self) -> np.ndarray:
        return np.flatnonzero(self.classes == Classification.PARETO_OPTIMAL)

    def history_records(self) -> str:
        """Line-delimited JSON history export."""
        return "\n".join(json.dumps(rec) for rec in self.history)


def beta_t(iteration, n_designs, n_objectives, delta, scale) -> float:
    """Confidence multiplier schedule; nondecreasing in the iteration."""
    if iteration < 1 or n_designs < 1 or n_objectives < 1:
        raise InvalidArgument("iteration and sizes must be positive")
    if not (0.0 < delta < 1.0):
        raise InvalidArgument("delta must lie in (0, 1)")
    return scale * 2.0 * math.log(
        n_objectives * n_designs * math.pi**2 * iteration**2 / (6.0 * delta)
    )


def update_regions(means, stds, beta, previous_low=None, previous_high=None):
    """Intersect the new confidence rectangles with the previous regions.

    Returns (low, high, fallback_count); a disjoint intersection in any
    objective falls back to the fresh candidate interval there.
    """
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    half = math.sqrt(beta) * stds
    cand_low = means - half
    cand_high = means + half
    if previous_low is None:
        return cand_low, cand_high, 0
    low = np.maximum(previous_low, cand_low)
    high = np.minimum(previous_high, cand_high)
    disjoint = low > high
    n_fallback = int(np.count_nonzero(disjoint))
    if n_fallback:
        low = np.where(disjoint, cand_low, low)
        high = np.where(disjoint, cand_high, high)
    return low, high, n_fallback


def classify(low, high, epsilon, ranges, classes):
    """One classification sweep; finalized classes are never reopened.

    epsilon is the per-objective relative tolerance, ranges the
    per-objective (min, max) span of current predicted means.
    """
    low = np.asarray(low, dtype=float)
    high = np.asarray(high, dtype=float)
    classes = np.asarray(classes).copy()
    n = low.shape[0]
    span = np.maximum(ranges[:, 1] - ranges[:, 0], 1e-12)
    e = np.asarray(epsilon, dtype=float) * span

    # Discard pass, in index order so mutual eps-dominance cannot wipe out
    # a whole plateau: once a point is discarded it stops discarding others.
    alive = classes != Classification.DISCARDED
    for i in range(n):
        if classes[i] != Classification.UNDECIDED:
            continue
        pess = low[alive] + e  # pessimistic outcomes of potential dominators
        dominated = np.all(pess >= high[i], axis=1)
        # exclude the point itself
        idx_self = int(np.count_nonzero(alive[: i + 1])) - 1
        if alive[i]:
            dominated[idx_self] = False
        if np.any(dominated):
            classes[i] = Classification.DISCARDED
            alive[i] = False

    # Promotion pass against the surviving set.
    alive_idx = np.flatnonzero(alive)
    if alive_idx.size:
        high_alive = high[alive_idx]
        for i in alive_idx:
            if classes[i] != Classification.UNDECIDED:
                continue
            opt = np.all(high_alive >= low[i] + e, axis=1)
            opt[np.searchsorted(alive_idx, i)] = False
            if not np.any(opt):
                classes[i] = Classification.PARETO_OPTIMAL
    return classes


def select_next(state: PalState) -> int | None:
    """Most-uncertain eligible point, or None once nothing is undecided."""
    if state.converged:
        return None
    eligible = (state.classes != Classification.DISCARDED).copy()
    eligible[state.sampled_ids] = False
    if not np.any(eligible):
        return None
    span = np.maximum(
        state.objective_ranges[:, 1] - state.objective_ranges[:, 0], 1e-12
    )
    diag = np.linalg.norm((state.high - state.low) / span, axis=1)
    diag[~eligible] = -np.inf
    return int(np.argmax(diag))  # argmax takes the lowest index on ties


def pareto_front(values) -> list[int]:
    """Brute-force Pareto front (maximization); serves as oracle."""
    V = np.atleast_2d(np.asarray(values, dtype=float))
    n = V.shape[0]
    front = []
    for i in range(n):
        ge = np.all(V >= V[i], axis=1)
        gt = np.any(V > V[i], axis=1)
        if not np.any(ge & gt):
            front.append(i)
    return front


def _maximin_seed_ids(design, n_seed, rng):
    """Greedy maximin spread over normalized design coordinates."""
    n = design.shape[0]
    n_seed = min(n_seed, n)
    first = int(rng.integers(n))
    chosen = [first]
    dist = np.linalg.norm(design - design[first], axis=1)
    while len(chosen) < n_seed:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(design - design[nxt], axis=1))
    return chosen


def _fit_objective_models(design, sampled_ids, observations, config, iteration, warm=None):
    """One independent GP per objective over the sampled points.

    Warm-starting from the previous iteration's hyperparameters (as one
    of the restarts) keeps the predictive means stable across refits.
    """
    X = design[sampled_ids]
    Y = np.asarray([observations[i] for i in sampled_ids], dtype=float)
    models = []
    for j in range(Y.shape[1]):
        fit_cfg = gp.FitConfig(
            n_restarts=config.fit_restarts if not warm else 1,
            max_iter=config.fit_max_iter if not warm else config.refit_max_iter,
            seed=(config.seed * 1000003 + iteration * 101 + j) % (2**31),
            warm_start=warm[j] if warm else None,
            lengthscale_bounds=config.lengthscale_bounds,
        )
        models.append(gp.fit(X, Y[:, j], fit_cfg))
    return models


def _predict_grid(models, design):
    means, stds = [], []
    for model in models:
        mu, sd = gp.predict_many(model, design)
        means.append(mu)
        stds.append(sd)
    return np.column_stack(means), np.column_stack(stds)


def run_epal(problem, config: PalConfig, state: PalState | None = None) -> PalState:
    """Full ε-PAL loop: seed, then fit / update / classify / select / evaluate.

    ``problem`` must expose ``design_matrix`` (n x d, normalized) and
    ``evaluate(index) -> m-vector`` in maximization convention.  Passing a
    previous ``state`` resumes an aborted run.
    """
    design = np.asarray(problem.design_matrix, dtype=float)
    n = design.shape[0]
    m = problem.n_objectives
    eps = config.epsilon_vector(m)

    if state is None:
        state = PalState(
            low=np.zeros((n, m)),
            high=np.zeros((n, m)),
            classes=np.zeros(n, dtype=np.int8),
            means=np.zeros((n, m)),
            stds=np.zeros((n, m)),
        )
    observations = state.observations

    def evaluate(idx):
        try:
            y = np.asarray(problem.evaluate(idx), dtype=float)
        except Exception as exc:
            raise EvaluationAborted(f"evaluation of point {idx} failed: {exc}", state)
        observations[idx] = y
        state.sampled_ids.append(idx)

    if not state.sampled_ids:
        rng = np.random.default_rng(config.seed)
        for idx in _maximin_seed_ids(design, config.n_initial, rng):
            evaluate(idx)

    post_seed = max(len(state.sampled_ids) - config.n_initial, 0)
    first_iteration = state.iteration == 0
    while True:
        state.iteration += 1
        models = _fit_objective_models(
            design,
            state.sampled_ids,
            observations,
            config,
            state.iteration,
            warm=state.kernel_params or None,
        )
        state.kernel_params = [m.params for m in models]
        state.means, state.stds = _predict_grid(models, design)
        state.objective_ranges = np.column_stack(
            (state.means.min(axis=0), state.means.max(axis=0))
        )
        beta = beta_t(state.iteration, n, m, config.delta, config.beta_scale)
        prev_low = None if first_iteration else state.low
        prev_high = None if first_iteration else state.high
        state.low, state.high, fb = update_regions(
            state.means, state.stds, beta, prev_low, prev_high
        )
        first_iteration = False
        state.disjoint_fallbacks += fb
        state.region_updates += n * m
        state.classes = classify(
            state.low, state.high, eps, state.objective_ranges, state.classes
        )
        nxt = select_next(state)
        state.history.append(
            {
                "iteration": state.iteration,
                "sampled_id": nxt,
                "counts": state.counts(),
            }
        )
        if nxt is None or post_seed >= config.max_evaluations:
            break
        evaluate(nxt)
        post_seed += 1

    return state

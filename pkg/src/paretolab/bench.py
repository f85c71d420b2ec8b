"""Benchmark problems and independent oracles.

Binh-Korn on a discretized feasible grid, a synthetic spin-coating
surrogate standing in for the nanoindenter, and brute-force
Pareto/epsilon-coverage checkers used as acceptance oracles.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import pal
from .errors import InvalidArgument

BINH_KORN_X_MAX = 5.0
BINH_KORN_Y_MAX = 3.0


def binh_korn(x: float, y: float) -> tuple[float, float]:
    """Standard Binh-Korn objective pair (minimization convention).

    f1 = 4x^2 + 4y^2, f2 = (x-5)^2 + (y-5)^2 on 0<=x<=5, 0<=y<=3 with
    (x-5)^2 + y^2 <= 25 and (x-8)^2 + (y+3)^2 >= 7.7.
    """
    if not (0.0 <= x <= BINH_KORN_X_MAX and 0.0 <= y <= BINH_KORN_Y_MAX):
        raise InvalidArgument(f"({x}, {y}) outside the Binh-Korn bounds")
    if (x - 5.0) ** 2 + y**2 > 25.0 or (x - 8.0) ** 2 + (y + 3.0) ** 2 < 7.7:
        raise InvalidArgument(f"({x}, {y}) violates a Binh-Korn constraint")
    f1 = 4.0 * x**2 + 4.0 * y**2
    f2 = (x - 5.0) ** 2 + (y - 5.0) ** 2
    return f1, f2


@dataclass
class GridProblem:
    """Discrete design grid with a deterministic evaluation callback."""

    design_matrix: np.ndarray  # (n, d), normalized coordinates
    raw_points: np.ndarray  # (n, d) in problem units
    n_objectives: int
    _evaluate: callable = field(repr=False)
    true_values: np.ndarray | None = None  # (n, m) noise-free, maximization

    def evaluate(self, index: int) -> np.ndarray:
        return np.asarray(self._evaluate(index), dtype=float)


def binh_korn_grid(step: float = 0.25) -> GridProblem:
    """Feasible Binh-Korn grid, objectives negated for maximization."""
    xs = np.arange(0.0, BINH_KORN_X_MAX + step / 2, step)
    ys = np.arange(0.0, BINH_KORN_Y_MAX + step / 2, step)
    pts, vals = [], []
    for x in xs:
        for y in ys:
            try:
                f1, f2 = binh_korn(float(x), float(y))
            except InvalidArgument:
                continue
            pts.append((x, y))
            vals.append((-f1, -f2))
    raw = np.asarray(pts)
    values = np.asarray(vals)
    design = raw / np.array([BINH_KORN_X_MAX, BINH_KORN_Y_MAX])
    return GridProblem(
        design_matrix=design,
        raw_points=raw,
        n_objectives=2,
        _evaluate=lambda i: values[i],
        true_values=values,
    )


# --- synthetic spin-coating surrogate ------------------------------------
#
# Documented closed form (noise-free), with p1/p4/p3 the PVP10/PVP40/PVP360
# concentrations, s the spin speed normalized to [0, 1], d the dilution:
#
#   hardness = 2.0 + 3.0*p3 + 1.2*p4 + 1.5*p3*s + 0.8*s*(1 - d) - 0.6*p1*d
#   inv_el   = 1.0 + 2.5*p1 + 1.0*p4 + 1.2*d*(1 - s) + 0.8*p1*(1 - s)
#              + 0.9*p4*d
#
# In the thin-film artifact region (s > 0.8 and d < 0.2) both outputs are
# attenuated by 0.55 and the noise tripled: films there are too thin to
# measure reliably.  Gaussian noise with sigma = noise_scale * range is
# added, seeded per (seed, point id).

HARDNESS_RANGE = (0.0, 10.0)
INV_ELASTICITY_RANGE = (0.0, 8.0)
# Achievable spans of the noise-free closed form; the noise sigma is
# noise_scale times these.
HARDNESS_SPAN = 5.6
INV_ELASTICITY_SPAN = 5.0
THIN_FILM_ATTENUATION = 0.55
THIN_FILM_NOISE_FACTOR = 3.0
DEFAULT_NOISE_SCALE = 0.02


def _smoothstep(u):
    u = min(max(u, 0.0), 1.0)
    return u * u * (3.0 - 2.0 * u)


def thin_film_attenuation(s_norm, d):
    """Smooth attenuation ramp centered on the thin-film corner.

    Reaches THIN_FILM_ATTENUATION at (s=1, d=0) and 1.0 outside
    s > 0.7, d < 0.3; the measurement-artifact region proper is
    s > 0.8 and d < 0.2.
    """
    s_factor = _smoothstep((s_norm - 0.7) / 0.3)
    d_factor = _smoothstep((0.3 - d) / 0.3)
    return 1.0 - (1.0 - THIN_FILM_ATTENUATION) * s_factor * d_factor


def in_thin_film_region(s_norm, d) -> bool:
    return s_norm > 0.8 and d < 0.2


def surrogate_closed_form(p1, p4, p3, s_norm, d):
    hardness = (
        2.0
        + 3.0 * p3
        + 1.2 * p4
        + 1.5 * p3 * s_norm
        + 0.8 * s_norm * (1.0 - d)
        - 0.6 * p1 * d
    )
    inv_el = (
        1.0
        + 2.5 * p1
        + 1.0 * p4
        + 1.2 * d * (1.0 - s_norm)
        + 0.8 * p1 * (1.0 - s_norm)
        + 0.9 * p4 * d
    )
    atten = thin_film_attenuation(s_norm, d)
    return hardness * atten, inv_el * atten


def surrogate_spincoat(point, seed: int, noise_scale: float = DEFAULT_NOISE_SCALE):
    """Synthetic nanoindentation stand-in; deterministic per (point, seed)."""
    s_norm = point.normalized_speed
    hardness, inv_el = surrogate_closed_form(
        point.c_pvp10, point.c_pvp40, point.c_pvp360, s_norm, point.dilution
    )
    if noise_scale > 0.0:
        rng = np.random.default_rng([max(seed, 0), point.id])
        noise = rng.standard_normal(2)
        factor = (
            THIN_FILM_NOISE_FACTOR
            if in_thin_film_region(s_norm, point.dilution)
            else 1.0
        )
        hardness += noise[0] * noise_scale * factor * HARDNESS_SPAN
        inv_el += noise[1] * noise_scale * factor * INV_ELASTICITY_SPAN
    hardness = min(max(hardness, 1e-6), HARDNESS_RANGE[1])
    inv_el = min(max(inv_el, 1e-6), INV_ELASTICITY_RANGE[1])
    return hardness, inv_el


def brute_force_epareto(values, epsilon, ranges=None):
    """Exact front plus an epsilon-coverage checker (maximization).

    Returns (front_indices, coverage) where coverage(candidate_values)
    is True iff every front point is weakly dominated by some candidate
    after adding the absolute slack epsilon * range per objective.
    """
    V = np.atleast_2d(np.asarray(values, dtype=float))
    eps = np.asarray(epsilon, dtype=float)
    if eps.ndim == 0:
        eps = np.full(V.shape[1], float(eps))
    if ranges is None:
        span = V.max(axis=0) - V.min(axis=0)
    else:
        ranges = np.asarray(ranges, dtype=float)
        span = ranges[:, 1] - ranges[:, 0]
    slack = eps * np.maximum(span, 0.0)
    front = pal.pareto_front(V)

    def coverage(candidates) -> bool:
        C = np.atleast_2d(np.asarray(candidates, dtype=float))
        if C.size == 0:
            return len(front) == 0
        for i in front:
            if not np.any(np.all(C + slack >= V[i], axis=1)):
                return False
        return True

    return front, coverage


def run_binh_korn_suite(
    n_runs: int = 20,
    epsilon: float = 0.01,
    max_total_evaluations: int = 40,
    seed0: int = 0,
    step: float = 0.25,
):
    """Seeded Binh-Korn acceptance runs; returns one record per run."""
    problem = binh_korn_grid(step)
    front, coverage = brute_force_epareto(problem.true_values, epsilon)
    records = []
    for run in range(n_runs):
        cfg = pal.PalConfig(
            epsilon=epsilon,
            seed=seed0 + run,
            max_evaluations=max_total_evaluations - 3,
            batch_size=1,
        )
        t0 = time.perf_counter()
        state = pal.run_epal(problem, cfg)
        elapsed = time.perf_counter() - t0
        returned = problem.true_values[state.pareto_ids()]
        records.append(
            {
                "seed": cfg.seed,
                "samples": len(state.sampled_ids),
                "converged": bool(state.converged),
                "coverage": bool(coverage(returned)),
                "hypervolume": hypervolume_2d(returned),
                "seconds": round(elapsed, 3),
                "disjoint_fallbacks": state.disjoint_fallbacks,
                "region_updates": state.region_updates,
            }
        )
    return records


def hypervolume_2d(points, reference=None) -> float:
    """Dominated hypervolume of a 2-D maximization front."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        return 0.0
    if reference is None:
        reference = P.min(axis=0) - 1.0
    front_idx = pal.pareto_front(P)
    F = P[front_idx]
    order = np.argsort(-F[:, 0])
    hv = 0.0
    prev_y = reference[1]
    for i in order:
        x, y = F[i]
        if y > prev_y:
            hv += (x - reference[0]) * (y - prev_y)
            prev_y = y
    return float(hv)

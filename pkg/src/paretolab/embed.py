"""UMAP-style 2-D embedding of the design grid, plus quality metrics.

The k-NN graph is exact (brute force at desk scale); the SGD layout runs
through the compiled kernel when available and otherwise through the
pure-Python twin.  Both backends produce bit-identical coordinates for a
given seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .errors import InvalidArgument, NumericError

try:
    from . import _layout as _layout_backend

    LAYOUT_BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _layout_py as _layout_backend

    LAYOUT_BACKEND = "python"

SMOOTH_KNN_ITERATIONS = 64
SIGMA_CLAMP_HIGH = 1e6


@dataclass
class EmbedConfig:
    k: int = 15
    min_dist: float = 0.1
    spread: float = 1.0
    epochs: int = 500
    seed: int = 0
    negative_sample_rate: int = 5
    initial_alpha: float = 1.0

    def __post_init__(self):
        if self.k < 2:
            raise InvalidArgument("k must be at least 2")
        if not (0.0 < self.min_dist < self.spread):
            raise InvalidArgument("require 0 < min_dist < spread")


@dataclass
class NeighborGraph:
    indices: np.ndarray  # (n, k)
    distances: np.ndarray  # (n, k)
    edges_head: np.ndarray  # symmetrized edge list
    edges_tail: np.ndarray
    edge_weights: np.ndarray  # in [0, 1]


def knn(points, k: int):
    """Exact k nearest neighbors (Euclidean); ties broken by index."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    n = X.shape[0]
    if k >= n:
        raise InvalidArgument(f"k={k} must be smaller than n={n}")
    d2 = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(X * X, axis=1)[None, :]
        - 2.0 * X @ X.T
    )
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    dist = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return order, dist


def smooth_knn(distances, k: int):
    """Per-point (rho, sigma) normalizing the local distance scale.

    sigma solves sum_j exp(-max(0, d_j - rho) / sigma) = log2(k) by
    bisection; rho is the smallest positive neighbor distance.
    """
    d = np.asarray(distances, dtype=float)
    positive = d[d > 0.0]
    rho = float(positive.min()) if positive.size else 0.0
    target = math.log2(k)
    mean_dist = float(d.mean()) if d.size else 1.0
    lo_clamp = 1e-6 * max(mean_dist, 1e-12)

    def weight_sum(sigma):
        return float(np.sum(np.exp(-np.maximum(d - rho, 0.0) / sigma)))

    lo, hi = lo_clamp, 1.0
    while weight_sum(hi) < target and hi < SIGMA_CLAMP_HIGH:
        hi *= 2.0
    for _ in range(SMOOTH_KNN_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if weight_sum(mid) > target:
            hi = mid
        else:
            lo = mid
    sigma = min(max(0.5 * (lo + hi), lo_clamp), SIGMA_CLAMP_HIGH)
    return rho, sigma


def fuzzy_union(w_ij: float, w_ji: float) -> float:
    """Probabilistic t-conorm combining directed edge weights."""
    return w_ij + w_ji - w_ij * w_ji


def build_graph(points, k: int) -> NeighborGraph:
    """Weighted, symmetrized k-NN graph over normalized design vectors."""
    indices, distances = knn(points, k)
    n = indices.shape[0]
    w = {}
    for i in range(n):
        rho, sigma = smooth_knn(distances[i], k)
        for j_pos in range(k):
            j = int(indices[i, j_pos])
            d = distances[i, j_pos]
            w[(i, j)] = math.exp(-max(d - rho, 0.0) / sigma)
    sym = {}
    for (i, j), wij in w.items():
        key = (min(i, j), max(i, j))
        if key in sym:
            continue
        wji = w.get((j, i), 0.0)
        sym[key] = fuzzy_union(wij, wji)
    heads = np.array([ij[0] for ij in sorted(sym)], dtype=np.int64)
    tails = np.array([ij[1] for ij in sorted(sym)], dtype=np.int64)
    weights = np.array([sym[ij] for ij in sorted(sym)], dtype=float)
    return NeighborGraph(
        indices=indices,
        distances=distances,
        edges_head=heads,
        edges_tail=tails,
        edge_weights=weights,
    )


def fit_curve(min_dist: float, spread: float):
    """Calibrate the low-dimensional similarity curve 1/(1 + a x^(2b))."""
    if not (0.0 < min_dist < spread):
        raise InvalidArgument("require 0 < min_dist < spread")
    xs = np.linspace(0.0, 3.0 * spread, 300)
    target = np.where(
        xs < min_dist, 1.0, np.exp(-(xs - min_dist) / spread)
    )

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2.0 * b))

    try:
        (a, b), _ = curve_fit(curve, xs, target, p0=(1.0, 1.0), maxfev=5000)
    except RuntimeError as exc:
        raise NumericError(f"low-dimensional curve fit diverged: {exc}")
    return float(a), float(b)


def embed(graph: NeighborGraph, config: EmbedConfig) -> np.ndarray:
    """Seeded SGD layout of the fuzzy graph; deterministic per seed."""
    n = graph.indices.shape[0]
    rng = np.random.default_rng(config.seed)
    coords = rng.uniform(-10.0, 10.0, size=(n, 2))

    degree = np.zeros(n)
    np.add.at(degree, graph.edges_head, graph.edge_weights)
    np.add.at(degree, graph.edges_tail, graph.edge_weights)
    isolated = degree <= 0.0
    if np.any(isolated):
        warnings.warn(
            f"{int(isolated.sum())} isolated points placed at random",
            stacklevel=2,
        )

    if config.epochs == 0 or graph.edge_weights.size == 0:
        return coords

    a, b = fit_curve(config.min_dist, config.spread)
    w = graph.edge_weights
    epochs_per_sample = np.full(w.shape, -1.0)
    mask = w > 0.0
    epochs_per_sample[mask] = float(w.max()) / w[mask]
    keep = mask
    _layout_backend.optimize_layout(
        coords,
        graph.edges_head[keep],
        graph.edges_tail[keep],
        epochs_per_sample[keep],
        a,
        b,
        config.epochs,
        config.negative_sample_rate,
        1.0,
        config.initial_alpha,
        np.uint64(config.seed * 2654435761 % (2**64 - 1) + 1),
    )
    return coords


def embed_points(points, config: EmbedConfig) -> np.ndarray:
    """Convenience wrapper: graph construction plus layout."""
    graph = build_graph(points, config.k)
    return embed(graph, config)


def trustworthiness(original, embedded, k: int) -> float:
    """Standard rank-penalty trustworthiness of the embedding, in [0, 1]."""
    X = np.atleast_2d(np.asarray(original, dtype=float))
    E = np.atleast_2d(np.asarray(embedded, dtype=float))
    n = X.shape[0]
    if E.shape[0] != n:
        raise InvalidArgument("original and embedded lengths differ")
    if k >= n / 2:
        raise InvalidArgument("k must be below n/2")

    def dist2(A):
        d2 = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(A * A, axis=1)[None, :]
            - 2.0 * A @ A.T
        )
        np.maximum(d2, 0.0, out=d2)
        np.fill_diagonal(d2, np.inf)
        return d2

    d_orig = dist2(X)
    d_emb = dist2(E)
    order_orig = np.argsort(d_orig, axis=1, kind="stable")
    # rank_orig[i, j] = 1-based rank of j among i's original neighbors
    ranks = np.empty((n, n), dtype=float)
    rows = np.arange(n)[:, None]
    ranks[rows, order_orig] = np.arange(1, n + 1)[None, :]
    nn_orig = order_orig[:, :k]
    nn_emb = np.argsort(d_emb, axis=1, kind="stable")[:, :k]

    penalty = 0.0
    for i in range(n):
        extra = np.setdiff1d(nn_emb[i], nn_orig[i], assume_unique=True)
        if extra.size:
            penalty += float(np.sum(ranks[i, extra] - k))
    norm = 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0))
    return 1.0 - norm * penalty


def neighbor_label_purity(embedded, labels, k: int = 10) -> float:
    """Median fraction of embedded k-NN sharing the point's label."""
    E = np.atleast_2d(np.asarray(embedded, dtype=float))
    labels = np.asarray(labels)
    idx, _ = knn(E, k)
    same = labels[idx] == labels[:, None]
    return float(np.median(same.mean(axis=1)))
